#include <gtest/gtest.h>

#include "fourierident/regression.hpp"
#include "oracles.hpp"

using namespace fident;

namespace {

StackedSystem make_stacked(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  StackedSystem s;
  s.A = A;
  s.y = y;
  s.n_real = static_cast<std::size_t>(A.rows());
  return s;
}

ScaleSet unit_scales(int L) {
  ScaleSet s;
  s.s = Eigen::VectorXd::Ones(L);
  return s;
}

}  // namespace

TEST(Scales, PowerRuleAndLinearity) {
  const Dictionary d({{0, 0}, {1, 1}, {1, 2}});
  Eigen::MatrixXd A(2, 3);
  A << 1, 2, 10, -3, -4, 20;
  const StackedSystem s = make_stacked(A, Eigen::Vector2d(1, -3));
  const ScaleSet sc = compute_scales(s, d);
  EXPECT_DOUBLE_EQ(sc.s(0), 2.0);
  EXPECT_DOUBLE_EQ(sc.s(1), 3.0);
  EXPECT_DOUBLE_EQ(sc.s(2), 2.0 * 3.0);  // beta * mean|(1, 1) column|
  EXPECT_DOUBLE_EQ(sc.s_b, 2.0);
  const ScaleSet ten = compute_scales(make_stacked(10 * A, s.y), d);
  EXPECT_TRUE(ten.s.isApprox(10 * sc.s));
}

TEST(Scales, ZeroColumnIsFloored) {
  const Dictionary d({{0, 0}, {1, 1}});
  Eigen::MatrixXd A(2, 2);
  A << 1, 0, 1, 0;
  const ScaleSet sc = compute_scales(make_stacked(A, Eigen::Vector2d(1, 1)), d);
  EXPECT_EQ(sc.floored, std::vector<int>{1});
  EXPECT_GT(sc.s(1), 0.0);
}

TEST(NormalizedLeastSquares, ConsistentSystemIsRecovered) {
  const Eigen::MatrixXd A = oracle::random_matrix(30, 6, 1);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
  c(1) = 2.5;
  c(4) = -0.3;
  ScaleSet sc;
  sc.s = (Eigen::VectorXd(6) << 1e-3, 2, 5, 1e4, 0.7, 1).finished();
  sc.s_b = 42.0;
  const CoefficientVector r = normalized_least_squares(make_stacked(A, A * c), sc, {1, 4});
  EXPECT_LT((r.values - c).norm() / c.norm(), 1e-10);
  EXPECT_EQ(r.values(0), 0.0);
}

TEST(NormalizedLeastSquares, ScalingRoundTrip) {
  const Eigen::MatrixXd A = oracle::random_matrix(20, 5, 2);
  const Eigen::VectorXd y = oracle::random_matrix(20, 1, 3).col(0);
  ScaleSet sc;
  sc.s = (Eigen::VectorXd(5) << 3, 0.01, 7, 1, 100).finished();
  sc.s_b = 0.2;
  const std::vector<int> sup{0, 2, 3};
  const CoefficientVector r = normalized_least_squares(make_stacked(A, y), sc, sup);
  Eigen::MatrixXd sub(20, 3);
  for (int j = 0; j < 3; ++j) sub.col(j) = A.col(sup[j]);
  const Eigen::VectorXd plain = sub.householderQr().solve(y);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.values(sup[j]), plain(j), 1e-10);
}

TEST(NormalizedLeastSquares, RankDeficientColumnDropped) {
  Eigen::MatrixXd A = oracle::random_matrix(10, 3, 4);
  A.col(2) = 2.0 * A.col(0);
  const CoefficientVector r = normalized_least_squares(make_stacked(A, A.col(0) + A.col(1)), unit_scales(3), {0, 1, 2});
  EXPECT_EQ(r.dropped.size(), 1u);
  EXPECT_LT((A * r.values - (A.col(0) + A.col(1))).norm(), 1e-10);
}

TEST(NormalizedLeastSquares, Errors) {
  const Eigen::MatrixXd A = oracle::random_matrix(2, 4, 5);
  const StackedSystem s = make_stacked(A, Eigen::Vector2d(1, 1));
  EXPECT_THROW(normalized_least_squares(s, unit_scales(4), {}), Error);
  EXPECT_THROW(normalized_least_squares(s, unit_scales(4), {0, 1, 2}), Error);
}

TEST(SubspacePursuit, OrthogonalColumns) {
  const Eigen::MatrixXd Q = oracle::random_matrix(12, 6, 6).householderQr().householderQ() * Eigen::MatrixXd::Identity(12, 6);
  const Eigen::VectorXd y = 3.0 * Q.col(1) - 2.0 * Q.col(4);
  const SupportSet s = subspace_pursuit(Q, y, 2);
  EXPECT_EQ(s.indices, (std::vector<int>{1, 4}));
}

TEST(SubspacePursuit, MatchesExhaustiveSearchOnPlantedSystems) {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const Eigen::MatrixXd A = oracle::random_matrix(40, 8, seed);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 7);
    int a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    const Eigen::VectorXd y = 1.5 * A.col(a) - 0.7 * A.col(b);
    const SupportSet s = subspace_pursuit(A, y, 2);
    EXPECT_EQ(s.indices, oracle::best_subset(A, y, 2)) << seed;
    std::vector<int> planted{std::min(a, b), std::max(a, b)};
    EXPECT_EQ(s.indices, planted) << seed;
  }
}

TEST(SubspacePursuit, InvariantToColumnScaling) {
  const Eigen::MatrixXd A = oracle::random_matrix(30, 10, 77);
  const Eigen::VectorXd y = A.col(2) + 0.5 * A.col(7) - A.col(9);
  Eigen::MatrixXd B = A;
  for (int j = 0; j < 10; ++j) B.col(j) *= std::pow(10.0, j - 5);
  EXPECT_EQ(subspace_pursuit(A, y, 3).indices, subspace_pursuit(B, y, 3).indices);
}

TEST(SubspacePursuit, InvalidSparsity) {
  const Eigen::MatrixXd A = oracle::random_matrix(5, 8, 1);
  const Eigen::VectorXd y = A.col(0);
  EXPECT_THROW(subspace_pursuit(A, y, 0), Error);
  EXPECT_THROW(subspace_pursuit(A, y, 9), Error);
  EXPECT_THROW(subspace_pursuit(A, y, 6), Error);
}

TEST(ContributionScores, Formula) {
  Eigen::MatrixXd A(2, 3);
  A << 3, 1, 0, 4, 1, 0;
  CoefficientVector c;
  c.values = Eigen::Vector3d(2.0, 0.0, 1.0);
  const auto s = contribution_scores(c, make_stacked(A, Eigen::Vector2d::Zero()), {0, 1});
  EXPECT_DOUBLE_EQ(s[0], 10.0);
  EXPECT_DOUBLE_EQ(s[1], 0.0);
  Eigen::MatrixXd A2 = A;
  A2.col(0) *= 2;
  c.values(0) = 1.0;
  EXPECT_DOUBLE_EQ(contribution_scores(c, make_stacked(A2, Eigen::Vector2d::Zero()), {0})[0], 10.0);
  const auto n = normalized_scores({2.0, 1.0, 4.0});
  EXPECT_EQ(n, (std::vector<double>{0.5, 0.25, 1.0}));
}

TEST(GroupTrim, RemovesSingleLowFeature) {
  EXPECT_EQ(group_trim({3, 5, 7, 9}, {1.0, 0.59, 0.63, 0.01}, 0.08), (std::vector<int>{3, 5, 7}));
}

TEST(GroupTrim, RemovesLowGroupAtOnce) {
  EXPECT_EQ(group_trim({1, 2, 3, 4}, {0.5, 0.5, 0.01, 0.02}, 0.08), (std::vector<int>{1, 2}));
}

TEST(GroupTrim, EqualScoresKeepEverything) {
  const std::vector<int> sup{1, 2, 3, 4};
  EXPECT_EQ(group_trim(sup, {1, 1, 1, 1}, 0.25), sup);
  EXPECT_EQ(group_trim(sup, {1, 1, 1, 1}, 0.1), sup);
}

TEST(GroupTrim, NeverRemovesTop) {
  EXPECT_EQ(group_trim({4, 8}, {0.0, 0.0}, 0.99), (std::vector<int>{4, 8}));  // zero total: unchanged
  EXPECT_EQ(group_trim({4, 8}, {1.0, 1e-9}, 0.99), std::vector<int>{4});
  EXPECT_EQ(group_trim({4}, {1.0}, 0.99), std::vector<int>{4});
}

TEST(TrimToConvergence, DropsSpuriousColumnAndIsIdempotent) {
  const Eigen::MatrixXd A = oracle::random_matrix(50, 6, 8);
  const Eigen::VectorXd y = A.col(0) + A.col(3) + 0.001 * A.col(5);
  const StackedSystem s = make_stacked(A, y);
  SupportSet init;
  init.indices = {0, 3, 5};
  init.sparsity_requested = 3;
  const TrimResult r = trim_to_convergence(s, unit_scales(6), init, 0.08);
  EXPECT_EQ(r.support.indices, (std::vector<int>{0, 3}));
  EXPECT_EQ(r.support.trim_iterations, 1);
  const TrimResult again = trim_to_convergence(s, unit_scales(6), r.support, 0.08);
  EXPECT_EQ(again.support.indices, r.support.indices);
  EXPECT_EQ(again.support.trim_iterations, 0);
}
