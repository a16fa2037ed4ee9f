#include <gtest/gtest.h>

#include <sstream>

#include "fourierident/simulate.hpp"
#include "fourierident/trajectory_io.hpp"
#include "oracles.hpp"

using namespace fident;

namespace {

Trajectory column_trajectory(std::vector<double> col) {
  Eigen::MatrixXd v(1, static_cast<Eigen::Index>(col.size()));
  for (std::size_t n = 0; n < col.size(); ++n) v(0, static_cast<Eigen::Index>(n)) = col[n];
  return Trajectory({1, static_cast<int>(col.size()), 1.0, 1.0, 0.0, 0.0}, v);
}

std::vector<double> row0(const Trajectory& t) {
  std::vector<double> out;
  for (int n = 0; n < t.grid().n_t; ++n) out.push_back(t(0, n));
  return out;
}

Trajectory random_trajectory(int nx, int nt, std::uint64_t seed) {
  return Trajectory({nx, nt, 0.1, 0.01, -1.0, 0.0}, oracle::random_matrix(nx, nt, seed));
}

}  // namespace

TEST(Grid, ExtentAndSamplePositions) {
  const Grid g{10, 5, 0.5, 0.2, -1.0, 3.0};
  EXPECT_DOUBLE_EQ(g.length_x(), 5.0);
  EXPECT_DOUBLE_EQ(g.length_t(), 1.0);
  EXPECT_DOUBLE_EQ(g.x(3), 0.5);
  EXPECT_DOUBLE_EQ(g.t(2), 3.4);
}

TEST(Trajectory, RejectsShapeMismatchAndNonFinite) {
  EXPECT_THROW(Trajectory({3, 3, 1, 1, 0, 0}, Eigen::MatrixXd::Zero(3, 2)), Error);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(Trajectory({2, 2, 1, 1, 0, 0}, bad), Error);
  EXPECT_THROW(Trajectory({2, 2, 0.0, 1, 0, 0}, Eigen::MatrixXd::Zero(2, 2)), Error);
}

TEST(AddNoise, ZeroNoiseIsIdentity) {
  const Trajectory t = random_trajectory(6, 5, 3);
  const Trajectory n = add_noise(t, {0.0, 7});
  EXPECT_EQ(n.values(), t.values());
}

TEST(AddNoise, StandardDeviationMatchesNsrTimesRms) {
  const Trajectory c({256, 256, 1.0, 1.0, 0.0, 0.0}, Eigen::MatrixXd::Constant(256, 256, 2.0));
  const Trajectory n = add_noise(c, {0.5, 11});
  const Eigen::ArrayXXd d = (n.values() - c.values()).array();
  const double mean = d.mean();
  const double sd = std::sqrt((d - mean).square().sum() / (d.size() - 1));
  EXPECT_NEAR(sd, 1.0, 0.05);
}

TEST(AddNoise, DeterministicPerSeedAndDistinctAcrossSeeds) {
  const Trajectory c = random_trajectory(64, 32, 5);
  const Trajectory a = add_noise(c, {0.3, 1});
  const Trajectory b = add_noise(c, {0.3, 1});
  const Trajectory d = add_noise(c, {0.3, 2});
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), d.values());
  const double ra = (a.values() - c.values()).norm(), rd = (d.values() - c.values()).norm();
  EXPECT_NEAR(ra / rd, 1.0, 0.02);
}

TEST(AddNoise, RejectsNegativeRatio) { EXPECT_THROW(add_noise(random_trajectory(2, 2, 1), {-0.1, 0}), Error); }

TEST(Mirror, EvenExamples) {
  EXPECT_EQ(row0(extend_mirror_even(column_trajectory({5, 6}))), (std::vector<double>{5, 6}));
  EXPECT_EQ(row0(extend_mirror_even(column_trajectory({1, 2, 3, 4}))), (std::vector<double>{1, 2, 3, 4, 3, 2}));
}

TEST(Mirror, OddExamples) {
  EXPECT_EQ(row0(extend_mirror_odd(column_trajectory({1, 2, 3, 4}))), (std::vector<double>{1, 2, 3, 4, -3, -2}));
  EXPECT_EQ(row0(extend_mirror_odd(column_trajectory({0, 0, 0}))), (std::vector<double>{0, 0, 0, 0}));
}

TEST(Mirror, TooFewSamples) { EXPECT_THROW(extend_mirror_even(column_trajectory({1})), Error); }

TEST(Mirror, RestrictionIsIdentityAndGridDoubles) {
  const Trajectory t = random_trajectory(4, 7, 9);
  const Trajectory e = extend_mirror_even(t);
  EXPECT_EQ(e.grid().n_t, 12);
  EXPECT_EQ(e.values().leftCols(7), t.values());
}

TEST(Mirror, OddOfPowerIsPowerThenReflect) {
  const Trajectory t = random_trajectory(8, 8, 21);
  const Trajectory cubed(t.grid(), t.values().array().cube().matrix());
  const Eigen::MatrixXd via_op = extend_mirror_odd(cubed).values();
  const Eigen::MatrixXd even = extend_mirror_even(t).values();
  for (int n = 0; n < 14; ++n) {
    const Eigen::VectorXd expect = n < 8 ? Eigen::VectorXd(even.col(n).array().cube()) : Eigen::VectorXd(-even.col(n).array().cube());
    EXPECT_EQ(via_op.col(n), expect);
  }
}

TEST(Mirror, PeriodicSignalHasNoLeakage) {
  // sin(pi n / (nt - 1)) over [0, T] reflects into a whole period; the even extension of
  // cos(pi n / (nt - 1)) is an exact single mode.
  const int nt = 17;
  Eigen::MatrixXd v(1, nt);
  for (int n = 0; n < nt; ++n) v(0, n) = std::cos(std::numbers::pi * n / (nt - 1));
  const Trajectory e = extend_mirror_even(Trajectory({1, nt, 1.0, 1.0, 0.0, 0.0}, v));
  const Eigen::MatrixXcd hat = oracle::dft2(e.values());
  const double peak = std::abs(hat(0, 1));
  for (int k = 0; k < e.grid().n_t; ++k)
    if (k != 1 && k != e.grid().n_t - 1) EXPECT_LT(std::abs(hat(0, k)), 1e-10 * peak);
}

TEST(TrajectoryIo, BinaryRoundTripIsBitwise) {
  const Trajectory t = random_trajectory(4, 4, 13);
  std::stringstream ss;
  save_trajectory(t, ss, TrajectoryFormat::Binary);
  const Trajectory r = load_trajectory(ss, TrajectoryFormat::Binary);
  EXPECT_EQ(r.grid(), t.grid());
  EXPECT_EQ(r.values(), t.values());
}

TEST(TrajectoryIo, CsvRoundTripKeepsFullPrecision) {
  const Trajectory t = random_trajectory(5, 3, 17);
  std::stringstream ss;
  save_trajectory(t, ss, TrajectoryFormat::Csv);
  const Trajectory r = load_trajectory(ss, TrajectoryFormat::Csv);
  EXPECT_EQ(r.grid(), t.grid());
  EXPECT_LT((r.values() - t.values()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TrajectoryIo, CsvWrongColumnCountNamesRow) {
  std::stringstream ss("# nx=2\n# nt=2\n# dx=1\n# dt=1\n# x0=0\n# t0=0\n1,2\n3\n");
  try {
    load_trajectory(ss, TrajectoryFormat::Csv);
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(TrajectoryIo, HeaderRowCountMismatch) {
  std::stringstream ss("# nx=5\n# nt=4\n# dx=1\n# dt=1\n# x0=0\n# t0=0\n1,2,3,4\n1,2,3,4\n1,2,3,4\n1,2,3,4\n");
  try {
    load_trajectory(ss, TrajectoryFormat::Csv);
    FAIL() << "expected a shape mismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
}

TEST(TrajectoryIo, MissingMetadataAndNonFinite) {
  std::stringstream missing("# nx=1\n# nt=1\n1\n");
  EXPECT_THROW(load_trajectory(missing, TrajectoryFormat::Csv), Error);
  std::stringstream inf("# nx=1\n# nt=2\n# dx=1\n# dt=1\n# x0=0\n# t0=0\n1,inf\n");
  EXPECT_THROW(load_trajectory(inf, TrajectoryFormat::Csv), Error);
}

TEST(TrajectoryIo, BinaryBadMagicAndTruncation) {
  std::stringstream bad("XXXX");
  EXPECT_THROW(load_trajectory(bad, TrajectoryFormat::Binary), Error);
  const Trajectory t = random_trajectory(3, 3, 1);
  std::stringstream ss;
  save_trajectory(t, ss, TrajectoryFormat::Binary);
  std::string bytes = ss.str();
  bytes.resize(bytes.size() - 8);
  std::stringstream cut(bytes);
  EXPECT_THROW(load_trajectory(cut, TrajectoryFormat::Binary), Error);
}
