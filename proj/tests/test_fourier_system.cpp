#include <gtest/gtest.h>

#include "fourierident/fourier_system.hpp"
#include "oracles.hpp"

using namespace fident;

namespace {

constexpr double kPi = std::numbers::pi;

Trajectory random_trajectory(int nx, int nt, std::uint64_t seed, double dx = 0.3, double dt = 0.05) {
  return Trajectory({nx, nt, dx, dt, 0.0, 0.0}, oracle::random_matrix(nx, nt, seed));
}

// Worst entrywise difference, relative to the largest entry of the same column.
double column_relative(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  double worst = 0.0;
  for (Eigen::Index l = 0; l < b.cols(); ++l) {
    const double scale = std::max(b.col(l).cwiseAbs().maxCoeff(), 1e-300);
    worst = std::max(worst, (a.col(l) - b.col(l)).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace

TEST(Dictionary, Sizes) {
  EXPECT_EQ(build_dictionary(6, 6).size(), 43u);
  EXPECT_EQ(build_dictionary(2, 2).size(), 7u);
  const Dictionary d = build_dictionary(1, 1);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.name(0), "1");
  EXPECT_EQ(d.name(1), "u");
  EXPECT_EQ(d.name(2), "u_x");
}

TEST(Dictionary, NamesAndLookup) {
  const Dictionary d = build_dictionary(6, 6);
  EXPECT_EQ(feature_name({3, 1}), "u_xxx");
  EXPECT_EQ(feature_name({1, 2}), "(u^2)_x");
  EXPECT_EQ(feature_name({0, 3}), "u^3");
  ASSERT_TRUE(d.index_of({4, 1}));
  EXPECT_EQ(d[static_cast<std::size_t>(*d.index_of({4, 1}))], (Feature{4, 1}));
  EXPECT_FALSE(d.index_of({7, 1}));
  EXPECT_THROW(Dictionary({{0, 0}, {0, 0}}), Error);
  EXPECT_THROW(Dictionary({{1, 0}}), Error);
  EXPECT_THROW(build_dictionary(0, 1), Error);
}

TEST(FourierSystem, PeriodicMatchesNaiveDft) {
  const Dictionary dict = build_dictionary(6, 6);
  for (auto [nx, nt] : {std::pair{8, 6}, std::pair{16, 16}, std::pair{7, 5}}) {
    const Trajectory tr = random_trajectory(nx, nt, 100 + nx);
    const FourierSystem sys = build_system(tr, dict, {Extension::Periodic, RowSelection::Full});
    const oracle::System ref = oracle::periodic_system(tr, dict);
    EXPECT_LT(column_relative(sys.F, ref.F), 1e-10) << nx << "x" << nt;
    EXPECT_LT((sys.b - ref.b).cwiseAbs().maxCoeff() / ref.b.cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(FourierSystem, MirrorMatchesNaiveDft) {
  const Dictionary dict = build_dictionary(6, 6);
  const Trajectory tr = random_trajectory(8, 6, 7);
  const FourierSystem sys = build_system(tr, dict, {Extension::Mirror, RowSelection::Full});
  EXPECT_EQ(sys.map.n_t, 10);
  const oracle::System ref = oracle::mirror_system(tr, dict);
  EXPECT_LT(column_relative(sys.F, ref.F), 1e-10);
  EXPECT_LT((sys.b - ref.b).cwiseAbs().maxCoeff() / ref.b.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FourierSystem, LowQuadrantKeepsNonNegativeModes) {
  const Dictionary dict = build_dictionary(2, 2);
  const Trajectory tr = random_trajectory(8, 6, 8);
  const FourierSystem full = build_system(tr, dict, {Extension::Periodic, RowSelection::Full});
  const FourierSystem low = build_system(tr, dict, {Extension::Periodic, RowSelection::LowQuadrant});
  EXPECT_EQ(low.modes.size(), 5u * 4u);
  for (std::size_t r = 0; r < low.modes.size(); ++r) {
    const auto [ix, it] = low.map.mode(low.modes[r]);
    EXPECT_LE(ix, 4);
    EXPECT_LE(it, 3);
    EXPECT_EQ(low.F.row(static_cast<Eigen::Index>(r)), full.F.row(low.modes[r]));
  }
}

TEST(FourierSystem, ConstantData) {
  const Dictionary dict = build_dictionary(1, 1);
  const Trajectory tr({8, 4, 0.5, 0.25, 0.0, 0.0}, Eigen::MatrixXd::Constant(8, 4, 3.0));
  const FourierSystem sys = build_system(tr, dict, {Extension::Periodic, RowSelection::Full});
  const double XT = 4.0 * 1.0;
  EXPECT_NEAR(sys.F(0, 1).real(), 3.0 * XT, 1e-12);
  for (int h = 1; h < sys.map.size(); ++h) EXPECT_LT(std::abs(sys.F(h, 1)), 1e-12);
  EXPECT_NEAR(sys.F(0, 0).real(), XT, 1e-12);
}

TEST(FourierSystem, SingleSineDerivative) {
  const int nx = 16, nt = 4;
  const Grid g{nx, nt, 2.0 / nx, 0.1, 0.0, 0.0};
  Eigen::MatrixXd u(nx, nt);
  for (int i = 0; i < nx; ++i) u.row(i).setConstant(std::sin(2 * kPi * g.x(i) / g.length_x()));
  const FourierSystem sys = build_system(Trajectory(g, u), build_dictionary(1, 1), {Extension::Periodic, RowSelection::Full});
  const double expect = (2 * kPi / g.length_x()) * g.length_x() * g.length_t() / 2;
  for (int h = 0; h < sys.map.size(); ++h) {
    const auto [ix, it] = sys.map.mode(h);
    const double mag = std::abs(sys.F(h, 2));
    if (it == 0 && (ix == 1 || ix == nx - 1))
      EXPECT_NEAR(mag, expect, 1e-12);
    else
      EXPECT_LT(mag, 1e-12);
  }
}

TEST(FourierSystem, ConjugateSymmetry) {
  const Trajectory tr = random_trajectory(8, 6, 12);
  const FourierSystem sys = build_system(tr, build_dictionary(3, 3), {Extension::Mirror, RowSelection::Full});
  const int nx = sys.map.n_x, nt = sys.map.n_t;
  for (int ix = 0; ix < nx; ++ix)
    for (int it = 0; it < nt; ++it) {
      const int h = sys.map.index(ix, it), hc = sys.map.index((nx - ix) % nx, (nt - it) % nt);
      EXPECT_LT(std::abs(sys.b(h) - std::conj(sys.b(hc))), 1e-12);
      EXPECT_LT((sys.F.row(h) - sys.F.row(hc).conjugate()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(FourierSystem, DynamicRangeGuard) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Ones(4, 4);
  u(0, 0) = 1e60;
  EXPECT_THROW(build_system(Trajectory({4, 4, 1, 1, 0, 0}, u), build_dictionary(2, 6)), Error);
}

TEST(Smoothing, IdentityKernelRestricts) {
  const Trajectory tr = random_trajectory(8, 6, 4);
  const FourierSystem sys = build_system(tr, build_dictionary(2, 2), {Extension::Periodic, RowSelection::Full});
  const std::vector<int> region{0, 3, 7, 20};
  const SpectralBlock s = smooth(sys, identity_kernel(8, 6), region);
  for (std::size_t i = 0; i < region.size(); ++i) {
    EXPECT_EQ(s.F.row(static_cast<Eigen::Index>(i)), sys.F.row(region[i]));
    EXPECT_EQ(s.b(static_cast<Eigen::Index>(i)), sys.b(region[i]));
  }
}

TEST(Smoothing, MatchesCircularConvolution) {
  const int nx = 8, nt = 8;
  const Trajectory tr = random_trajectory(nx, nt, 31);
  const Dictionary dict = build_dictionary(2, 2);
  const FourierSystem sys = build_system(tr, dict, {Extension::Periodic, RowSelection::Full});
  const SmoothingKernel k = make_kernel(3, 2, 4, 3, nx, nt);

  // Kernel samples in physical space, unit mass.
  Eigen::MatrixXd ker = Eigen::MatrixXd::Zero(nx, nt);
  for (int j = -2; j <= 2; ++j)
    for (int m = -1; m <= 1; ++m)
      ker((j + nx) % nx, (m + nt) % nt) = std::pow(1 - j * j / 9.0, 4) * std::pow(1 - m * m / 4.0, 3);
  ker /= ker.sum();

  std::vector<int> all(static_cast<std::size_t>(nx * nt));
  std::iota(all.begin(), all.end(), 0);
  const SpectralBlock s = smooth(sys, k, all);

  const Grid& g = tr.grid();
  std::vector<Eigen::MatrixXd> powered;
  for (int beta = 0; beta <= 2; ++beta) powered.push_back(oracle::circular_convolution(ker, tr.values().array().pow(beta).matrix()));
  const oracle::System ref =
      oracle::system_from_samples(oracle::circular_convolution(ker, tr.values()), powered, dict, g.dx, g.dt);
  EXPECT_LT(column_relative(s.F, ref.F), 1e-8);
  EXPECT_LT((s.b - ref.b).cwiseAbs().maxCoeff() / ref.b.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Smoothing, DeltaDataGivesKernelSpectrum) {
  const int nx = 16, nt = 8;
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(nx, nt);
  u(0, 0) = 1.0;
  const Trajectory tr({nx, nt, 1.0, 1.0, 0.0, 0.0}, u);
  const FourierSystem sys = build_system(tr, build_dictionary(1, 1), {Extension::Periodic, RowSelection::Full});
  const SmoothingKernel k = make_kernel(4, 2, 3, 3, nx, nt);
  std::vector<int> all(static_cast<std::size_t>(nx * nt));
  std::iota(all.begin(), all.end(), 0);
  const SpectralBlock s = smooth(sys, k, all);
  for (int h = 0; h < nx * nt; ++h) {
    const auto [ix, it] = sys.map.mode(h);
    EXPECT_NEAR(std::abs(s.F(h, 1) - k.phi_hat(ix, it)), 0.0, 1e-12);
  }
}

TEST(Kernel, CompactSupportAndUnitDc) {
  const SmoothingKernel k = make_kernel(5, 3, 8, 3, 64, 32);
  EXPECT_DOUBLE_EQ(k.phi_hat(0, 0), 1.0);
  const Eigen::VectorXd s = detail::bump_samples(64, 5, 8);
  EXPECT_EQ(s(5), 0.0);
  EXPECT_EQ(s(64 - 5), 0.0);
  EXPECT_GT(s(4), 0.0);
  EXPECT_THROW(make_kernel(0, 3, 8, 3, 64, 32), Error);
}

TEST(Kernel, GaussianMatchedRule) {
  const Trajectory tr = random_trajectory(64, 32, 2);
  const FourierSystem sys = build_system(tr, build_dictionary(6, 6), {Extension::Mirror, RowSelection::LowQuadrant});
  const KernelChoice c = choose_kernel(sys, 10, 8);
  EXPECT_EQ(c.kernel.p_x, 8);
  EXPECT_EQ(c.kernel.p_t, 3);
  // m is the smallest half-width whose matched Gaussian has decayed to 1e-4 at the transition.
  auto gauss = [](int n, int m, int p, int a) {
    const double sigma = m / std::sqrt(2.0 * p + 3.0);
    return std::exp(-2 * kPi * kPi * sigma * sigma * a * a / (double(n) * n));
  };
  const int m_x = c.kernel.m_x;
  EXPECT_LE(gauss(64, m_x, 8, 10), 1e-4);
  EXPECT_GT(gauss(64, m_x - 1, 8, 10), 1e-4);
  // a* = 1 is too low for any admissible width: fall back to N/20.
  const KernelChoice f = choose_kernel(sys, 1, 1);
  EXPECT_TRUE(f.fallback_x);
  EXPECT_EQ(f.kernel.m_x, 64 / 20);
  EXPECT_EQ(f.kernel.m_t, sys.map.n_t / 20);
}

TEST(Stacking, ShapesAndRealSpectrum) {
  SpectralBlock blk;
  blk.modes = {1, 2, 3, 4};
  blk.F = Eigen::MatrixXcd::Random(4, 43);
  blk.b = Eigen::VectorXcd::Random(4);
  const StackedSystem s = stack_real_imag(blk, {1, 2, 4}, {2, 3});
  EXPECT_EQ(s.rows(), 5);
  EXPECT_EQ(s.A.cols(), 43);
  EXPECT_EQ(s.A(3, 0), blk.F(1, 0).imag());
  EXPECT_THROW(stack_real_imag(blk, {}, {}), Error);
}

TEST(Stacking, StackedLeastSquaresEqualsComplex) {
  const Eigen::MatrixXcd F = Eigen::MatrixXcd::Random(30, 4);
  const Eigen::VectorXcd c_true = Eigen::VectorXcd::Constant(4, cplx(0.5, 0.0));
  const Eigen::VectorXcd b = F * c_true + 0.01 * Eigen::VectorXcd::Random(30);
  SpectralBlock blk;
  blk.modes.resize(30);
  std::iota(blk.modes.begin(), blk.modes.end(), 0);
  blk.F = F;
  blk.b = b;
  const StackedSystem s = stack_real_imag(blk);
  const Eigen::VectorXd stacked = s.A.colPivHouseholderQr().solve(s.y);
  // Real coefficients minimising |F c - b| over the complex system: normal equations Re(F^H F) c = Re(F^H b).
  const Eigen::MatrixXd N = (F.adjoint() * F).real();
  const Eigen::VectorXd rhs = (F.adjoint() * b).real();
  const Eigen::VectorXd complex_ls = N.ldlt().solve(rhs);
  EXPECT_LT((stacked - complex_ls).norm(), 1e-8);
}
