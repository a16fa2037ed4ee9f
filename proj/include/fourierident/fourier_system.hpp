#pragma once

// Discrete Fourier system F c = b.
//
// Column l of F holds, at mode (xi_x, xi_t),
//   (2 pi i k_x / X)^alpha_l * DFT[u^beta_l](xi_x, xi_t) * dx * dt
// and b holds (2 pi i k_t / T) * DFT[u](xi_x, xi_t) * dx * dt, where k is the signed
// wavenumber of xi. The Nyquist wavenumber is zeroed for odd derivative orders so
// that the columns keep the conjugate symmetry of a real signal.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "fourierident/dictionary.hpp"
#include "fourierident/fft.hpp"
#include "fourierident/grid.hpp"

namespace fident {

enum class Extension { Periodic, Mirror };
enum class RowSelection { Full, LowQuadrant };

/// h = xi_x * N_t + xi_t.
struct FrequencyIndexMap {
  int n_x = 0;
  int n_t = 0;

  int size() const { return n_x * n_t; }
  int index(int xi_x, int xi_t) const { return xi_x * n_t + xi_t; }
  std::pair<int, int> mode(int h) const { return {h / n_t, h % n_t}; }
};

/// Signed wavenumber of DFT index xi on an N-point grid, with the odd-order Nyquist convention.
inline double signed_index(int xi, int n, int order) {
  if (2 * xi == n && order % 2 == 1) return 0.0;
  return xi <= n / 2 ? static_cast<double>(xi) : static_cast<double>(xi - n);
}

/// (2 pi i xi / length)^order with the signed-index convention above.
inline cplx derivative_multiplier(int xi, int n, double length, int order) {
  if (order == 0) return {1.0, 0.0};
  const double k = 2.0 * std::numbers::pi * signed_index(xi, n, order) / length;
  return std::pow(cplx(0.0, k), order);
}

struct FourierSystem {
  Grid data_grid;  // grid of the given samples
  Grid grid;       // grid the transforms live on (time-extended in mirror mode)
  Extension extension = Extension::Periodic;
  Dictionary dictionary;
  FrequencyIndexMap map;
  std::vector<int> modes;  // retained mode indices, ascending; row r of F and b is modes[r]
  Eigen::MatrixXcd F;
  Eigen::VectorXcd b;
  // Accumulated |DFT(U)| over the other axis, for xi = 0..floor(N/2).
  std::vector<double> profile_x;
  std::vector<double> profile_t;

  double length_x() const { return grid.length_x(); }
  double length_t() const { return grid.length_t(); }

  int row_of(int h) const {
    const auto it = std::lower_bound(modes.begin(), modes.end(), h);
    return (it != modes.end() && *it == h) ? static_cast<int>(it - modes.begin()) : -1;
  }
};

struct BuildOptions {
  Extension extension = Extension::Mirror;
  RowSelection rows = RowSelection::Full;
  bool odd_jump_midpoint = true;
};

inline FourierSystem build_system(const Trajectory& traj, const Dictionary& dict, BuildOptions options = {}) {
  if (dict.size() == 0) throw Error(ErrorKind::InvalidParameter, "empty dictionary");
  const Grid& g = traj.grid();
  const Eigen::MatrixXd& u = traj.values();
  if (!u.allFinite()) throw Error(ErrorKind::InvalidData, "trajectory contains non-finite values");

  const double max_abs = u.cwiseAbs().maxCoeff();
  const int max_beta = dict.max_beta();
  if (max_abs > 1.0 && max_beta * std::log10(max_abs) > 300.0)
    throw Error(ErrorKind::DynamicRange, "|U|^" + std::to_string(max_beta) +
                                             " exceeds 1e300; rescale the data before identification");

  const bool mirror = options.extension == Extension::Mirror;
  const Trajectory base = mirror ? extend_mirror_even(traj) : traj;

  FourierSystem sys;
  sys.data_grid = g;
  sys.grid = base.grid();
  sys.extension = options.extension;
  sys.dictionary = dict;
  sys.map = {sys.grid.n_x, sys.grid.n_t};
  const int nx = sys.map.n_x;
  const int nt = sys.map.n_t;
  const double X = sys.length_x();
  const double T = sys.length_t();
  const double cell = sys.grid.dx * sys.grid.dt;

  if (options.rows == RowSelection::Full) {
    sys.modes.resize(static_cast<std::size_t>(sys.map.size()));
    for (int h = 0; h < sys.map.size(); ++h) sys.modes[h] = h;
  } else {
    for (int ix = 0; ix <= nx / 2; ++ix)
      for (int it = 0; it <= nt / 2; ++it) sys.modes.push_back(sys.map.index(ix, it));
  }
  const auto rows = static_cast<Eigen::Index>(sys.modes.size());

  // Dynamic variable: spectrum of the (even-extended) data.
  const Eigen::MatrixXcd data_hat = fft2_real(base.values());
  sys.b.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto [ix, it] = sys.map.mode(sys.modes[r]);
    sys.b(r) = derivative_multiplier(it, nt, T, 1) * data_hat(ix, it) * cell;
  }

  sys.profile_x.assign(static_cast<std::size_t>(nx / 2 + 1), 0.0);
  sys.profile_t.assign(static_cast<std::size_t>(nt / 2 + 1), 0.0);
  for (int ix = 0; ix < nx; ++ix)
    for (int it = 0; it < nt; ++it) {
      const double mag = std::abs(data_hat(ix, it));
      if (ix <= nx / 2) sys.profile_x[ix] += mag;
      if (it <= nt / 2) sys.profile_t[it] += mag;
    }

  // One transform per monomial degree; derivative orders only change the multiplier.
  sys.F.resize(rows, static_cast<Eigen::Index>(dict.size()));
  std::vector<Eigen::MatrixXcd> power_hat(static_cast<std::size_t>(max_beta + 1));
  std::vector<bool> have(static_cast<std::size_t>(max_beta + 1), false);
  for (std::size_t l = 0; l < dict.size(); ++l) {
    const Feature f = dict[l];
    if (!have[f.beta]) {
      if (f.beta == 0) {
        // The constant feature transforms as the constant function in either mode.
        Eigen::MatrixXcd hat = Eigen::MatrixXcd::Zero(nx, nt);
        hat(0, 0) = static_cast<double>(nx) * nt;
        power_hat[0] = std::move(hat);
      } else {
        const Trajectory powered(g, u.array().pow(f.beta).matrix());
        if (mirror) {
          Eigen::MatrixXd odd = extend_mirror_odd(powered).values();
          if (options.odd_jump_midpoint) {
            // t = 0 and t = T sit on the jumps of the odd extension; use the midpoint value.
            odd.col(0).setZero();
            odd.col(g.n_t - 1).setZero();
          }
          power_hat[f.beta] = fft2_real(odd);
        } else {
          power_hat[f.beta] = fft2_real(powered.values());
        }
      }
      have[f.beta] = true;
    }
    const Eigen::MatrixXcd& hat = power_hat[f.beta];
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto [ix, it] = sys.map.mode(sys.modes[r]);
      sys.F(r, static_cast<Eigen::Index>(l)) = derivative_multiplier(ix, nx, X, f.alpha) * hat(ix, it) * cell;
    }
  }
  return sys;
}

/// Rows of a system (smoothed or not) restricted to a list of modes.
struct SpectralBlock {
  std::vector<int> modes;  // ascending
  Eigen::MatrixXcd F;
  Eigen::VectorXcd b;

  int row_of(int h) const {
    const auto it = std::lower_bound(modes.begin(), modes.end(), h);
    return (it != modes.end() && *it == h) ? static_cast<int>(it - modes.begin()) : -1;
  }
};

/// Compactly supported bump (1 - (x / (m_x dx))^2)^p_x (1 - (t / (m_t dt))^2)^p_t, described
/// by its DFT on the transform grid, normalized to unit value at DC.
struct SmoothingKernel {
  int m_x = 0;
  int m_t = 0;
  int p_x = 0;
  int p_t = 0;
  Eigen::VectorXd phi_hat_x;  // length N_x
  Eigen::VectorXd phi_hat_t;  // length N_t

  bool is_identity() const { return m_x == 0 && m_t == 0; }
  double phi_hat(int xi_x, int xi_t) const { return phi_hat_x(xi_x) * phi_hat_t(xi_t); }
};

namespace detail {

/// Samples of (1 - (j/m)^2)^p on an n-point periodic grid, centred at index 0.
inline Eigen::VectorXd bump_samples(int n, int m, int p) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (int j = -(m - 1); j <= m - 1; ++j) {
    const double r = static_cast<double>(j) / m;
    s((j % n + n) % n) += std::pow(1.0 - r * r, p);
  }
  return s;
}

inline Eigen::VectorXd unit_dc_spectrum(const Eigen::VectorXd& samples) {
  const Eigen::VectorXcd hat = fft_real(samples);
  // Symmetric samples give a real spectrum; drop the roundoff imaginary part.
  Eigen::VectorXd re = hat.real();
  return re / re(0);
}

}  // namespace detail

inline SmoothingKernel make_kernel(int m_x, int m_t, int p_x, int p_t, int n_x, int n_t) {
  if (m_x < 1 || m_t < 1) throw Error(ErrorKind::KernelTooNarrow, "kernel half-widths must be >= 1");
  if (2 * m_x > n_x || 2 * m_t > n_t)
    throw Error(ErrorKind::InvalidParameter, "kernel support wider than the grid");
  SmoothingKernel k;
  k.m_x = m_x;
  k.m_t = m_t;
  k.p_x = p_x;
  k.p_t = p_t;
  k.phi_hat_x = detail::unit_dc_spectrum(detail::bump_samples(n_x, m_x, p_x));
  k.phi_hat_t = detail::unit_dc_spectrum(detail::bump_samples(n_t, m_t, p_t));
  return k;
}

inline SmoothingKernel identity_kernel(int n_x, int n_t) {
  SmoothingKernel k;
  k.phi_hat_x = Eigen::VectorXd::Ones(n_x);
  k.phi_hat_t = Eigen::VectorXd::Ones(n_t);
  return k;
}

/// Smallest half-width whose Gaussian-matched spectrum has dropped to `decay` of its DC value
/// at mode `transition`; 0 when no half-width below n/2 achieves it.
inline int gaussian_matched_half_width(int n, int transition, int power, double decay = 1e-4) {
  if (transition < 1) return 0;
  // Bump (1 - s^2)^p on [-1, 1] has variance 1 / (2p + 3); a Gaussian of std sigma (in samples)
  // has |hat| = exp(-2 pi^2 sigma^2 xi^2 / n^2).
  const double sigma = n * std::sqrt(2.0 * std::log(1.0 / decay)) / (2.0 * std::numbers::pi * transition);
  const int m = static_cast<int>(std::ceil(sigma * std::sqrt(2.0 * power + 3.0) - 1e-12));
  return (m <= n / 2 - 1) ? m : 0;
}

struct KernelChoice {
  SmoothingKernel kernel;
  bool fallback_x = false;
  bool fallback_t = false;
};

/// p_x = alpha_max + 2, p_t = 3; half-widths from the Gaussian-matched decay rule at the
/// transition modes, falling back to floor(N/20) when the rule has no admissible solution.
inline KernelChoice choose_kernel(const FourierSystem& sys, int a_x, int a_t) {
  const int p_x = sys.dictionary.max_alpha() + 2;
  const int p_t = 3;
  KernelChoice choice;
  int m_x = gaussian_matched_half_width(sys.map.n_x, a_x, p_x);
  int m_t = gaussian_matched_half_width(sys.map.n_t, a_t, p_t);
  if (m_x == 0) {
    m_x = sys.map.n_x / 20;
    choice.fallback_x = true;
  }
  if (m_t == 0) {
    m_t = sys.map.n_t / 20;
    choice.fallback_t = true;
  }
  if (m_x < 1 || m_t < 1)
    throw Error(ErrorKind::KernelTooNarrow, "selected kernel half-width below 1 (m_x=" + std::to_string(m_x) +
                                                ", m_t=" + std::to_string(m_t) + ")");
  choice.kernel = make_kernel(m_x, m_t, p_x, p_t, sys.map.n_x, sys.map.n_t);
  return choice;
}

/// Rows of the system at `region`, each multiplied by the kernel spectrum at that mode.
inline SpectralBlock smooth(const FourierSystem& sys, const SmoothingKernel& kernel, const std::vector<int>& region) {
  if (!std::is_sorted(region.begin(), region.end()))
    throw Error(ErrorKind::InvalidParameter, "region indices must be ascending");
  SpectralBlock out;
  out.modes = region;
  out.F.resize(static_cast<Eigen::Index>(region.size()), sys.F.cols());
  out.b.resize(static_cast<Eigen::Index>(region.size()));
  for (std::size_t i = 0; i < region.size(); ++i) {
    const int r = sys.row_of(region[i]);
    if (r < 0) throw Error(ErrorKind::InvalidParameter, "mode " + std::to_string(region[i]) + " is not in the system");
    const auto [ix, it] = sys.map.mode(region[i]);
    const double w = kernel.phi_hat(ix, it);
    out.F.row(static_cast<Eigen::Index>(i)) = sys.F.row(r) * w;
    out.b(static_cast<Eigen::Index>(i)) = sys.b(r) * w;
  }
  return out;
}

/// Unsmoothed restriction.
inline SpectralBlock restrict_rows(const FourierSystem& sys, const std::vector<int>& region) {
  return smooth(sys, identity_kernel(sys.map.n_x, sys.map.n_t), region);
}

/// Real parts over `real_set` stacked above imaginary parts over `imag_set`.
struct StackedSystem {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  std::size_t n_real = 0;
  std::size_t n_imag = 0;

  Eigen::Index rows() const { return A.rows(); }
};

inline StackedSystem stack_real_imag(const SpectralBlock& block, const std::vector<int>& real_set,
                                     const std::vector<int>& imag_set) {
  if (real_set.empty() && imag_set.empty()) throw Error(ErrorKind::EmptySystem, "stacking an empty region");
  StackedSystem s;
  s.n_real = real_set.size();
  s.n_imag = imag_set.size();
  const auto n = static_cast<Eigen::Index>(s.n_real + s.n_imag);
  s.A.resize(n, block.F.cols());
  s.y.resize(n);
  Eigen::Index row = 0;
  auto take = [&](const std::vector<int>& set, bool real) {
    for (int h : set) {
      const int r = block.row_of(h);
      if (r < 0) throw Error(ErrorKind::InvalidParameter, "mode " + std::to_string(h) + " outside the block");
      if (real) {
        s.A.row(row) = block.F.row(r).real();
        s.y(row) = block.b(r).real();
      } else {
        s.A.row(row) = block.F.row(r).imag();
        s.y(row) = block.b(r).imag();
      }
      ++row;
    }
  };
  take(real_set, true);
  take(imag_set, false);
  return s;
}

/// Stacks every mode of the block for both parts.
inline StackedSystem stack_real_imag(const SpectralBlock& block) { return stack_real_imag(block, block.modes, block.modes); }

}  // namespace fident
