#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "fourierident/error.hpp"

namespace fident {

/// Uniform space-time sampling. Sample (i, n) sits at (x0 + i*dx, t0 + n*dt).
struct Grid {
  int n_x = 0;
  int n_t = 0;
  double dx = 0.0;
  double dt = 0.0;
  double x0 = 0.0;
  double t0 = 0.0;

  double length_x() const { return n_x * dx; }
  double length_t() const { return n_t * dt; }
  double x(int i) const { return x0 + i * dx; }
  double t(int n) const { return t0 + n * dt; }

  void validate() const {
    if (n_x <= 0 || n_t <= 0) throw Error(ErrorKind::InvalidData, "grid sizes must be positive");
    if (!(dx > 0.0) || !(dt > 0.0) || !std::isfinite(dx) || !std::isfinite(dt))
      throw Error(ErrorKind::InvalidData, "grid spacings must be finite and positive");
    if (!std::isfinite(x0) || !std::isfinite(t0))
      throw Error(ErrorKind::InvalidData, "grid origin must be finite");
    if (!std::isfinite(length_x()) || !std::isfinite(length_t()))
      throw Error(ErrorKind::InvalidData, "grid extent is not finite");
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Samples of u on a Grid; rows are the spatial index, columns the temporal index.
class Trajectory {
 public:
  Trajectory() = default;

  Trajectory(Grid grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {
    grid_.validate();
    if (values_.rows() != grid_.n_x || values_.cols() != grid_.n_t)
      throw Error(ErrorKind::ShapeMismatch,
                  "values are " + std::to_string(values_.rows()) + "x" +
                      std::to_string(values_.cols()) + " but grid is " +
                      std::to_string(grid_.n_x) + "x" + std::to_string(grid_.n_t));
    if (!values_.allFinite()) throw Error(ErrorKind::InvalidData, "trajectory contains non-finite values");
  }

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double operator()(int i, int n) const { return values_(i, n); }

  double rms() const {
    if (values_.size() == 0) return 0.0;
    return std::sqrt(values_.squaredNorm() / static_cast<double>(values_.size()));
  }

 private:
  Grid grid_;
  Eigen::MatrixXd values_;
};

struct NoiseSpec {
  double nsr = 0.0;
  std::uint64_t seed = 0;
};

/// Adds i.i.d. Gaussian noise with standard deviation nsr * RMS(clean).
inline Trajectory add_noise(const Trajectory& clean, const NoiseSpec& spec) {
  if (!(spec.nsr >= 0.0) || !std::isfinite(spec.nsr))
    throw Error(ErrorKind::InvalidParameter, "noise-to-signal ratio must be finite and >= 0");
  if (!clean.values().allFinite()) throw Error(ErrorKind::InvalidData, "clean trajectory is not finite");
  if (spec.nsr == 0.0) return clean;

  const double sigma = spec.nsr * clean.rms();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::MatrixXd noisy = clean.values();
  // Column-major traversal keeps the draw order tied to (n, i) for reproducibility.
  for (Eigen::Index n = 0; n < noisy.cols(); ++n)
    for (Eigen::Index i = 0; i < noisy.rows(); ++i) noisy(i, n) += normal(rng);
  return Trajectory(clean.grid(), std::move(noisy));
}

namespace detail {

inline Trajectory mirror_in_time(const Trajectory& traj, double reflected_sign) {
  const Grid& g = traj.grid();
  if (g.n_t < 2) throw Error(ErrorKind::InvalidData, "mirror extension needs at least 2 time samples");
  const int nt_ext = 2 * g.n_t - 2;
  Eigen::MatrixXd out(g.n_x, nt_ext);
  out.leftCols(g.n_t) = traj.values();
  for (int n = g.n_t; n < nt_ext; ++n) out.col(n) = reflected_sign * traj.values().col(2 * g.n_t - 2 - n);
  Grid ext = g;
  ext.n_t = nt_ext;
  return Trajectory(ext, std::move(out));
}

}  // namespace detail

/// Even reflection in t sharing both endpoints: length 2*n_t - 2, exactly periodic.
inline Trajectory extend_mirror_even(const Trajectory& traj) { return detail::mirror_in_time(traj, 1.0); }

/// Odd reflection in t; same index rule as the even one with reflected samples negated.
inline Trajectory extend_mirror_odd(const Trajectory& traj) { return detail::mirror_in_time(traj, -1.0); }

}  // namespace fident
