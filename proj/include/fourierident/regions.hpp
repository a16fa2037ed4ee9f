#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fourierident/fourier_system.hpp"

namespace fident {

/// Two-piece log-log fit of an accumulated spectrum: power-law decay up to a*, flat beyond.
struct TransitionFit {
  int a_star = 0;
  std::vector<double> gamma;  // gamma[a] for every candidate a, NaN elsewhere
  double slope = 0.0;         // decay fit at a_star
  double intercept = 0.0;
  double tail_level = 0.0;    // mean of y over the flat part at a_star
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};

inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  LineFit f;
  const double den = n * sxx - sx * sx;
  f.slope = den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
  f.intercept = (sy - f.slope * sx) / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = f.slope * xs[i] + f.intercept - ys[i];
    f.residual += r * r;
  }
  return f;
}

inline constexpr double kLogFloor = 1e-300;

}  // namespace detail

/// y holds the accumulated response for xi = 0..M with M = floor(N/2). Returns the a in
/// {2..M-2} minimising the decay-fit residual over xi = 1..a plus the flat-fit residual over
/// xi = a+1..M. Ties go to the smaller a.
inline TransitionFit fit_transition_mode_detailed(std::span<const double> y) {
  if (y.size() < 6)
    throw Error(ErrorKind::TooFewModes, "transition fit needs at least 6 modes, got " + std::to_string(y.size()));
  const int M = static_cast<int>(y.size()) - 1;
  std::vector<double> lx(y.size()), ly(y.size());
  for (int xi = 0; xi <= M; ++xi) {
    lx[xi] = xi > 0 ? std::log(static_cast<double>(xi)) : 0.0;
    ly[xi] = std::log(std::max(y[xi], detail::kLogFloor));
  }

  TransitionFit out;
  out.gamma.assign(y.size(), std::nan(""));
  double best = std::numeric_limits<double>::infinity();
  for (int a = 2; a <= M - 2; ++a) {
    const auto head = detail::fit_line(std::span(lx).subspan(1, a), std::span(ly).subspan(1, a));
    double mean = 0.0;
    for (int xi = a + 1; xi <= M; ++xi) mean += std::max(y[xi], detail::kLogFloor);
    mean /= (M - a);
    const double log_mean = std::log(mean);
    double tail = 0.0;
    for (int xi = a + 1; xi <= M; ++xi) tail += (log_mean - ly[xi]) * (log_mean - ly[xi]);
    const double g = head.residual + tail;
    out.gamma[a] = g;
    if (g < best) {
      best = g;
      out.a_star = a;
      out.slope = head.slope;
      out.intercept = head.intercept;
      out.tail_level = mean;
    }
  }
  return out;
}

inline int fit_transition_mode(std::span<const double> y) { return fit_transition_mode_detailed(y).a_star; }

/// Low-frequency rectangle {xi_x < a_x*, xi_t < a_t*} of non-negative modes.
struct MeaningfulRegion {
  int a_x_star = 0;
  int a_t_star = 0;
  std::vector<int> indices;  // ascending mode indices
  TransitionFit fit_x;
  TransitionFit fit_t;
  std::vector<std::string> warnings;
};

inline std::vector<int> low_mode_rectangle(const FrequencyIndexMap& map, int a_x, int a_t) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(a_x) * a_t);
  for (int ix = 0; ix < a_x; ++ix)
    for (int it = 0; it < a_t; ++it) out.push_back(map.index(ix, it));
  return out;
}

inline MeaningfulRegion find_meaningful_region(const FourierSystem& sys) {
  MeaningfulRegion region;
  region.fit_x = fit_transition_mode_detailed(sys.profile_x);
  region.fit_t = fit_transition_mode_detailed(sys.profile_t);
  region.a_x_star = region.fit_x.a_star;
  region.a_t_star = region.fit_t.a_star;
  if (region.a_x_star < 1) {
    region.a_x_star = 2;
    region.warnings.push_back("degenerate transition mode in x; using a_x* = 2");
  }
  if (region.a_t_star < 1) {
    region.a_t_star = 2;
    region.warnings.push_back("degenerate transition mode in t; using a_t* = 2");
  }
  region.indices = low_mode_rectangle(sys.map, region.a_x_star, region.a_t_star);
  return region;
}

/// Histogram the values into `bins` equal-width bins, fit two chords to the cumulative counts
/// and return the left edge of the bin after the best split.
inline double compute_threshold(std::span<const double> values, int bins = 300) {
  if (values.empty()) throw Error(ErrorKind::InvalidParameter, "threshold of an empty set");
  if (bins < 4) throw Error(ErrorKind::InvalidParameter, "threshold needs at least 4 bins");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return lo;

  const double width = (hi - lo) / bins;
  std::vector<double> cum(static_cast<std::size_t>(bins) + 1, 0.0);  // 1-based
  for (double v : values) {
    int bin = static_cast<int>(std::floor((v - lo) / width));
    bin = std::clamp(bin, 0, bins - 1);
    cum[static_cast<std::size_t>(bin) + 1] += 1.0;
  }
  for (int k = 1; k <= bins; ++k) cum[k] += cum[k - 1];

  auto chord_residual = [&](int first, int last) {
    if (last <= first) return 0.0;
    const double slope = (cum[last] - cum[first]) / (last - first);
    double r = 0.0;
    for (int th = first + 1; th < last; ++th) {
      const double d = cum[first] + slope * (th - first) - cum[th];
      r += d * d;
    }
    return r;
  };

  int best_k = 2;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= bins - 2; ++k) {
    const double cost = chord_residual(1, k) + chord_residual(k + 1, bins);
    if (cost < best) {
      best = cost;
      best_k = k;
    }
  }
  return lo + best_k * width;
}

/// Index sets of high-response modes for one feature (or for u_t when feature < 0).
struct CoreRegion {
  std::vector<int> real_set;
  std::vector<int> imag_set;
  double threshold = 0.0;
  int feature = -1;
  bool fallback = false;

  std::size_t size() const { return real_set.size() + imag_set.size(); }
};

/// Threshold the smoothed responses of one column over the meaningful region. Magnitudes of
/// both parts are pooled; modes on the xi_x = 0 or xi_t = 0 axes are excluded from the
/// statistics but may still enter the core.
inline CoreRegion core_region(const Eigen::Ref<const Eigen::VectorXcd>& column, const std::vector<int>& modes,
                              const FrequencyIndexMap& map, int feature = -1, int bins = 300) {
  if (static_cast<std::size_t>(column.size()) != modes.size())
    throw Error(ErrorKind::InvalidParameter, "column and mode list differ in length");
  if (modes.empty()) throw Error(ErrorKind::EmptySystem, "core region of an empty meaningful region");

  std::vector<double> pooled;
  pooled.reserve(2 * modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto [ix, it] = map.mode(modes[i]);
    if (ix == 0 || it == 0) continue;
    pooled.push_back(std::abs(column(static_cast<Eigen::Index>(i)).real()));
    pooled.push_back(std::abs(column(static_cast<Eigen::Index>(i)).imag()));
  }
  if (pooled.empty())
    for (Eigen::Index i = 0; i < column.size(); ++i) {
      pooled.push_back(std::abs(column(i).real()));
      pooled.push_back(std::abs(column(i).imag()));
    }

  CoreRegion core;
  core.feature = feature;
  core.threshold = compute_threshold(pooled, bins);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const cplx v = column(static_cast<Eigen::Index>(i));
    if (std::abs(v.real()) >= core.threshold) core.real_set.push_back(modes[i]);
    if (std::abs(v.imag()) >= core.threshold) core.imag_set.push_back(modes[i]);
  }

  if (core.real_set.empty() && core.imag_set.empty()) {
    core.fallback = true;
    const std::size_t keep = std::max<std::size_t>(5, static_cast<std::size_t>(std::ceil(0.01 * modes.size())));
    auto top = [&](bool real) {
      std::vector<std::size_t> order(modes.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      auto mag = [&](std::size_t i) {
        const cplx v = column(static_cast<Eigen::Index>(i));
        return real ? std::abs(v.real()) : std::abs(v.imag());
      };
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag(a) > mag(b); });
      std::vector<int> out;
      for (std::size_t j = 0; j < std::min(keep, order.size()); ++j) out.push_back(modes[order[j]]);
      std::sort(out.begin(), out.end());
      return out;
    };
    core.real_set = top(true);
    core.imag_set = top(false);
  }
  return core;
}

}  // namespace fident
