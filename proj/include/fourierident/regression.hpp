#pragma once

// Error-normalized least squares, Subspace Pursuit and group trimming on a stacked
// (real over imaginary) system.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "fourierident/dictionary.hpp"
#include "fourierident/fourier_system.hpp"

namespace fident {

inline constexpr double kScaleFloor = 1e-300;
inline constexpr double kRankTolerance = 1e-10;

/// Per-column noise sensitivities s(l) and the right-hand-side scale s(b).
struct ScaleSet {
  Eigen::VectorXd s;
  double s_b = 1.0;
  std::vector<int> floored;  // columns whose scale hit the floor
};

/// s(l) = beta_l * mean|column (alpha_l, beta_l - 1)| for beta_l > 1, mean|own column| otherwise;
/// s_b = mean|rhs|. Means run over the rows of `stacked`.
inline ScaleSet compute_scales(const StackedSystem& stacked, const Dictionary& dict) {
  if (stacked.rows() == 0) throw Error(ErrorKind::EmptySystem, "scales of an empty system");
  const double n = static_cast<double>(stacked.rows());
  const Eigen::VectorXd col_mean = stacked.A.cwiseAbs().colwise().sum().transpose() / n;
  ScaleSet out;
  out.s.resize(static_cast<Eigen::Index>(dict.size()));
  for (std::size_t l = 0; l < dict.size(); ++l) {
    const Feature f = dict[l];
    double s = col_mean(static_cast<Eigen::Index>(l));
    if (f.beta > 1) {
      if (const auto lower = dict.index_of({f.alpha, f.beta - 1})) s = f.beta * col_mean(*lower);
    }
    if (!(s > kScaleFloor)) {
      s = kScaleFloor;
      out.floored.push_back(static_cast<int>(l));
    }
    out.s(static_cast<Eigen::Index>(l)) = s;
  }
  out.s_b = std::max(stacked.y.cwiseAbs().mean(), kScaleFloor);
  return out;
}

/// Coefficients over the full dictionary, zero off the support.
struct CoefficientVector {
  Eigen::VectorXd values;
  std::vector<int> support;
  std::vector<int> dropped;  // support columns removed for rank deficiency
};

namespace detail {

/// Least squares via column-pivoted QR; columns beyond the numerical rank get zero.
inline Eigen::VectorXd pivoted_lstsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, std::vector<int>* dropped) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kRankTolerance);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(A.cols());
  const Eigen::Index rank = qr.rank();
  if (rank > 0) {
    const Eigen::VectorXd qty = qr.householderQ().transpose() * y;
    const Eigen::VectorXd z = qr.matrixR()
                                  .topLeftCorner(rank, rank)
                                  .template triangularView<Eigen::Upper>()
                                  .solve(qty.head(rank));
    for (Eigen::Index i = 0; i < rank; ++i) x(qr.colsPermutation().indices()(i)) = z(i);
  }
  if (dropped)
    for (Eigen::Index i = rank; i < A.cols(); ++i) dropped->push_back(qr.colsPermutation().indices()(i));
  return x;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& A, const std::vector<int>& cols) {
  Eigen::MatrixXd out(A.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = A.col(cols[j]);
  return out;
}

}  // namespace detail

/// Solve the column-rescaled system on the support, then undo the scaling: c_l = c~_l s_b / s(l).
inline CoefficientVector normalized_least_squares(const StackedSystem& stacked, const ScaleSet& scales,
                                                  const std::vector<int>& support) {
  if (support.empty()) throw Error(ErrorKind::Underdetermined, "empty support");
  if (stacked.rows() < static_cast<Eigen::Index>(support.size()))
    throw Error(ErrorKind::Underdetermined, std::to_string(stacked.rows()) + " rows for " +
                                                std::to_string(support.size()) + " unknowns");
  Eigen::MatrixXd A = detail::select_columns(stacked.A, support);
  for (std::size_t j = 0; j < support.size(); ++j) A.col(static_cast<Eigen::Index>(j)) /= scales.s(support[j]);
  const Eigen::VectorXd y = stacked.y / scales.s_b;

  std::vector<int> dropped_local;
  const Eigen::VectorXd scaled = detail::pivoted_lstsq(A, y, &dropped_local);

  CoefficientVector out;
  out.values = Eigen::VectorXd::Zero(stacked.A.cols());
  out.support = support;
  for (std::size_t j = 0; j < support.size(); ++j)
    out.values(support[j]) = scaled(static_cast<Eigen::Index>(j)) * scales.s_b / scales.s(support[j]);
  for (int j : dropped_local) out.dropped.push_back(support[static_cast<std::size_t>(j)]);
  std::sort(out.dropped.begin(), out.dropped.end());
  return out;
}

/// ||A c - y|| / ||y|| for coefficients over the full dictionary.
inline double relative_residual(const StackedSystem& stacked, const Eigen::VectorXd& c) {
  const double ny = stacked.y.norm();
  if (ny == 0.0) return std::numeric_limits<double>::infinity();
  return (stacked.A * c - stacked.y).norm() / ny;
}

struct SupportSet {
  std::vector<int> indices;  // ascending
  int sparsity_requested = 0;
  int trim_iterations = 0;
};

/// Each column scaled to unit l2 norm; zero columns stay zero.
inline Eigen::MatrixXd column_normalized(const Eigen::MatrixXd& A) {
  Eigen::MatrixXd out = A;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const double n = out.col(j).norm();
    if (n > 0.0) out.col(j) /= n;
  }
  return out;
}

namespace detail {

/// Indices of the k largest scores (ties to the lower index), ascending.
inline std::vector<int> top_k(const Eigen::VectorXd& score, int k, const std::vector<bool>& excluded = {}) {
  std::vector<int> order;
  for (Eigen::Index j = 0; j < score.size(); ++j)
    if (excluded.empty() || !excluded[static_cast<std::size_t>(j)]) order.push_back(static_cast<int>(j));
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score(a) > score(b); });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(k, 0))));
  std::sort(order.begin(), order.end());
  return order;
}

inline Eigen::VectorXd restricted_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const std::vector<int>& cols) {
  const Eigen::MatrixXd sub = select_columns(A, cols);
  return y - sub * pivoted_lstsq(sub, y, nullptr);
}

}  // namespace detail

inline constexpr int kSubspacePursuitMaxIterations = 50;

/// Subspace Pursuit (Dai & Milenkovic) for a k-sparse least-squares fit of y by columns of A.
/// Columns and rhs are normalized internally, so the result only depends on column directions.
inline SupportSet subspace_pursuit(const Eigen::MatrixXd& A_raw, const Eigen::VectorXd& y_raw, int k) {
  const auto L = static_cast<int>(A_raw.cols());
  if (k < 1 || k > L || k > A_raw.rows())
    throw Error(ErrorKind::InvalidSparsity, "sparsity " + std::to_string(k) + " invalid for a " +
                                                std::to_string(A_raw.rows()) + "x" + std::to_string(L) + " system");
  const Eigen::MatrixXd A = column_normalized(A_raw);
  const double ny = y_raw.norm();
  const Eigen::VectorXd y = ny > 0.0 ? Eigen::VectorXd(y_raw / ny) : y_raw;

  std::vector<int> support = detail::top_k((A.transpose() * y).cwiseAbs(), k);
  Eigen::VectorXd residual = detail::restricted_residual(A, y, support);
  double rnorm = residual.norm();

  for (int iter = 0; iter < kSubspacePursuitMaxIterations; ++iter) {
    std::vector<bool> in_support(static_cast<std::size_t>(L), false);
    for (int j : support) in_support[static_cast<std::size_t>(j)] = true;
    const std::vector<int> extra = detail::top_k((A.transpose() * residual).cwiseAbs(), k, in_support);

    std::vector<int> merged = support;
    merged.insert(merged.end(), extra.begin(), extra.end());
    std::sort(merged.begin(), merged.end());
    const Eigen::MatrixXd sub = detail::select_columns(A, merged);
    const Eigen::VectorXd x = detail::pivoted_lstsq(sub, y, nullptr);

    Eigen::VectorXd magnitude = Eigen::VectorXd::Zero(L);
    for (std::size_t j = 0; j < merged.size(); ++j) magnitude(merged[j]) = std::abs(x(static_cast<Eigen::Index>(j)));
    std::vector<bool> outside(static_cast<std::size_t>(L), true);
    for (int j : merged) outside[static_cast<std::size_t>(j)] = false;
    const std::vector<int> candidate = detail::top_k(magnitude, k, outside);

    const Eigen::VectorXd cand_residual = detail::restricted_residual(A, y, candidate);
    const double cand_norm = cand_residual.norm();
    if (!(cand_norm < rnorm)) break;
    const bool stagnating = rnorm - cand_norm < 1e-12;
    support = candidate;
    residual = cand_residual;
    rnorm = cand_norm;
    if (stagnating) break;
  }

  SupportSet out;
  out.indices = support;
  out.sparsity_requested = k;
  return out;
}

/// s_l = |c_l| * ||column l|| for each l in the support.
inline std::vector<double> contribution_scores(const CoefficientVector& coeffs, const StackedSystem& stacked,
                                               const std::vector<int>& support) {
  std::vector<double> scores;
  scores.reserve(support.size());
  for (int l : support) scores.push_back(std::abs(coeffs.values(l)) * stacked.A.col(l).norm());
  return scores;
}

inline std::vector<double> normalized_scores(const std::vector<double>& scores) {
  const double mx = scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores);
  if (mx > 0.0)
    for (double& s : out) s /= mx;
  return out;
}

/// Removes the largest low-score group whose cumulative share of the total stays below
/// `threshold`. The top-scoring feature is never removed.
inline std::vector<int> group_trim(const std::vector<int>& support, const std::vector<double>& scores, double threshold) {
  if (support.size() != scores.size()) throw Error(ErrorKind::InvalidParameter, "scores not aligned with support");
  const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  if (!(total > 0.0)) return support;
  std::vector<double> sorted(scores);
  std::sort(sorted.begin(), sorted.end());
  std::size_t k_max = 0;
  double cum = 0.0;
  for (std::size_t j = 0; j + 1 < sorted.size(); ++j) {
    cum += sorted[j];
    if (cum / total < threshold)
      k_max = j + 1;
    else
      break;
  }
  if (k_max == 0) return support;
  const double cut = sorted[k_max - 1];
  std::vector<int> kept;
  for (std::size_t j = 0; j < support.size(); ++j)
    if (scores[j] > cut) kept.push_back(support[j]);
  return kept;
}

/// One refit-and-trim step, for tracing.
struct TrimStep {
  std::vector<int> support;
  std::vector<double> scores;  // aligned with support, raw
  Eigen::VectorXd coefficients;
};

struct TrimResult {
  SupportSet support;
  std::vector<TrimStep> trace;
};

/// Alternate refit and group trimming until the support stops changing (at most k rounds).
inline TrimResult trim_to_convergence(const StackedSystem& stacked, const ScaleSet& scales, const SupportSet& initial,
                                      double threshold) {
  TrimResult out;
  std::vector<int> current = initial.indices;
  const int max_rounds = std::max(1, static_cast<int>(initial.indices.size()));
  int trims = 0;
  for (int round = 0; round < max_rounds && !current.empty(); ++round) {
    const CoefficientVector c = normalized_least_squares(stacked, scales, current);
    TrimStep step;
    step.support = current;
    step.scores = contribution_scores(c, stacked, current);
    step.coefficients = c.values;
    const std::vector<int> next = group_trim(current, step.scores, threshold);
    out.trace.push_back(std::move(step));
    if (next == current) break;
    current = next;
    ++trims;
  }
  out.support.indices = current;
  out.support.sparsity_requested = initial.sparsity_requested;
  out.support.trim_iterations = trims;
  return out;
}

}  // namespace fident
