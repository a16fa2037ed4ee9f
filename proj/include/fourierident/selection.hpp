#pragma once

// Sparsity selection by the core-region energy E1 + E2, choice of the fitting region and
// the final coefficients.

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fourierident/regions.hpp"
#include "fourierident/regression.hpp"

namespace fident {

inline constexpr double kInfiniteEnergy = std::numeric_limits<double>::infinity();

/// Sorted union of several ascending index lists.
inline std::vector<int> merge_sets(const std::vector<const std::vector<int>*>& sets) {
  std::vector<int> out;
  for (const auto* s : sets) out.insert(out.end(), s->begin(), s->end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Union over the support of the per-feature core regions (real and imaginary parts separately).
inline CoreRegion union_core(const std::vector<CoreRegion>& feature_cores, const std::vector<int>& support) {
  std::vector<const std::vector<int>*> re, im;
  for (int l : support) {
    re.push_back(&feature_cores[static_cast<std::size_t>(l)].real_set);
    im.push_back(&feature_cores[static_cast<std::size_t>(l)].imag_set);
  }
  CoreRegion u;
  u.real_set = merge_sets(re);
  u.imag_set = merge_sets(im);
  return u;
}

struct RegionFit {
  CoefficientVector coefficients;
  double residual = kInfiniteEnergy;  // relative, on the stacked region
};

/// Error-normalized fit of the support on one region, and its relative residual.
inline std::optional<RegionFit> fit_on_region(const SpectralBlock& block, const CoreRegion& region,
                                              const ScaleSet& scales, const std::vector<int>& support) {
  if (region.size() < support.size() || support.empty()) return std::nullopt;
  const StackedSystem stacked = stack_real_imag(block, region.real_set, region.imag_set);
  RegionFit fit;
  fit.coefficients = normalized_least_squares(stacked, scales, support);
  fit.residual = relative_residual(stacked, fit.coefficients.values);
  return fit;
}

struct EnergyBreakdown {
  int k = 0;
  SupportSet support;
  double e1 = kInfiniteEnergy;
  double e2 = kInfiniteEnergy;
  double total = kInfiniteEnergy;
  std::vector<std::string> diagnostics;
};

/// Relative residual of the support fitted on the union of its features' core regions.
inline double energy_e1(const SpectralBlock& block, const std::vector<CoreRegion>& feature_cores,
                        const ScaleSet& scales, const std::vector<int>& support) {
  if (support.empty()) return kInfiniteEnergy;
  const CoreRegion region = union_core(feature_cores, support);
  if (region.size() == 0) return kInfiniteEnergy;
  const auto fit = fit_on_region(block, region, scales, support);
  return fit ? fit->residual : kInfiniteEnergy;
}

/// Spread of the coefficient vectors fitted on each feature's core region, over ordered pairs,
/// normalized by |support|^2 and ||c_ut||.
inline double energy_e2(const std::vector<Eigen::VectorXd>& per_feature, const Eigen::VectorXd& c_ut) {
  const std::size_t n = per_feature.size();
  if (n <= 1) return 0.0;
  const double norm_ut = c_ut.norm();
  if (!(norm_ut > 0.0)) return kInfiniteEnergy;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += (per_feature[i] - per_feature[j]).norm();
  return sum / (static_cast<double>(n) * n) / norm_ut;
}

/// Everything the selection step needs, computed once per identification.
struct SelectionInputs {
  const SpectralBlock* block = nullptr;          // smoothed system on the meaningful region
  const std::vector<CoreRegion>* feature_cores = nullptr;
  const CoreRegion* ut_core = nullptr;
  const ScaleSet* scales = nullptr;
};

inline EnergyBreakdown evaluate_energy(const SelectionInputs& in, const SupportSet& support) {
  EnergyBreakdown e;
  e.k = support.sparsity_requested;
  e.support = support;
  if (support.indices.empty()) {
    e.diagnostics.push_back("empty support");
    return e;
  }
  e.e1 = energy_e1(*in.block, *in.feature_cores, *in.scales, support.indices);

  const auto ut_fit = fit_on_region(*in.block, *in.ut_core, *in.scales, support.indices);
  std::vector<Eigen::VectorXd> per_feature;
  bool complete = ut_fit.has_value();
  for (int l : support.indices) {
    const auto fit = fit_on_region(*in.block, (*in.feature_cores)[static_cast<std::size_t>(l)], *in.scales,
                                   support.indices);
    if (!fit) {
      e.diagnostics.push_back("core region of feature " + std::to_string(l) + " too small to fit");
      complete = false;
      break;
    }
    per_feature.push_back(fit->coefficients.values);
  }
  e.e2 = complete ? energy_e2(per_feature, ut_fit->coefficients.values) : kInfiniteEnergy;
  if (complete && e.e2 == kInfiniteEnergy) e.diagnostics.push_back("zero coefficients on the u_t core region");
  e.total = e.e1 + e.e2;
  return e;
}

/// Position in `per_k` of the smallest finite total; ties go to the earlier (smaller k) entry.
inline std::size_t select_sparsity(const std::vector<EnergyBreakdown>& per_k) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < per_k.size(); ++i) {
    if (!std::isfinite(per_k[i].total)) continue;
    if (!best || per_k[i].total < per_k[*best].total ||
        (per_k[i].total == per_k[*best].total && per_k[i].k < per_k[*best].k))
      best = i;
  }
  if (!best) throw Error(ErrorKind::IdentificationFailed, "no sparsity level has a finite energy");
  return *best;
}

struct RegionCandidate {
  int feature = -1;  // -1 is the u_t core region
  double residual = kInfiniteEnergy;
  Eigen::VectorXd coefficients;
  bool skipped = false;
};

struct RegionChoice {
  int feature = -1;
  std::vector<RegionCandidate> candidates;
};

/// Fits on the u_t core region and on each support feature's core region; the smallest
/// relative residual wins, ties to u_t and then to the lower feature index.
inline RegionChoice select_core_region(const SelectionInputs& in, const std::vector<int>& support) {
  RegionChoice choice;
  std::vector<int> order{-1};
  order.insert(order.end(), support.begin(), support.end());
  std::optional<std::size_t> best;
  for (int feature : order) {
    const CoreRegion& region = feature < 0 ? *in.ut_core : (*in.feature_cores)[static_cast<std::size_t>(feature)];
    RegionCandidate cand;
    cand.feature = feature;
    const auto fit = fit_on_region(*in.block, region, *in.scales, support);
    if (!fit || !std::isfinite(fit->residual)) {
      cand.skipped = true;
    } else {
      cand.residual = fit->residual;
      cand.coefficients = fit->coefficients.values;
    }
    choice.candidates.push_back(std::move(cand));
    const std::size_t idx = choice.candidates.size() - 1;
    if (!choice.candidates[idx].skipped && (!best || choice.candidates[idx].residual < choice.candidates[*best].residual))
      best = idx;
  }
  if (!best) throw Error(ErrorKind::IdentificationFailed, "every candidate core region is empty or too small");
  choice.feature = choice.candidates[*best].feature;
  return choice;
}

/// Coefficients fitted on the chosen region.
inline CoefficientVector finalize(const SelectionInputs& in, int chosen_feature, const std::vector<int>& support) {
  const CoreRegion& region =
      chosen_feature < 0 ? *in.ut_core : (*in.feature_cores)[static_cast<std::size_t>(chosen_feature)];
  const StackedSystem stacked = stack_real_imag(*in.block, region.real_set, region.imag_set);
  return normalized_least_squares(stacked, *in.scales, support);
}

}  // namespace fident
