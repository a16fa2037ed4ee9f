#pragma once

// End-to-end identification: build the Fourier system, smooth, restrict to the meaningful
// region, compute core regions, run SP + group trimming for every sparsity level, select
// k* by the core-region energy and refit on the best core region.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fourierident/regions.hpp"
#include "fourierident/regression.hpp"
#include "fourierident/selection.hpp"
#include "fourierident/simulate.hpp"

namespace fident {

struct RunConfig {
  int max_alpha = 6;
  int max_beta = 6;
  double trim_threshold = 0.08;
  int max_sparsity = 10;
  int bins = 300;
  Extension extension = Extension::Mirror;
  bool use_meaningful_region = true;
  // Kernel overrides; 0 keeps the automatic choice.
  int kernel_m_x = 0;
  int kernel_m_t = 0;
  int kernel_p_x = 0;
  int kernel_p_t = 0;
  bool smoothing = true;
  std::uint64_t seed = 0;  // recorded only; identification itself is deterministic

  void validate() const {
    if (max_alpha < 1 || max_beta < 1) throw Error(ErrorKind::InvalidParameter, "max_alpha and max_beta must be >= 1");
    if (!(trim_threshold >= 0.0 && trim_threshold < 1.0))
      throw Error(ErrorKind::InvalidParameter, "trim threshold must lie in [0, 1)");
    if (max_sparsity < 1) throw Error(ErrorKind::InvalidParameter, "max sparsity must be >= 1");
    if (bins < 4) throw Error(ErrorKind::InvalidParameter, "bin count must be >= 4");
    if (kernel_m_x < 0 || kernel_m_t < 0 || kernel_p_x < 0 || kernel_p_t < 0)
      throw Error(ErrorKind::InvalidParameter, "kernel overrides must be non-negative");
  }
};

/// Candidate support of one sparsity level: SP output and its trimming trace.
struct SparsityTrace {
  int k = 0;
  std::vector<int> initial;
  TrimResult trimmed;
  bool skipped = false;
  std::string note;
};

struct IdentificationResult {
  Dictionary dictionary;
  Grid data_grid;
  MeaningfulRegion region;
  KernelChoice kernel;
  std::vector<int> lambda;  // modes used for everything downstream
  CoreRegion ut_core;
  std::vector<CoreRegion> feature_cores;
  ScaleSet scales;
  std::vector<SparsityTrace> traces;
  std::vector<EnergyBreakdown> energies;  // one per evaluated k, ascending k
  int k_star = 0;
  SupportSet support;
  RegionChoice region_choice;
  CoefficientVector coefficients;
  SpectralBlock raw_lambda;  // unsmoothed F, b on lambda, for the residual metric
  std::vector<std::string> diagnostics;

  int chosen_region() const { return region_choice.feature; }
};

inline std::string stage_error(const std::string& stage, const Error& e) { return stage + ": " + e.what(); }

inline IdentificationResult identify(const Trajectory& traj, const RunConfig& config = {}) {
  config.validate();
  IdentificationResult res;
  res.dictionary = build_dictionary(config.max_alpha, config.max_beta);
  res.data_grid = traj.grid();
  const auto rethrow = [](const std::string& stage, const Error& e) { throw Error(e.kind(), stage_error(stage, e)); };

  FourierSystem sys;
  try {
    sys = build_system(traj, res.dictionary, {config.extension, RowSelection::LowQuadrant});
  } catch (const Error& e) {
    rethrow("build system", e);
  }

  try {
    res.region = find_meaningful_region(sys);
  } catch (const Error& e) {
    rethrow("meaningful region", e);
  }
  for (const auto& w : res.region.warnings) res.diagnostics.push_back(w);
  res.lambda = config.use_meaningful_region ? res.region.indices : sys.modes;

  try {
    if (!config.smoothing) {
      res.kernel.kernel = identity_kernel(sys.map.n_x, sys.map.n_t);
    } else if (config.kernel_m_x > 0 || config.kernel_m_t > 0 || config.kernel_p_x > 0 || config.kernel_p_t > 0) {
      const KernelChoice automatic = choose_kernel(sys, res.region.a_x_star, res.region.a_t_star);
      const SmoothingKernel& a = automatic.kernel;
      res.kernel.kernel = make_kernel(config.kernel_m_x > 0 ? config.kernel_m_x : a.m_x,
                                      config.kernel_m_t > 0 ? config.kernel_m_t : a.m_t,
                                      config.kernel_p_x > 0 ? config.kernel_p_x : a.p_x,
                                      config.kernel_p_t > 0 ? config.kernel_p_t : a.p_t, sys.map.n_x, sys.map.n_t);
    } else {
      res.kernel = choose_kernel(sys, res.region.a_x_star, res.region.a_t_star);
      if (res.kernel.fallback_x) res.diagnostics.push_back("kernel half-width in x fell back to N_x/20");
      if (res.kernel.fallback_t) res.diagnostics.push_back("kernel half-width in t fell back to N_t/20");
    }
  } catch (const Error& e) {
    rethrow("kernel", e);
  }

  const SpectralBlock block = smooth(sys, res.kernel.kernel, res.lambda);
  res.raw_lambda = restrict_rows(sys, res.lambda);

  StackedSystem ut_system;
  try {
    res.ut_core = core_region(block.b, res.lambda, sys.map, -1, config.bins);
    if (res.ut_core.fallback) res.diagnostics.push_back("u_t core region empty; kept top responses");
    res.feature_cores.reserve(res.dictionary.size());
    for (std::size_t l = 0; l < res.dictionary.size(); ++l) {
      res.feature_cores.push_back(
          core_region(block.F.col(static_cast<Eigen::Index>(l)), res.lambda, sys.map, static_cast<int>(l), config.bins));
      if (res.feature_cores.back().fallback)
        res.diagnostics.push_back("core region of " + res.dictionary.name(l) + " empty; kept top responses");
    }
    ut_system = stack_real_imag(block, res.ut_core.real_set, res.ut_core.imag_set);
    res.scales = compute_scales(ut_system, res.dictionary);
    for (int l : res.scales.floored) res.diagnostics.push_back("scale of " + res.dictionary.name(l) + " floored");
  } catch (const Error& e) {
    rethrow("core regions", e);
  }

  // Per-k SP and trimming on the u_t core region.
  const int k_limit = std::min<int>(config.max_sparsity, static_cast<int>(res.dictionary.size()));
  for (int k = 1; k <= k_limit; ++k) {
    SparsityTrace tr;
    tr.k = k;
    if (k > ut_system.rows()) {
      tr.skipped = true;
      tr.note = "fewer core-region rows than k";
      res.traces.push_back(std::move(tr));
      continue;
    }
    const SupportSet sp = subspace_pursuit(ut_system.A, ut_system.y, k);
    tr.initial = sp.indices;
    tr.trimmed = trim_to_convergence(ut_system, res.scales, sp, config.trim_threshold);
    if (tr.trimmed.support.indices.empty()) {
      tr.skipped = true;
      tr.note = "support trimmed to empty";
    }
    res.traces.push_back(std::move(tr));
  }

  // Energies; identical trimmed supports are evaluated once.
  const SelectionInputs in{&block, &res.feature_cores, &res.ut_core, &res.scales};
  std::map<std::vector<int>, EnergyBreakdown> cache;
  for (const SparsityTrace& tr : res.traces) {
    if (tr.skipped) continue;
    const auto& idx = tr.trimmed.support.indices;
    auto it = cache.find(idx);
    if (it == cache.end()) it = cache.emplace(idx, evaluate_energy(in, tr.trimmed.support)).first;
    EnergyBreakdown e = it->second;
    e.k = tr.k;
    e.support = tr.trimmed.support;
    res.energies.push_back(std::move(e));
  }
  if (res.energies.empty()) throw Error(ErrorKind::IdentificationFailed, "selection: no sparsity level produced a support");

  try {
    const std::size_t best = select_sparsity(res.energies);
    res.k_star = res.energies[best].k;
    res.support = res.energies[best].support;
    res.region_choice = select_core_region(in, res.support.indices);
    res.coefficients = finalize(in, res.region_choice.feature, res.support.indices);
  } catch (const Error& e) {
    rethrow("selection", e);
  }
  for (int l : res.coefficients.dropped)
    res.diagnostics.push_back("rank-deficient column " + res.dictionary.name(l) + " dropped in the final fit");
  return res;
}

// ---- metrics ----------------------------------------------------------------

struct Metrics {
  double e2 = 0.0;
  double e_res = 0.0;
  double tpr = 0.0;
  double ppv = 0.0;
};

/// Coefficient vector over the dictionary from (alpha, beta, c) triples.
inline Eigen::VectorXd truth_vector(const Dictionary& dict, const std::vector<Term>& terms) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dict.size()));
  for (const Term& t : terms) {
    const auto l = dict.index_of({t.alpha, t.beta});
    if (!l)
      throw Error(ErrorKind::InvalidParameter,
                  "true term " + feature_name({t.alpha, t.beta}) + " is not in the dictionary");
    c(*l) += t.c;
  }
  return c;
}

/// e2 = ||c_pred - c_true|| / ||c_true||, e_res = ||F c_pred - b|| / ||b|| on the given rows,
/// TPR and PPV over the nonzero patterns.
inline Metrics compute_metrics(const Eigen::VectorXd& c_pred, const Eigen::VectorXd& c_true, const SpectralBlock& rows) {
  if (c_pred.size() != c_true.size()) throw Error(ErrorKind::ShapeMismatch, "coefficient vectors differ in length");
  const double nt = c_true.norm();
  if (!(nt > 0.0)) throw Error(ErrorKind::UndefinedTruth, "true coefficient vector is zero");
  Metrics m;
  m.e2 = (c_pred - c_true).norm() / nt;
  if (rows.F.rows() > 0 && rows.F.cols() == c_pred.size()) {
    const double nb = rows.b.norm();
    m.e_res = nb > 0.0 ? (rows.F * c_pred.cast<cplx>() - rows.b).norm() / nb : 0.0;
  }
  int hit = 0, n_true = 0, n_pred = 0;
  for (Eigen::Index l = 0; l < c_true.size(); ++l) {
    const bool t = c_true(l) != 0.0;
    const bool p = c_pred(l) != 0.0;
    n_true += t;
    n_pred += p;
    hit += t && p;
  }
  m.tpr = static_cast<double>(hit) / n_true;
  m.ppv = n_pred > 0 ? static_cast<double>(hit) / n_pred : 0.0;
  return m;
}

inline Metrics compute_metrics(const IdentificationResult& res, const std::vector<Term>& truth) {
  return compute_metrics(res.coefficients.values, truth_vector(res.dictionary, truth), res.raw_lambda);
}

/// Support of the true terms as ascending dictionary indices.
inline std::vector<int> truth_support(const Dictionary& dict, const std::vector<Term>& terms) {
  std::vector<int> out;
  for (const Term& t : terms) {
    const auto l = dict.index_of({t.alpha, t.beta});
    if (l && t.c != 0.0) out.push_back(*l);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// "u_t = -1 u_xxx - 0.5 (u^2)_x"
inline std::string format_equation(const Dictionary& dict, const Eigen::VectorXd& c, int precision = 4) {
  std::string s = "u_t =";
  bool any = false;
  for (Eigen::Index l = 0; l < c.size(); ++l) {
    if (c(l) == 0.0) continue;
    char buf[64];
    std::snprintf(buf, sizeof buf, " %c %.*g %s", c(l) < 0 ? '-' : '+', precision, std::abs(c(l)),
                  dict.name(static_cast<std::size_t>(l)).c_str());
    s += buf;
    any = true;
  }
  if (!any) s += " 0";
  return s;
}

}  // namespace fident
