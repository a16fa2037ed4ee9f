#pragma once

// Configuration files, result serialization and the noise-ensemble runner used by the CLI.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fourierident/identify.hpp"

namespace fident {

using json = nlohmann::ordered_json;

// ---- config -------------------------------------------------------------------

namespace detail {

inline std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline long parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error(ErrorKind::Parse, "config key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw Error(ErrorKind::Parse, "config key '" + key + "': expected a number, got '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::Parse, "config key '" + key + "': expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Applies one `key = value` setting. Keys mirror the RunConfig field names.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "max_alpha") c.max_alpha = static_cast<int>(parse_int(key, value));
  else if (key == "max_beta") c.max_beta = static_cast<int>(parse_int(key, value));
  else if (key == "trim_threshold") c.trim_threshold = parse_real(key, value);
  else if (key == "max_sparsity") c.max_sparsity = static_cast<int>(parse_int(key, value));
  else if (key == "bins") c.bins = static_cast<int>(parse_int(key, value));
  else if (key == "kernel_m_x") c.kernel_m_x = static_cast<int>(parse_int(key, value));
  else if (key == "kernel_m_t") c.kernel_m_t = static_cast<int>(parse_int(key, value));
  else if (key == "kernel_p_x") c.kernel_p_x = static_cast<int>(parse_int(key, value));
  else if (key == "kernel_p_t") c.kernel_p_t = static_cast<int>(parse_int(key, value));
  else if (key == "smoothing") c.smoothing = parse_bool(key, value);
  else if (key == "use_meaningful_region") c.use_meaningful_region = parse_bool(key, value);
  else if (key == "seed") {
    const long s = parse_int(key, value);
    if (s < 0) throw Error(ErrorKind::Parse, "config key 'seed' must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "extension") {
    if (value == "mirror") c.extension = Extension::Mirror;
    else if (value == "periodic") c.extension = Extension::Periodic;
    else throw Error(ErrorKind::Parse, "config key 'extension' must be 'mirror' or 'periodic', got '" + value + "'");
  } else {
    throw Error(ErrorKind::Parse, "unknown config key '" + key + "'");
  }
}

/// Flat `key = value` lines; '#' starts a comment.
inline RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Parse, "config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(c, detail::strip(line.substr(0, eq)), detail::strip(line.substr(eq + 1)));
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, std::string("config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Parse, "cannot open config file '" + path + "'");
  return parse_config(is);
}

// ---- truth files ----------------------------------------------------------------

inline json truth_to_json(const std::vector<Term>& terms) {
  json arr = json::array();
  for (const Term& t : terms) arr.push_back({{"alpha", t.alpha}, {"beta", t.beta}, {"c", t.c}});
  return {{"terms", arr}};
}

inline std::vector<Term> truth_from_json(const json& j) {
  try {
    const json& arr = j.is_array() ? j : j.at("terms");
    std::vector<Term> out;
    for (const auto& t : arr) out.push_back({t.at("alpha").get<int>(), t.at("beta").get<int>(), t.at("c").get<double>()});
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("truth file: ") + e.what());
  }
}

inline std::vector<Term> load_truth(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Parse, "cannot open truth file '" + path + "'");
  try {
    return truth_from_json(json::parse(is));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("truth file: ") + e.what());
  }
}

// ---- result JSON ------------------------------------------------------------------

namespace detail {

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json int_list(const std::vector<int>& v) { return json(v); }

}  // namespace detail

inline json result_to_json(const IdentificationResult& r, const std::vector<Term>* truth = nullptr) {
  const Dictionary& d = r.dictionary;
  json support = json::array();
  for (int l : r.coefficients.support) {
    const Feature f = d[static_cast<std::size_t>(l)];
    support.push_back({{"alpha", f.alpha},
                       {"beta", f.beta},
                       {"name", d.name(static_cast<std::size_t>(l))},
                       {"coefficient", r.coefficients.values(l)}});
  }
  json energies = json::array();
  for (const EnergyBreakdown& e : r.energies) {
    json names = json::array();
    for (int l : e.support.indices) names.push_back(d.name(static_cast<std::size_t>(l)));
    energies.push_back({{"k", e.k},
                        {"support", names},
                        {"e1", detail::finite_or_null(e.e1)},
                        {"e2", detail::finite_or_null(e.e2)},
                        {"total", detail::finite_or_null(e.total)}});
  }
  json traces = json::array();
  for (const SparsityTrace& t : r.traces) {
    json rounds = json::array();
    for (const TrimStep& s : t.trimmed.trace) {
      json names = json::array();
      for (int l : s.support) names.push_back(d.name(static_cast<std::size_t>(l)));
      rounds.push_back({{"support", names}, {"scores", normalized_scores(s.scores)}});
    }
    traces.push_back({{"k", t.k}, {"skipped", t.skipped}, {"initial", t.initial}, {"trim", rounds}});
  }
  json candidates = json::array();
  for (const RegionCandidate& c : r.region_choice.candidates)
    candidates.push_back({{"region", c.feature < 0 ? std::string("u_t") : d.name(static_cast<std::size_t>(c.feature))},
                          {"residual", detail::finite_or_null(c.residual)},
                          {"skipped", c.skipped}});

  json out;
  out["equation"] = format_equation(d, r.coefficients.values);
  out["support"] = support;
  out["chosen_region"] = r.chosen_region() < 0 ? std::string("u_t") : d.name(static_cast<std::size_t>(r.chosen_region()));
  out["k_star"] = r.k_star;
  out["energies"] = energies;
  out["region_candidates"] = candidates;
  out["meaningful_region"] = {{"a_x_star", r.region.a_x_star}, {"a_t_star", r.region.a_t_star}, {"modes", r.lambda.size()}};
  out["kernel"] = {{"m_x", r.kernel.kernel.m_x}, {"m_t", r.kernel.kernel.m_t}, {"p_x", r.kernel.kernel.p_x}, {"p_t", r.kernel.kernel.p_t}};
  out["traces"] = traces;
  out["diagnostics"] = r.diagnostics;
  if (truth) {
    const Metrics m = compute_metrics(r, *truth);
    out["metrics"] = {{"e2", m.e2}, {"e_res", m.e_res}, {"tpr", m.tpr}, {"ppv", m.ppv}};
  }
  return out;
}

/// Fixed formatting so that identical results give identical bytes.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

// ---- ensembles ---------------------------------------------------------------------

struct EnsembleRow {
  std::string equation;
  double nsr = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;  // identification ran to completion
  std::string error;
  Metrics metrics;
  int k_star = 0;
  std::string identified;
};

struct EnsembleOptions {
  RunConfig config;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// One clean simulation of the benchmark, then one identification per (nsr, seed) with noise
/// seeded by `seed`. Failures become rows with ok = false.
inline std::vector<EnsembleRow> run_ensemble(Equation eq, const std::vector<double>& nsr_list,
                                             const std::vector<std::uint64_t>& seeds, const EnsembleOptions& opt = {}) {
  if (seeds.empty()) throw Error(ErrorKind::InvalidParameter, "ensemble needs at least one seed");
  if (nsr_list.empty()) throw Error(ErrorKind::InvalidParameter, "ensemble needs at least one noise level");
  for (double n : nsr_list)
    if (!(n >= 0.0) || !std::isfinite(n)) throw Error(ErrorKind::InvalidParameter, "noise levels must be finite and >= 0");
  opt.config.validate();
  const Trajectory clean = simulate_benchmark(eq);
  const std::vector<Term> truth = true_terms(eq);

  std::vector<EnsembleRow> rows;
  for (double n : nsr_list)
    for (std::uint64_t s : seeds) rows.push_back({equation_tag(eq), n, s});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      EnsembleRow& row = rows[i];
      try {
        const Trajectory noisy = add_noise(clean, {row.nsr, row.seed});
        const IdentificationResult r = identify(noisy, opt.config);
        row.metrics = compute_metrics(r, truth);
        row.k_star = r.k_star;
        row.identified = format_equation(r.dictionary, r.coefficients.values);
        row.ok = true;
      } catch (const Error& e) {
        row.error = e.what();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(opt.threads ? opt.threads : std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(rows.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

/// Linear-interpolated quantile of sorted data.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

inline void write_ensemble_csv(const std::vector<EnsembleRow>& rows, std::ostream& os) {
  os << "equation,nsr,seed,status,e2,e_res,tpr,ppv,k_star,identified,error\n";
  os << std::setprecision(10);
  for (const EnsembleRow& r : rows) {
    os << r.equation << ',' << r.nsr << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',';
    if (r.ok)
      os << r.metrics.e2 << ',' << r.metrics.e_res << ',' << r.metrics.tpr << ',' << r.metrics.ppv << ',' << r.k_star;
    else
      os << ",,,,";
    os << ',' << detail::csv_quote(r.identified) << ',' << detail::csv_quote(r.error) << '\n';
  }
}

struct EnsembleSummary {
  std::string equation;
  double nsr = 0.0;
  int runs = 0;
  int failed = 0;
  int exact = 0;  // TPR = PPV = 1
  double e2_q1 = 0, e2_median = 0, e2_q3 = 0;
  double e_res_median = 0;
  double mean_tpr = 0, mean_ppv = 0;
};

/// Per noise level statistics. Failed runs count towards `runs` but not towards the quantiles.
inline std::vector<EnsembleSummary> summarize(const std::vector<EnsembleRow>& rows) {
  std::vector<double> levels;
  for (const auto& r : rows)
    if (std::find(levels.begin(), levels.end(), r.nsr) == levels.end()) levels.push_back(r.nsr);
  std::vector<EnsembleSummary> out;
  for (double n : levels) {
    EnsembleSummary s;
    std::vector<double> e2, eres;
    for (const auto& r : rows) {
      if (r.nsr != n) continue;
      s.equation = r.equation;
      ++s.runs;
      if (!r.ok) {
        ++s.failed;
        continue;
      }
      e2.push_back(r.metrics.e2);
      eres.push_back(r.metrics.e_res);
      s.mean_tpr += r.metrics.tpr;
      s.mean_ppv += r.metrics.ppv;
      s.exact += (r.metrics.tpr == 1.0 && r.metrics.ppv == 1.0);
    }
    s.nsr = n;
    std::sort(e2.begin(), e2.end());
    std::sort(eres.begin(), eres.end());
    s.e2_q1 = detail::quantile(e2, 0.25);
    s.e2_median = detail::quantile(e2, 0.5);
    s.e2_q3 = detail::quantile(e2, 0.75);
    s.e_res_median = detail::quantile(eres, 0.5);
    if (s.runs > 0) {
      s.mean_tpr /= s.runs;
      s.mean_ppv /= s.runs;
    }
    out.push_back(s);
  }
  return out;
}

inline void write_summary_csv(const std::vector<EnsembleSummary>& rows, std::ostream& os) {
  os << "equation,nsr,runs,failed,exact,e2_q1,e2_median,e2_q3,e_res_median,mean_tpr,mean_ppv\n";
  os << std::setprecision(10);
  for (const auto& s : rows)
    os << s.equation << ',' << s.nsr << ',' << s.runs << ',' << s.failed << ',' << s.exact << ',' << s.e2_q1 << ','
       << s.e2_median << ',' << s.e2_q3 << ',' << s.e_res_median << ',' << s.mean_tpr << ',' << s.mean_ppv << '\n';
}

}  // namespace fident
