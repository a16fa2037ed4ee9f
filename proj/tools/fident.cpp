// fident: simulate benchmark data, identify equations, run noise ensembles and dump plot data.
//
// Exit codes: 0 success, 2 command-line / config / input errors, 3 identification failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fourierident/report.hpp"
#include "fourierident/trajectory_io.hpp"

using namespace fident;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIdentify = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open '" + path + "' for writing");
  os << text;
}

std::vector<double> parse_nsr_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad noise level '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty noise list");
  return out;
}

std::vector<std::uint64_t> seed_range(int n) {
  if (n < 1) throw UsageError("--seeds must be at least 1");
  std::vector<std::uint64_t> s;
  for (int i = 1; i <= n; ++i) s.push_back(static_cast<std::uint64_t>(i));
  return s;
}

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

// Errors that mean "the input was wrong" rather than "identification did not work out".
bool is_usage_kind(ErrorKind k) {
  return k == ErrorKind::Parse || k == ErrorKind::InvalidParameter || k == ErrorKind::ShapeMismatch ||
         k == ErrorKind::InvalidData || k == ErrorKind::UndefinedTruth;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain PDE identification"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a benchmark equation and add noise");
  std::string sim_eq, sim_out, sim_truth;
  double sim_nsr = 0.0;
  std::uint64_t sim_seed = 0;
  int sim_modes = 0;
  double sim_amplitude = 0.0;
  sim->add_option("--eq", sim_eq, "heat|transport|burgers|kdv|ks")->required();
  sim->add_option("--nsr", sim_nsr, "noise-to-signal ratio")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", sim_seed, "noise seed");
  sim->add_option("--modes", sim_modes, "multi-mode initial condition with R modes");
  sim->add_option("--amplitude", sim_amplitude, "initial condition amplitude (default per equation)");
  sim->add_option("--out", sim_out, "trajectory file (.csv or .bin)")->required();
  sim->add_option("--truth-out", sim_truth, "truth JSON (default: <out>.truth.json)");

  // identify
  auto* idf = app.add_subcommand("identify", "Identify the equation behind a trajectory");
  std::string id_in, id_truth, id_config, id_out;
  idf->add_option("--in", id_in, "trajectory file")->required();
  idf->add_option("--truth", id_truth, "truth JSON; enables metrics");
  idf->add_option("--config", id_config, "flat key = value config");
  idf->add_option("--out", id_out, "result JSON (default stdout)");

  // ensemble
  auto* ens = app.add_subcommand("ensemble", "Noise ensemble over seeds 1..n");
  std::string ens_eq, ens_nsr, ens_out, ens_summary, ens_config;
  int ens_seeds = 0;
  unsigned ens_threads = 0;
  ens->add_option("--eq", ens_eq, "heat|transport|burgers|kdv|ks")->required();
  ens->add_option("--nsr", ens_nsr, "comma-separated noise levels")->required();
  ens->add_option("--seeds", ens_seeds, "number of noise seeds")->required();
  ens->add_option("--out", ens_out, "per-run CSV")->required();
  ens->add_option("--summary", ens_summary, "per-noise-level summary CSV (default stdout)");
  ens->add_option("--config", ens_config, "flat key = value config");
  ens->add_option("--threads", ens_threads, "worker threads (default: all cores)");

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "CSV series for the decay, energy and box-plot figures");
  std::string pd_which, pd_in, pd_config, pd_out, pd_eq, pd_nsr = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
  int pd_seeds = 20;
  plot->add_option("--which", pd_which, "decay|energy|boxplot")
      ->required()
      ->check(CLI::IsMember({"decay", "energy", "boxplot"}));
  plot->add_option("--in", pd_in, "trajectory file (decay, energy)");
  plot->add_option("--config", pd_config, "flat key = value config");
  plot->add_option("--eq", pd_eq, "equation (boxplot)");
  plot->add_option("--nsr", pd_nsr, "noise levels (boxplot)");
  plot->add_option("--seeds", pd_seeds, "seeds per level (boxplot)");
  plot->add_option("--out", pd_out, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sim) {
      PdeSpec spec = benchmark_spec(parse_equation(sim_eq));
      if (sim_modes > 0) {
        spec.ic.kind = InitialKind::MultiMode;
        spec.ic.modes = sim_modes;
      } else if (sim->count("--modes")) {
        throw UsageError("--modes must be at least 1");
      }
      if (sim->count("--amplitude")) spec.ic.amplitude = sim_amplitude;
      const Trajectory clean = simulate(spec);
      const Trajectory noisy = add_noise(clean, {sim_nsr, sim_seed});
      save_trajectory(noisy, sim_out);
      write_text(sim_truth.empty() ? sim_out + ".truth.json" : sim_truth,
                 dump_json(truth_to_json(spec.coefficients)));
      return 0;
    }

    if (*idf) {
      const RunConfig cfg = config_or_default(id_config);
      const Trajectory traj = load_trajectory(id_in);
      std::optional<std::vector<Term>> truth;
      if (!id_truth.empty()) truth = load_truth(id_truth);
      IdentificationResult r;
      try {
        r = identify(traj, cfg);
      } catch (const Error& e) {
        if (is_usage_kind(e.kind())) throw;
        std::cerr << "identification failed: " << e.what() << "\n";
        return kExitIdentify;
      }
      write_text(id_out, dump_json(result_to_json(r, truth ? &*truth : nullptr)));
      return 0;
    }

    if (*ens) {
      EnsembleOptions opt;
      opt.config = config_or_default(ens_config);
      opt.threads = ens_threads;
      const auto rows = run_ensemble(parse_equation(ens_eq), parse_nsr_list(ens_nsr), seed_range(ens_seeds), opt);
      std::ostringstream csv, summary;
      write_ensemble_csv(rows, csv);
      write_summary_csv(summarize(rows), summary);
      write_text(ens_out, csv.str());
      write_text(ens_summary, summary.str());
      return 0;
    }

    if (*plot) {
      const RunConfig cfg = config_or_default(pd_config);
      std::ostringstream os;
      os << std::setprecision(10);
      if (pd_which == "boxplot") {
        if (pd_eq.empty()) throw UsageError("plotdata --which boxplot needs --eq");
        EnsembleOptions opt;
        opt.config = cfg;
        const auto rows = run_ensemble(parse_equation(pd_eq), parse_nsr_list(pd_nsr), seed_range(pd_seeds), opt);
        os << "equation,nsr,seed,e2,e_res\n";
        for (const auto& r : rows)
          if (r.ok) os << r.equation << ',' << r.nsr << ',' << r.seed << ',' << r.metrics.e2 << ',' << r.metrics.e_res << '\n';
      } else {
        if (pd_in.empty()) throw UsageError("plotdata --which " + pd_which + " needs --in");
        const Trajectory traj = load_trajectory(pd_in);
        if (pd_which == "decay") {
          const FourierSystem sys = build_system(traj, build_dictionary(cfg.max_alpha, cfg.max_beta),
                                                 {cfg.extension, RowSelection::LowQuadrant});
          const MeaningfulRegion region = find_meaningful_region(sys);
          os << "axis,xi,accumulated,gamma,a_star\n";
          auto emit = [&](const char* axis, const std::vector<double>& y, const TransitionFit& fit) {
            for (std::size_t xi = 0; xi < y.size(); ++xi) {
              os << axis << ',' << xi << ',' << y[xi] << ',';
              if (std::isfinite(fit.gamma[xi])) os << fit.gamma[xi];
              os << ',' << fit.a_star << '\n';
            }
          };
          emit("x", sys.profile_x, region.fit_x);
          emit("t", sys.profile_t, region.fit_t);
        } else {
          const IdentificationResult r = identify(traj, cfg);
          os << "k,support,e1,e2,total,selected\n";
          for (const auto& e : r.energies) {
            std::string names;
            for (int l : e.support.indices) names += (names.empty() ? "" : " ") + r.dictionary.name(static_cast<std::size_t>(l));
            os << e.k << ",\"" << names << "\"," << e.e1 << ',' << e.e2 << ',' << e.total << ','
               << (e.k == r.k_star ? 1 : 0) << '\n';
          }
        }
      }
      write_text(pd_out, os.str());
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_kind(e.kind()) ? kExitUsage : kExitIdentify;
  }
  return 0;
}
