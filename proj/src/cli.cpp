#include "mnar/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mnar/config.hpp"
#include "mnar/data_io.hpp"
#include "mnar/errors.hpp"
#include "mnar/estimators.hpp"
#include "mnar/report.hpp"
#include "mnar/verify.hpp"

namespace mnar {

namespace {

namespace fs = std::filesystem;

struct SimulateArgs {
  std::optional<std::string> config_file;
  std::string out;
  bool emit_data = false;
  unsigned threads = 0;
  // flag name -> config key, in the order they are declared
  std::vector<std::pair<std::string, std::optional<std::string>>> overrides;
};

struct FitArgs {
  std::string input;
  std::string out;
  std::string family = "binom";
  std::optional<int> kappa;
  std::string mode = "censored";
  int grid_res = 50;
  double tol = 1e-6;
  long max_iter = 200000;
  std::optional<double> lambda_max;
};

struct VerifyArgs {
  std::string suite;
  VerifyOptions options;
};

bool write_file(const fs::path& path, const std::string& content, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot write " << path.string() << "\n";
    return false;
  }
  f << content;
  return static_cast<bool>(f);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

bool check_out_dir(const std::string& out, std::ostream& err) {
  std::error_code ec;
  if (!fs::is_directory(out, ec)) {
    err << "error: output directory '" << out << "' does not exist\n";
    return false;
  }
  return true;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  if (!check_out_dir(args.out, err)) return kExitUsage;

  KeyValues kv;
  try {
    if (args.config_file) {
      const auto text = read_file(*args.config_file);
      if (!text) {
        err << "error: cannot read config file '" << *args.config_file << "'\n";
        return kExitUsage;
      }
      kv = parse_key_values(*text);
    }
    for (const auto& [key, value] : args.overrides)
      if (value) kv[key] = *value;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<ExperimentConfig> configs;
  try {
    configs = resolve_experiments(kv);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::string name = "custom";
  if (auto it = kv.find("preset"); it != kv.end()) name = it->second;
  else if (auto id = kv.find("id"); id != kv.end()) name = id->second;

  const fs::path dir(args.out);
  RunManifest manifest;
  manifest.subcommand = "simulate";
  manifest.config = kv;
  manifest.seed = configs.front().seed;
  manifest.outputs = {(dir / (name + ".csv")).string(), (dir / (name + ".json")).string(),
                      (dir / (name + ".manifest.cfg")).string()};
  if (args.emit_data)
    for (const auto& c : configs) manifest.outputs.push_back((dir / (c.id + "_data.csv")).string());

  std::vector<ExperimentReport> reports;
  try {
    for (const auto& c : configs) reports.push_back(run_experiment(c, args.threads));
  } catch (const ExperimentError& e) {
    err << "experiment failed: " << e.what() << "\n";
    return kExitFailure;
  } catch (const Error& e) {
    err << "experiment failed: " << e.what() << "\n";
    return kExitFailure;
  }

  nlohmann::json doc;
  doc["manifest"] = manifest.to_json();
  doc["experiments"] = nlohmann::json::array();
  for (const auto& r : reports) doc["experiments"].push_back(report_to_json(r));

  bool ok = write_file(dir / (name + ".csv"), summary_csv(reports, manifest), err) &&
            write_file(dir / (name + ".json"), doc.dump(2) + "\n", err) &&
            write_file(dir / (name + ".manifest.cfg"),
                       "# rerun: mnar simulate --config <this file> --out " + args.out + "\n" +
                           format_key_values(kv),
                       err);
  if (ok && args.emit_data) {
    for (const auto& c : configs) {
      const auto strata = replication_strata(c, 0);
      ok = ok && write_file(dir / (c.id + "_data.csv"), write_strata_csv(c.model.kappa, strata), err);
    }
  }
  if (!ok) return kExitFailure;

  out << format_table(reports);
  return kExitOk;
}

struct Fitted {
  GmleSolution solution;
  EstimateReport report;
};

Fitted fit_observations(const ModelSpec& spec, const SupportGrid& grid,
                        const ObservationSet& censored, Mode mode, const EmOptions& options) {
  const auto obs = mode == Mode::Truncated ? to_truncated(censored) : censored;
  const auto L = build_likelihood_matrix(spec, grid, obs);
  auto sol = em_fit(L, obs.counts, options);
  auto report = make_estimate_report(spec, grid, sol.weights, censored);
  return {std::move(sol), std::move(report)};
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  if (!check_out_dir(args.out, err)) return kExitUsage;

  Family family{};
  Mode mode{};
  try {
    family = parse_family(args.family);
    mode = parse_mode(args.mode);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (family == Family::Geometric) {
    err << "error: fit does not support the geom family (no stratum CSV form)\n";
    return kExitUsage;
  }
  const auto text = read_file(args.input);
  if (!text) {
    err << "error: cannot read input '" << args.input << "'\n";
    return kExitUsage;
  }
  StrataData data;
  try {
    data = read_strata_csv(*text, family);
  } catch (const ConfigError& e) {
    err << args.input << ": " << e.what() << "\n";
    return kExitUsage;
  }

  ModelSpec spec;
  KeyValues kv{{"family", family_name(family)},
               {"mode", mode_name(mode)},
               {"grid_res", std::to_string(args.grid_res)},
               {"tol", format_number(args.tol)},
               {"max_iter", std::to_string(args.max_iter)}};
  SupportGrid grid;
  try {
    switch (family) {
      case Family::Binomial:
        if (args.kappa && *args.kappa != data.kappa_attempted) {
          err << "error: --kappa " << *args.kappa << " does not match kappa_attempted "
              << data.kappa_attempted << " in the input\n";
          return kExitUsage;
        }
        spec = ModelSpec::binomial(data.kappa_attempted);
        kv["kappa"] = std::to_string(data.kappa_attempted);
        break;
      case Family::Poisson: {
        int most = 1;
        for (const auto& o : data.outcomes)
          if (const auto* r = std::get_if<CountResponse>(&o)) most = std::max(most, r->responders);
        spec = ModelSpec::poisson(args.lambda_max.value_or(2.0 * most));
        kv["lambda_max"] = format_number(spec.lambda_max);
        break;
      }
      default:
        spec = ModelSpec::bernoulli();
        break;
    }
    grid = default_grid(spec, args.grid_res);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!(args.tol > 0.0) || args.max_iter < 0) {
    err << "error: --tol must be positive and --max-iter nonnegative\n";
    return kExitUsage;
  }

  const fs::path dir(args.out);
  RunManifest manifest;
  manifest.subcommand = "fit";
  manifest.config = kv;
  manifest.inputs = {args.input};
  manifest.outputs = {(dir / "fit.json").string(), (dir / "fit_weights.csv").string()};

  const auto censored = ObservationSet::from_outcomes(data.outcomes, Mode::Censored);
  std::optional<Fitted> fitted;
  try {
    fitted = fit_observations(spec, grid, censored, mode, EmOptions{args.tol, args.max_iter, false});
  } catch (const Error& e) {
    err << "fit failed: " << e.what() << "\n";
    return kExitFailure;
  }
  const GmleSolution& sol = fitted->solution;
  const EstimateReport& report = fitted->report;

  nlohmann::json doc;
  doc["manifest"] = manifest.to_json();
  doc["n_total"] = report.n_total;
  doc["n_responders"] = report.n_responders;
  doc["eta_hat"] = report.eta_hat;
  doc["naive"] = report.naive ? nlohmann::json(*report.naive) : nlohmann::json(nullptr);
  doc["loglik"] = sol.loglik;
  doc["certificate"] = sol.certificate;
  doc["iterations"] = sol.iterations;
  doc["converged"] = sol.converged;
  doc["grid"] = {{"provenance", grid.provenance}, {"size", grid.size()}};
  nlohmann::json atoms = nlohmann::json::array();
  std::ostringstream weights_csv;
  weights_csv << manifest.csv_comment() << "index";
  for (std::size_t j = 0; j < grid.points.front().coords.size(); ++j) weights_csv << ",theta_" << j + 1;
  weights_csv << ",weight\n";
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (sol.weights[k] <= 1e-6) continue;
    atoms.push_back({{"index", k}, {"theta", grid.points[k].coords}, {"weight", sol.weights[k]}});
    weights_csv << k;
    for (double c : grid.points[k].coords) weights_csv << ',' << format_number(c);
    weights_csv << ',' << format_number(sol.weights[k]) << '\n';
  }
  doc["atoms"] = std::move(atoms);

  if (!write_file(dir / "fit.json", doc.dump(2) + "\n", err) ||
      !write_file(dir / "fit_weights.csv", weights_csv.str(), err))
    return kExitFailure;

  out << "strata " << report.n_total << ", responders " << report.n_responders << "\n";
  out << "eta_hat (GMLE):";
  for (double v : report.eta_hat) out << ' ' << format_number(v);
  out << "\nnaive:";
  if (report.naive) {
    for (double v : *report.naive) out << ' ' << format_number(v);
  } else {
    out << " (no responders)";
  }
  out << "\nloglik " << format_number(sol.loglik) << ", certificate "
      << format_number(sol.certificate) << ", iterations " << sol.iterations
      << (sol.converged ? "" : " (max_iter reached)") << "\n";
  return kExitOk;
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> suites;
  if (args.suite == "all")
    suites = verify_suites();
  else
    suites = {args.suite};
  bool all_ok = true;
  for (const auto& name : suites) {
    SuiteResult result;
    try {
      result = run_verify_suite(name, args.options);
    } catch (const Error& e) {
      err << name << ": error: " << e.what() << "\n";
      all_ok = false;
      continue;
    }
    out << "suite " << name << "\n";
    for (const auto& c : result.checks) {
      const char* tag = c.informational ? "INFO" : (c.passed ? "PASS" : "FAIL");
      out << "  [" << tag << "] " << c.name << ": " << c.observed << "\n";
    }
    if (!result.passed()) {
      all_ok = false;
      for (const auto& c : result.checks)
        if (!c.informational && !c.passed)
          err << name << ": failing property '" << c.name << "' observed " << c.observed << "\n";
    }
  }
  return all_ok ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonparametric GMLE estimation under nonresponse", "mnar"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run table presets or a custom experiment");
  static const std::vector<std::pair<std::string, std::string>> sim_flags = {
      {"--preset", "preset"},     {"--id", "id"},
      {"--family", "family"},     {"--kappa", "kappa"},
      {"--population", "population"}, {"--delta", "delta"},
      {"--n-strata", "n_strata"}, {"--mode", "mode"},
      {"--grid-res", "grid_res"}, {"--tol", "tol"},
      {"--max-iter", "max_iter"}, {"--reps", "reps"},
      {"--seed", "seed"}};
  sim.overrides.reserve(sim_flags.size());
  for (const auto& [flag, key] : sim_flags) {
    sim.overrides.emplace_back(key, std::nullopt);
    simulate->add_option(flag, sim.overrides.back().second, "Override config key '" + key + "'");
  }
  simulate->add_option("--config", sim.config_file, "Flat key = value config file");
  simulate->add_option("--out", sim.out, "Output directory (must exist)")->required();
  simulate->add_flag("--emit-data", sim.emit_data,
                     "Also write replication 0's stratum data for each configuration");
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit stratum data from a CSV file");
  fit_cmd->add_option("--input", fit.input, "CSV: stratum_id,kappa_attempted,kappa_responded,x")
      ->required();
  fit_cmd->add_option("--out", fit.out, "Output directory (must exist)")->required();
  fit_cmd->add_option("--family", fit.family, "binom | poisson | bernoulli");
  fit_cmd->add_option("--kappa", fit.kappa, "Expected kappa_attempted (binom)");
  fit_cmd->add_option("--mode", fit.mode, "truncated | censored");
  fit_cmd->add_option("--grid-res", fit.grid_res, "Grid resolution per coordinate");
  fit_cmd->add_option("--tol", fit.tol, "EM certificate tolerance");
  fit_cmd->add_option("--max-iter", fit.max_iter, "EM iteration cap");
  fit_cmd->add_option("--lambda-max", fit.lambda_max, "Largest grid rate (poisson)");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run a property verification suite");
  verify->add_option("suite", ver.suite, "example1 | lemma1 | identity | consistency | all")
      ->required()
      ->check(CLI::IsMember({"example1", "lemma1", "identity", "consistency", "all"}));
  verify->add_option("--reps", ver.options.reps, "Replications (consistency suite)");
  verify->add_option("--grid-res", ver.options.grid_resolution, "Grid resolution (consistency suite)");
  verify->add_option("--threads", ver.options.threads, "Worker threads (0 = all cores)");
  verify->add_option("--seed", ver.options.seed, "Master seed (consistency suite)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (simulate->parsed()) return cmd_simulate(sim, out, err);
  if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
  if (ver.options.reps < 1 || ver.options.grid_resolution < 2) {
    err << "usage error: --reps must be >= 1 and --grid-res >= 2\n";
    return kExitUsage;
  }
  return cmd_verify(ver, out, err);
}

}  // namespace mnar
