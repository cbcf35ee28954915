#include "mnar/report.hpp"

#include <cstdio>
#include <sstream>

namespace mnar {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json RunManifest::to_json() const {
  json j;
  j["subcommand"] = subcommand;
  j["config"] = config;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["seed"] = seed;
  j["version"] = version;
  return j;
}

std::string RunManifest::csv_comment() const { return "# manifest: " + to_json().dump() + "\n"; }

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["id"] = c.id;
  j["family"] = family_name(c.model.family);
  j["kappa"] = c.model.kappa;
  j["population"] = c.population.describe();
  j["n_strata"] = c.population.n_strata;
  j["mode"] = mode_name(c.mode);
  j["grid_res"] = c.grid_resolution;
  j["tol"] = c.solver.tol;
  j["max_iter"] = c.solver.max_iter;
  j["reps"] = c.replications;
  j["seed"] = c.seed;
  j["rng"] = "mt19937_64 seeded per replication by splitmix64(seed, replication)";
  return j;
}

json report_to_json(const ExperimentReport& r) {
  json j;
  j["config"] = config_to_json(r.config);
  j["n_failed"] = r.n_failed;
  json summary = json::array();
  for (const auto& s : r.summary)
    summary.push_back({{"estimator", s.estimator},
                       {"mean", s.mean},
                       {"sd", s.sd},
                       {"n_reps", s.n_reps},
                       {"n_failed", s.n_failed}});
  j["summary"] = std::move(summary);
  json reps = json::array();
  for (std::size_t i = 0; i < r.replications.size(); ++i) {
    const auto& rep = r.replications[i];
    json x;
    x["replication"] = i;
    x["child_seed"] = child_seed(r.config.seed, i);
    x["ok"] = rep.ok;
    if (!rep.ok) {
      x["error"] = rep.error;
    } else {
      x["gmle"] = rep.gmle;
      x["naive"] = rep.naive ? json(*rep.naive) : json(nullptr);
      x["iterations"] = rep.iterations;
      x["converged"] = rep.converged;
      x["certificate"] = rep.certificate;
      x["n_responders"] = rep.n_responders;
      x["n_total"] = rep.n_total;
    }
    reps.push_back(std::move(x));
  }
  j["replications"] = std::move(reps);
  return j;
}

std::string summary_csv(const std::vector<ExperimentReport>& reports, const RunManifest& manifest) {
  std::ostringstream out;
  out << manifest.csv_comment();
  out << "config_id,estimator,mean,sd,n_reps,n_failed\n";
  for (const auto& r : reports)
    for (const auto& s : r.summary)
      out << r.config.id << ',' << s.estimator << ',' << format_number(s.mean) << ','
          << format_number(s.sd) << ',' << s.n_reps << ',' << s.n_failed << '\n';
  return out.str();
}

std::string format_table(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-18s %-18s\n", "config", "Naive", "GMLE");
  out << line;
  for (const auto& r : reports) {
    const int dim = r.config.model.eta_dim();
    for (int j = 0; j < dim; ++j) {
      const std::string suffix = dim == 1 ? "" : "[" + std::to_string(j) + "]";
      const auto& nv = r.estimator("naive" + suffix);
      const auto& gm = r.estimator("gmle" + suffix);
      char a[64], b[64];
      std::snprintf(a, sizeof a, "%.3f, (%.3f)", nv.mean, nv.sd);
      std::snprintf(b, sizeof b, "%.3f, (%.3f)", gm.mean, gm.sd);
      std::snprintf(line, sizeof line, "%-22s %-18s %-18s\n", (r.config.id + suffix).c_str(), a, b);
      out << line;
    }
    if (r.n_failed > 0) out << "  (" << r.n_failed << " failed replications excluded)\n";
  }
  return out.str();
}

}  // namespace mnar
