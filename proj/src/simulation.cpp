#include "mnar/simulation.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "mnar/errors.hpp"
#include "mnar/estimators.hpp"

namespace mnar {

namespace {

bool valid_range(const std::pair<double, double>& r) {
  return r.first > 0.0 && r.second < 1.0 && r.first <= r.second;
}

void summarize(const std::vector<double>& values, int n_failed, const std::string& name,
               std::vector<EstimatorSummary>& out) {
  EstimatorSummary s;
  s.estimator = name;
  s.n_reps = static_cast<int>(values.size());
  s.n_failed = n_failed;
  if (!values.empty()) {
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
  }
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  out.push_back(std::move(s));
}

ReplicationResult run_replication(const ExperimentConfig& config, const SupportGrid& grid, int r) {
  ReplicationResult res;
  try {
    const auto strata = replication_strata(config, r);
    const auto censored = ObservationSet::from_outcomes(strata, Mode::Censored);
    const auto obs = config.mode == Mode::Truncated ? to_truncated(censored) : censored;
    const auto L = build_likelihood_matrix(config.model, grid, obs);
    const auto sol = em_fit(L, obs.counts, config.solver);
    const auto report = make_estimate_report(config.model, grid, sol.weights, censored);
    res.gmle = report.eta_hat;
    res.naive = report.naive;
    res.n_responders = report.n_responders;
    res.n_total = report.n_total;
    res.iterations = sol.iterations;
    res.converged = sol.converged;
    res.certificate = sol.certificate;
    res.ok = true;
  } catch (const Error& e) {
    res.ok = false;
    res.error = e.what();
  }
  return res;
}

}  // namespace

void PopulationSpec::validate() const {
  if (n_strata < 1) throw ConfigError("n_strata", "must be >= 1");
  if (const auto* t = std::get_if<TwoTypePopulation>(&kind)) {
    if (!(t->delta >= 0.0 && t->delta < 0.5)) throw ConfigError("delta", "must lie in [0, 0.5)");
    if (n_strata % 2 != 0) throw ConfigError("n_strata", "two_type needs an even stratum count");
  } else if (const auto* u = std::get_if<UniformMixPopulation>(&kind)) {
    if (!valid_range(u->range_a)) throw ConfigError("range_a", "must be an interval inside (0,1)");
    if (!valid_range(u->range_b)) throw ConfigError("range_b", "must be an interval inside (0,1)");
    if (n_strata % 2 != 0) throw ConfigError("n_strata", "uniform_mix needs an even stratum count");
  } else {
    const auto& e = std::get<ExplicitPopulation>(kind);
    if (static_cast<int>(e.points.size()) != n_strata)
      throw ConfigError("n_strata", "must equal the number of explicit points");
  }
}

std::string PopulationSpec::describe() const {
  std::ostringstream out;
  if (const auto* t = std::get_if<TwoTypePopulation>(&kind)) {
    out << "two_type(delta=" << t->delta << ")";
  } else if (const auto* u = std::get_if<UniformMixPopulation>(&kind)) {
    out << "uniform_mix(" << u->range_a.first << "," << u->range_a.second << ";"
        << u->range_b.first << "," << u->range_b.second << ")";
  } else {
    out << "explicit";
  }
  out << "x" << n_strata;
  return out.str();
}

std::vector<ThetaPoint> gen_population(const PopulationSpec& pspec, Rng& rng) {
  pspec.validate();
  const int n = pspec.n_strata;
  std::vector<ThetaPoint> pop;
  pop.reserve(static_cast<std::size_t>(n));
  if (const auto* t = std::get_if<TwoTypePopulation>(&pspec.kind)) {
    const double lo = 0.5 - t->delta, hi = 0.5 + t->delta;
    for (int i = 0; i < n; ++i) {
      const double v = i < n / 2 ? lo : hi;
      pop.push_back({{v, v}});
    }
  } else if (const auto* u = std::get_if<UniformMixPopulation>(&pspec.kind)) {
    for (int i = 0; i < n; ++i) {
      const auto& range = i < n / 2 ? u->range_a : u->range_b;
      const double pi = rng.uniform(range.first, range.second);
      const double p = rng.uniform(range.first, range.second);
      pop.push_back({{pi, p}});
    }
  } else {
    pop = std::get<ExplicitPopulation>(pspec.kind).points;
  }
  return pop;
}

std::vector<Outcome> draw_strata(const ModelSpec& spec, const std::vector<ThetaPoint>& population,
                                 Rng& rng) {
  spec.validate();
  std::vector<Outcome> out;
  out.reserve(population.size());
  for (const auto& theta : population) {
    validate_theta(spec, theta);
    const auto& c = theta.coords;
    switch (spec.family) {
      case Family::Binomial: {
        const int responders = rng.binomial(spec.kappa, c[0]);
        if (responders == 0)
          out.emplace_back(Nonresponse{});
        else
          out.emplace_back(CountResponse{rng.binomial(responders, c[1]), responders});
        break;
      }
      case Family::Poisson: {
        const int responders = rng.poisson(c[0]);
        if (responders == 0)
          out.emplace_back(Nonresponse{});
        else
          out.emplace_back(CountResponse{rng.binomial(responders, c[1]), responders});
        break;
      }
      case Family::Geometric: {
        Outcome o = Nonresponse{};
        for (int k = 1; k <= spec.max_attempts; ++k) {
          if (rng.bernoulli(c[0])) {
            const int s = rng.categorical(std::span<const double>(c).subspan(1)) + 1;
            o = CategoryResponse{s, k};
            break;
          }
        }
        out.push_back(o);
        break;
      }
      case Family::Bernoulli:
        out.emplace_back(BinaryResponse{rng.bernoulli(c[0]) ? 1 : 0});
        break;
    }
  }
  return out;
}

ObservationSet draw_observations(const ModelSpec& spec,
                                 const std::vector<ThetaPoint>& population, Rng& rng) {
  const auto strata = draw_strata(spec, population, rng);
  return ObservationSet::from_outcomes(strata, Mode::Censored);
}

ObservationSet to_truncated(const ObservationSet& obs) {
  ObservationSet out;
  out.mode = Mode::Truncated;
  for (std::size_t d = 0; d < obs.distinct.size(); ++d) {
    if (!is_response(obs.distinct[d])) continue;
    out.distinct.push_back(obs.distinct[d]);
    out.counts.push_back(obs.counts[d]);
  }
  if (out.distinct.empty()) throw DegenerateData("no responders: truncated data set is empty");
  return out;
}

void ExperimentConfig::validate() const {
  try {
    model.validate();
  } catch (const DomainError& e) {
    throw ConfigError("family", e.what());
  }
  population.validate();
  if (grid_resolution < 2) throw ConfigError("grid_res", "must be >= 2");
  if (!(solver.tol > 0.0)) throw ConfigError("tol", "must be positive");
  if (solver.max_iter < 0) throw ConfigError("max_iter", "must be >= 0");
  if (replications < 1) throw ConfigError("reps", "must be >= 1");
  if (!std::holds_alternative<ExplicitPopulation>(population.kind) &&
      model.family != Family::Binomial)
    throw ConfigError("population", "two_type and uniform_mix populations need the binom family");
}

const EstimatorSummary& ExperimentReport::estimator(const std::string& name) const {
  for (const auto& s : summary)
    if (s.estimator == name) return s;
  throw ContractViolation("no estimator named '" + name + "' in report");
}

std::vector<Outcome> replication_strata(const ExperimentConfig& config, int r) {
  Rng rng(child_seed(config.seed, static_cast<std::uint64_t>(r)));
  const auto population = gen_population(config.population, rng);
  return draw_strata(config.model, population, rng);
}

ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  const SupportGrid grid = default_grid(config.model, config.grid_resolution);

  ExperimentReport report;
  report.config = config;
  report.replications.resize(static_cast<std::size_t>(config.replications));

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(config.replications));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < config.replications; r = next++)
      report.replications[static_cast<std::size_t>(r)] = run_replication(config, grid, r);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& rep : report.replications)
    if (!rep.ok) ++report.n_failed;
  if (report.n_failed * 10 > config.replications)
    throw ExperimentError("experiment '" + config.id + "': " + std::to_string(report.n_failed) +
                          " of " + std::to_string(config.replications) +
                          " replications failed; first error: " + [&] {
                            for (const auto& rep : report.replications)
                              if (!rep.ok) return rep.error;
                            return std::string();
                          }());

  const int dim = config.model.eta_dim();
  for (const char* which : {"naive", "gmle"}) {
    const bool is_naive = std::string(which) == "naive";
    for (int j = 0; j < dim; ++j) {
      std::vector<double> values;
      for (const auto& rep : report.replications) {
        if (!rep.ok) continue;
        if (is_naive) {
          if (rep.naive) values.push_back((*rep.naive)[static_cast<std::size_t>(j)]);
        } else {
          values.push_back(rep.gmle[static_cast<std::size_t>(j)]);
        }
      }
      const std::string name =
          dim == 1 ? std::string(which) : std::string(which) + "[" + std::to_string(j) + "]";
      summarize(values, report.n_failed, name, report.summary);
    }
  }
  return report;
}

std::vector<ExperimentConfig> table_preset(const std::string& name) {
  std::vector<ExperimentConfig> out;
  auto base = [](std::string id) {
    ExperimentConfig c;
    c.id = std::move(id);
    c.mode = Mode::Censored;
    c.grid_resolution = 50;
    c.solver = EmOptions{};
    c.replications = 50;
    c.seed = kDefaultSeed;
    return c;
  };
  if (name == "table1") {
    for (double delta : {0.3, 0.2, 0.1}) {
      std::ostringstream id;
      id << "table1_delta" << delta;
      auto c = base(id.str());
      c.model = ModelSpec::binomial(4);
      c.population = PopulationSpec{TwoTypePopulation{delta}, 1000};
      out.push_back(std::move(c));
    }
  } else if (name == "table2") {
    for (int kappa = 1; kappa <= 5; ++kappa) {
      auto c = base("table2_kappa" + std::to_string(kappa));
      c.model = ModelSpec::binomial(kappa);
      c.population = PopulationSpec{UniformMixPopulation{{0.1, 0.6}, {0.4, 0.9}}, 1000};
      out.push_back(std::move(c));
    }
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "' (expected table1 or table2)");
  }
  return out;
}

}  // namespace mnar
