#ifndef MNAR_SIMULATION_HPP
#define MNAR_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mnar/gmle.hpp"
#include "mnar/models.hpp"
#include "mnar/rng.hpp"

namespace mnar {

// First half of the strata at pi = p = 0.5 - delta, second half at
// pi = p = 0.5 + delta. Deterministic.
struct TwoTypePopulation {
  double delta = 0.0;
};

// First half: pi, p iid U(range_a); second half: pi, p iid U(range_b).
// Redrawn every replication.
struct UniformMixPopulation {
  std::pair<double, double> range_a{0.1, 0.6};
  std::pair<double, double> range_b{0.4, 0.9};
};

struct ExplicitPopulation {
  std::vector<ThetaPoint> points;
};

struct PopulationSpec {
  std::variant<TwoTypePopulation, UniformMixPopulation, ExplicitPopulation> kind;
  int n_strata = 0;

  void validate() const;
  // True if the population is resampled each replication.
  bool redraws() const { return std::holds_alternative<UniformMixPopulation>(kind); }
  std::string describe() const;
};

std::vector<ThetaPoint> gen_population(const PopulationSpec& pspec, Rng& rng);

// One outcome per stratum, in stratum order.
std::vector<Outcome> draw_strata(const ModelSpec& spec, const std::vector<ThetaPoint>& population,
                                 Rng& rng);

// Censored observation set aggregated from draw_strata.
ObservationSet draw_observations(const ModelSpec& spec,
                                 const std::vector<ThetaPoint>& population, Rng& rng);

// Drops the nonresponse cell. Throws DegenerateData if nothing is left.
ObservationSet to_truncated(const ObservationSet& obs);

struct ExperimentConfig {
  std::string id;
  ModelSpec model;
  PopulationSpec population;
  Mode mode = Mode::Censored;
  int grid_resolution = 50;
  EmOptions solver;
  int replications = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr std::uint64_t kDefaultSeed = 20240521;

struct ReplicationResult {
  bool ok = false;
  std::string error;
  std::vector<double> gmle;
  std::optional<std::vector<double>> naive;
  long iterations = 0;
  bool converged = false;
  double certificate = 0.0;
  long n_responders = 0;
  long n_total = 0;
};

struct EstimatorSummary {
  std::string estimator;  // "naive", "gmle", or "naive[j]" / "gmle[j]"
  double mean = 0.0;
  double sd = 0.0;  // denominator (count - 1); 0 with fewer than 2 values
  int n_reps = 0;
  int n_failed = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ReplicationResult> replications;
  std::vector<EstimatorSummary> summary;
  int n_failed = 0;

  const EstimatorSummary& estimator(const std::string& name) const;
};

// Strata outcomes for replication r: the population (redrawn if the kind
// asks for it) and the outcomes, both from child_seed(config.seed, r).
std::vector<Outcome> replication_strata(const ExperimentConfig& config, int r);

// Runs all replications on up to `threads` worker threads (0 = hardware
// concurrency). The result does not depend on the thread count.
ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads = 0);

// "table1" (delta in {0.3, 0.2, 0.1}, kappa 4) or "table2" (kappa 1..5).
std::vector<ExperimentConfig> table_preset(const std::string& name);

}  // namespace mnar

#endif  // MNAR_SIMULATION_HPP
