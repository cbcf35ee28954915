#ifndef MNAR_VERIFY_HPP
#define MNAR_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mnar/estimators.hpp"
#include "mnar/gmle.hpp"
#include "mnar/simulation.hpp"

namespace mnar {

struct PropertyCheck {
  std::string name;
  bool passed = false;
  std::string observed;
  // Reported for context only; never fails the suite.
  bool informational = false;
};

struct SuiteResult {
  std::string suite;
  std::vector<PropertyCheck> checks;

  bool passed() const;
};

struct VerifyOptions {
  // Used by the consistency suite.
  int reps = 50;
  int grid_resolution = 50;
  unsigned threads = 0;
  std::uint64_t seed = kDefaultSeed;
};

// Ten Bernoulli observations, five zeros and five ones.
ObservationSet example1_observations();

// The multi-start data set used by the lemma1 and identity suites: censored
// binomial, kappa = 2, 1000 strata from the Table 2 uniform mixture.
struct MultiStartCase {
  ModelSpec model;
  SupportGrid grid;
  ObservationSet obs;
  LikelihoodMatrix L;
  std::vector<GmleSolution> solutions;
};
MultiStartCase lemma1_case();

// Largest relative disagreement of fitted marginals across solutions.
double max_marginal_disagreement(const LikelihoodMatrix& L,
                                 const std::vector<GmleSolution>& solutions);
// Largest max-norm distance between solution weight vectors.
double max_weight_disagreement(const std::vector<GmleSolution>& solutions);

// suite: example1 | lemma1 | identity | consistency
SuiteResult run_verify_suite(const std::string& suite, const VerifyOptions& options = {});

const std::vector<std::string>& verify_suites();

}  // namespace mnar

#endif  // MNAR_VERIFY_HPP
