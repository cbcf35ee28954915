#ifndef MNAR_DATA_IO_HPP
#define MNAR_DATA_IO_HPP

#include <string>
#include <vector>

#include "mnar/models.hpp"

namespace mnar {

// Per-stratum data in the CSV schema
//   stratum_id,kappa_attempted,kappa_responded,x
// kappa_responded = 0 marks a nonresponding stratum (x empty or 0).
struct StrataData {
  int kappa_attempted = 0;
  std::vector<std::string> stratum_ids;
  std::vector<Outcome> outcomes;
};

inline constexpr const char* kStrataHeader = "stratum_id,kappa_attempted,kappa_responded,x";

// Parses and validates the CSV for `family` (binom, poisson or bernoulli).
// Throws ConfigError whose field is "line N" on malformed input.
StrataData read_strata_csv(const std::string& text, Family family);

std::string write_strata_csv(int kappa_attempted, const std::vector<Outcome>& outcomes);

}  // namespace mnar

#endif  // MNAR_DATA_IO_HPP
