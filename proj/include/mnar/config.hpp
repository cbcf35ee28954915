#ifndef MNAR_CONFIG_HPP
#define MNAR_CONFIG_HPP

#include <map>
#include <string>
#include <vector>

#include "mnar/simulation.hpp"

namespace mnar {

// Flat `key = value` document. Lines starting with '#' and blank lines are
// ignored. Keys are kept sorted so serialization is canonical.
using KeyValues = std::map<std::string, std::string>;

// Throws ConfigError naming the line on malformed or duplicate entries.
KeyValues parse_key_values(const std::string& text);
std::string format_key_values(const KeyValues& kv);

// Recognized experiment keys:
//   preset      table1 | table2 (expands to several configurations)
//   id          configuration id (single-configuration runs only)
//   family      binom
//   kappa       attempted units per stratum
//   population  two_type | uniform_mix
//   delta       two_type offset
//   range_a     "lo,hi" for the first half of uniform_mix strata
//   range_b     "lo,hi" for the second half
//   n_strata    strata per data set
//   mode        truncated | censored
//   grid_res    default_grid resolution
//   tol         EM certificate tolerance
//   max_iter    EM iteration cap
//   reps        replications
//   seed        master seed
// Without a preset, unspecified keys take the Table 1 delta = 0.2 defaults.
std::vector<ExperimentConfig> resolve_experiments(const KeyValues& kv);

const std::vector<std::string>& experiment_keys();

}  // namespace mnar

#endif  // MNAR_CONFIG_HPP
