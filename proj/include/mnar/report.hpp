#ifndef MNAR_REPORT_HPP
#define MNAR_REPORT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mnar/config.hpp"
#include "mnar/estimators.hpp"
#include "mnar/simulation.hpp"

namespace mnar {

inline constexpr const char* kArtifactVersion = "1.0.0";

// Everything needed to regenerate an output file. Contains no timestamps or
// host information so identical runs produce identical bytes.
struct RunManifest {
  std::string subcommand;
  KeyValues config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string version = kArtifactVersion;

  nlohmann::json to_json() const;
  // Single-line "# manifest: {...}" header for CSV files.
  std::string csv_comment() const;
};

nlohmann::json config_to_json(const ExperimentConfig& c);
nlohmann::json report_to_json(const ExperimentReport& r);

// One row per configuration x estimator:
//   config_id,estimator,mean,sd,n_reps,n_failed
// preceded by the manifest comment line.
std::string summary_csv(const std::vector<ExperimentReport>& reports, const RunManifest& manifest);

// Mean followed by the sd in parentheses, one line per configuration.
std::string format_table(const std::vector<ExperimentReport>& reports);

// Formats a double with %.10g (the CSV number format).
std::string format_number(double v);

}  // namespace mnar

#endif  // MNAR_REPORT_HPP
