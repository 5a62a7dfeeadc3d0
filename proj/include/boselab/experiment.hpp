#ifndef BOSELAB_EXPERIMENT_HPP
#define BOSELAB_EXPERIMENT_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "boselab/types.hpp"

namespace boselab {

inline constexpr const char* kVersion = "0.1.0";

/// One CSV series of a scenario (one file on emission).
struct CsvSeries {
  std::string name;                 // file stem
  std::vector<std::string> header;  // stable column order
  std::vector<std::vector<double>> rows;
};

/// One named invariant check embedded in a scenario run.
struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct ExperimentReport {
  nlohmann::json config_echo;
  std::string version = kVersion;
  double wall_seconds = 0.0;  // excluded from reproducibility comparisons
  std::string scenario;
  nlohmann::json results;  // scenario-specific records
  std::vector<Check> checks;
  std::vector<CsvSeries> series;

  bool all_pass() const;
  /// Deterministic summary; wall-clock lives under the excluded "timing" key.
  nlohmann::json summary() const;
};

/// Validates a config against the published schema. Unknown keys are
/// rejected; returns a list of human-readable problems (empty = valid).
std::vector<std::string> validate_config(const nlohmann::json& config);

/// The published config schema as JSON (drives `schema` and validation docs).
nlohmann::json config_schema();

/// Runs one scenario. The config must already validate.
ExperimentReport run_scenario(const nlohmann::json& config, int threads = 1);

/// Writes CSV series and/or the JSON summary under out_dir. Throws
/// std::ios_base::failure on I/O problems.
void emit_report(const ExperimentReport& report, const std::string& out_dir,
                 bool csv = true, bool json = true);

/// 17-significant-digit float formatting shared by all emitters.
std::string format_double(double v);

}  // namespace boselab

#endif  // BOSELAB_EXPERIMENT_HPP
