#pragma once

#include "bbm/energy.hpp"
#include "bbm/extrapolate.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bbm {

inline constexpr const char* kVersion = "0.3.0";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named built-in spaces: interval [0,1], square [0,1]^2, weighted (1/x on
/// [0.1, 0.9]), circle (circumference 1), product ([0,1] with weight 1+t times
/// Lebesgue [0,1]).
Space make_space(const std::string& name);
/// Named maps: identity, square (x1^2), angle (2 pi x1 into the circle),
/// constant, x1, x2.
MapSpec make_map(const std::string& name, int dim);
/// "auto" follows the map's codomain; otherwise euclidean, circle,
/// snowflake:<alpha> or discrete.
TargetSpace make_target(const std::string& name, const MapSpec& map);

struct ScenarioConfig {
  std::string space = "interval";
  std::string map = "identity";
  double map_scale = 1.0;
  std::string target = "auto";
  double p = 2.0;
  std::string family = "rho1";
  std::vector<double> deltas{0.08, 0.04, 0.02, 0.01};
  QuadratureConfig quadrature;
  std::string model = "linear";
  std::uint64_t seed = 1;
  double tolerance = 0.02;
  std::string output_dir = "out";

  /// Throws InputError on an invalid combination.
  void validate() const;
};

/// Parses the YAML scenario format; unknown keys are rejected.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Sorted-key JSON of every field that affects results (not the output
/// directory or the worker count).
std::string canonical_config(const ScenarioConfig& cfg);
/// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string fingerprint(const ScenarioConfig& cfg);

struct ReportRow {
  double delta = 0.0;
  EnergyEstimate estimate;
  /// estimate / Cheeger energy, for real-valued maps with nonzero energy.
  std::optional<double> cheeger_ratio;
};

struct Report {
  std::string fingerprint;
  std::string version = kVersion;
  std::string family;
  std::string model;
  std::vector<ReportRow> rows;
  Extrapolation extrapolation;
  double predicted = 0.0;
  double rel_dev = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::optional<double> cheeger;
  /// Set when an evaluator failed; the verdict is then fail.
  std::string error;
};

/// |extrapolated - predicted| <= tolerance * max(predicted, 1e-12).
bool verdict(double extrapolated, double predicted, double tolerance);

Report run_scenario(const ScenarioConfig& cfg);

/// Writes energy.csv and report.jsonl into dir (created if missing).
/// Throws IoError when the directory or files cannot be written.
void emit(const Report& report, const std::string& dir);

std::string energy_csv(const Report& report);
std::string report_jsonl(const Report& report);

}  // namespace bbm
