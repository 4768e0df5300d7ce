#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "metrotwin/error.hpp"
#include "metrotwin/redundancy.hpp"
#include "metrotwin/rules.hpp"
#include "metrotwin/sensor.hpp"

namespace metrotwin {

struct SensorConfig {
  SensorModel model;
  std::string certificate_ref;
  std::string measurand_ref;
  TwinConfig twin;
};

struct FaultSpec {
  std::string sensor_id;
  FaultInjection fault;
};

struct SyncConfig {
  Duration period{std::chrono::seconds(10)};
  double path_delay = 2e-3;        ///< mean one-way delay, seconds
  double path_delay_spread = 100e-6;  ///< common delay varies uniformly by +/- spread/2
  double asymmetry_bound = 1e-3;    ///< |fwd - rev| is drawn uniformly within this bound
  double turnaround = 50e-6;        ///< node processing time between t2 and t3
  double collector_jitter = 0.0;
  /// Offset estimates kept for the clock discipline fit.
  std::size_t history = 32;
};

struct AlignmentConfig {
  Duration grid_period{std::chrono::seconds(1)};
  /// Cadence of alignment, virtual sensors and redundancy checks.
  Duration epoch{std::chrono::minutes(5)};
};

struct RedundancyGroup {
  std::string id;
  std::vector<std::string> sensors;
};

struct ScenarioConfig {
  std::string name;
  Timestamp start{};
  Duration duration{};
  std::uint64_t seed = 0;
  std::vector<ClockModel> nodes;
  std::map<std::string, CalibrationCertificate> certificates;
  std::vector<SensorConfig> sensors;
  std::vector<FaultSpec> faults;
  std::vector<VirtualSensorRule> virtual_sensors;
  std::vector<RedundancyGroup> redundancy_groups;
  SyncConfig sync;
  AlignmentConfig alignment;
  bool recalibration_enabled = true;
  RecalibrationPolicy recalibration;

  const SensorConfig* find_sensor(std::string_view id) const;
  const ClockModel* find_node(std::string_view id) const;
};

/// Raised by load_scenario when the document parses but is inconsistent; it
/// carries every problem found, each prefixed by its element path.
class ValidationFailure : public Error {
 public:
  explicit ValidationFailure(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Loads a TOML (or `.json`) scenario. Certificate files are resolved relative
/// to the scenario's directory. Throws Error(parse_error) or ValidationFailure.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir, bool json = false);

}  // namespace metrotwin
