#pragma once

#include <filesystem>
#include <string>

// Small scenarios shared by the scenario, simulation and CLI tests.

namespace fixtures {

inline std::filesystem::path source_dir() { return METROTWIN_SOURCE_DIR; }

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "metrotwin_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Four thermometers on two nodes, one picks up a bias after 10 minutes.
inline std::string small_scenario(int duration_s = 1800) {
  return R"toml([scenario]
name = "small"
start = "2025-01-01T00:00:00Z"
duration_s = )toml" + std::to_string(duration_s) + R"toml(
seed = 5

[sync]
period_s = 10
asymmetry_bound_s = 0.0005

[alignment]
grid_period_s = 1
epoch_s = 300

[recalibration]
window_s = 300
cooldown_s = 1200

[[nodes]]
id = "n1"
offset_s = 0.1
skew = 2e-6
jitter_s = 1e-5

[[nodes]]
id = "n2"
offset_s = -0.3
jitter_s = 1e-5

[[certificates]]
id = "lab"
certificate_id = "LAB-1"
gain = 1.0
u_gain = 0.0001
offset = 0.0
u_offset = 0.02
u_noise = 0.05
calibrated_at = "2024-06-01T00:00:00Z"
valid_until = "2026-06-01T00:00:00Z"
unit = "K"
quantity_kind = "temperature"

[[measurands]]
id = "bath"
signal = [{ kind = "constant", value = 300.0 }, { kind = "sine", amplitude = 2.0, period_s = 600 }]

[[sensors]]
id = "T1"
node = "n1"
certificate = "lab"
measurand = "bath"
noise_sigma = 0.05

[[sensors]]
id = "T2"
node = "n1"
certificate = "lab"
measurand = "bath"
noise_sigma = 0.05
offset_error = 0.01

[[sensors]]
id = "T3"
node = "n2"
certificate = "lab"
measurand = "bath"
noise_sigma = 0.05
offset_error = -0.01

[[sensors]]
id = "T4"
node = "n2"
certificate = "lab"
measurand = "bath"
noise_sigma = 0.05

[[faults]]
sensor = "T4"
kind = "step_bias"
start_s = 600
magnitude = 0.5

[[virtual_sensors]]
id = "bath-mean"
rule = "fuse(T1, T2, T3, T4)"

[[virtual_sensors]]
id = "bath-hot"
rule = "label(301, window_average(10s, T1))"

[[redundancy_groups]]
id = "bath-group"
sensors = ["T1", "T2", "T3", "T4"]
)toml";
}

}  // namespace fixtures
