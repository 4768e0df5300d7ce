#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metrotwin/clock.hpp"

namespace metrotwin {

struct SignalComponent {
  enum class Kind { constant, ramp, sine, step };

  Kind kind = Kind::constant;
  double value = 0.0;     ///< constant level, ramp slope (per s), sine amplitude, step height
  double period = 0.0;    ///< sine period in seconds
  double phase = 0.0;     ///< sine phase in radians
  double start = 0.0;     ///< seconds after origin at which ramp/step begin
};

struct FaultInjection {
  enum class Kind { step_bias, ramp_drift };

  Kind kind = Kind::step_bias;
  Timestamp start{};
  /// Bias (step_bias) or bias rate per second (ramp_drift), in measurand units.
  double magnitude = 0.0;
};

/// Simulation ground truth for one physical sensor.
///
/// reading(t) = (1 + gain_error) * truth(t) + offset_error + faults(t) + N(0, noise_sigma)
/// raw(t)     = (reading(t) - nominal_offset) / nominal_gain
///
/// All terms of `reading` are in measurand units. gain_error/offset_error are
/// the instrument's hidden deviation from its certificate, and the nominal
/// transfer is the certificate's correction, so calibrating `raw` with an
/// exact certificate returns `reading`. With the defaults raw equals truth
/// plus noise plus injected bias.
struct SensorModel {
  std::string sensor_id;
  std::string node_id;
  std::vector<SignalComponent> signal;
  double noise_sigma = 0.0;
  std::vector<FaultInjection> faults;
  Duration sample_period{1'000'000'000};
  Timestamp origin{};
  double gain_error = 0.0;
  double offset_error = 0.0;
  double nominal_gain = 1.0;
  double nominal_offset = 0.0;

  void validate() const;
  double true_value(Timestamp t) const noexcept;
  double bias(Timestamp t) const noexcept;
};

struct RawSample {
  std::string sensor_id;
  std::string node_id;
  double raw = 0.0;
  Timestamp local_time{};
  /// Ground truth kept for evaluation; the pipeline never reads these.
  Timestamp true_time{};
  double true_value = 0.0;
};

/// Samples the sensor at `sim_time`, which must lie on the model's sampling
/// grid. Noise and clock jitter depend only on (rng_seed, grid index).
RawSample sample_sensor(const SensorModel& model, const ClockModel& clock, Timestamp sim_time,
                        std::uint64_t rng_seed);

}  // namespace metrotwin
