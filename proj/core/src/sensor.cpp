#include "metrotwin/sensor.hpp"

#include <cmath>
#include <numbers>

#include "metrotwin/error.hpp"
#include "metrotwin/random.hpp"

namespace metrotwin {

void SensorModel::validate() const {
  if (!(noise_sigma >= 0.0)) throw Error(Errc::validation_error, "sensor " + sensor_id + ": noise_sigma < 0");
  if (!(nominal_gain != 0.0) || !std::isfinite(nominal_gain) || !std::isfinite(nominal_offset)) {
    throw Error(Errc::validation_error, "sensor " + sensor_id + ": nominal transfer must be finite with non-zero gain");
  }
  if (sample_period <= Duration::zero()) throw Error(Errc::validation_error, "sensor " + sensor_id + ": sample_period <= 0");
  for (const auto& c : signal) {
    if (c.kind == SignalComponent::Kind::sine && !(c.period > 0.0)) {
      throw Error(Errc::validation_error, "sensor " + sensor_id + ": sine period must be positive");
    }
  }
}

double SensorModel::true_value(Timestamp t) const noexcept {
  const double s = seconds_between(origin, t);
  double v = 0.0;
  for (const auto& c : signal) {
    switch (c.kind) {
      case SignalComponent::Kind::constant: v += c.value; break;
      case SignalComponent::Kind::ramp: v += s > c.start ? c.value * (s - c.start) : 0.0; break;
      case SignalComponent::Kind::sine: v += c.value * std::sin(2.0 * std::numbers::pi * s / c.period + c.phase); break;
      case SignalComponent::Kind::step: v += s >= c.start ? c.value : 0.0; break;
    }
  }
  return v;
}

double SensorModel::bias(Timestamp t) const noexcept {
  double b = 0.0;
  for (const auto& f : faults) {
    if (t < f.start) continue;
    b += f.kind == FaultInjection::Kind::step_bias ? f.magnitude : f.magnitude * seconds_between(f.start, t);
  }
  return b;
}

RawSample sample_sensor(const SensorModel& model, const ClockModel& clock, Timestamp sim_time, std::uint64_t rng_seed) {
  const auto since = sim_time - model.origin;
  if (since < Duration::zero() || since % model.sample_period != Duration::zero()) {
    throw Error(Errc::off_grid_sample, "sensor " + model.sensor_id + " sampled off its grid");
  }
  const auto index = static_cast<std::uint64_t>(since / model.sample_period);
  const CounterRng rng(rng_seed);

  RawSample s;
  s.sensor_id = model.sensor_id;
  s.node_id = model.node_id;
  s.true_time = sim_time;
  s.true_value = model.true_value(sim_time);
  double reading = (1.0 + model.gain_error) * s.true_value + model.offset_error + model.bias(sim_time);
  if (model.noise_sigma > 0.0) reading += model.noise_sigma * rng.normal(index, 0);
  s.raw = (reading - model.nominal_offset) / model.nominal_gain;
  s.local_time = local_time(clock, sim_time, derive_seed(rng_seed, index));
  return s;
}

}  // namespace metrotwin
