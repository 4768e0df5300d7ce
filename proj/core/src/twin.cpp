#include "metrotwin/twin.hpp"

#include <algorithm>

#include "metrotwin/error.hpp"

namespace metrotwin {

std::string_view to_string(TwinFlag f) noexcept {
  switch (f) {
    case TwinFlag::drift_suspected: return "drift_suspected";
    case TwinFlag::certificate_expired: return "certificate_expired";
    case TwinFlag::out_of_range: return "out_of_range";
  }
  return "unknown";
}

std::string_view to_string(TwinAction a) noexcept {
  switch (a) {
    case TwinAction::emit_alert: return "emit_alert";
    case TwinAction::request_recalibration: return "request_recalibration";
    case TwinAction::annotate_stream: return "annotate_stream";
  }
  return "unknown";
}

double ObserverStats::rate() const noexcept {
  const double span = seconds_between(first, last);
  return count > 1 && span > 0.0 ? static_cast<double>(count - 1) / span : 0.0;
}

TwinState make_twin(std::string sensor_id, CalibrationCertificate certificate, TwinConfig config) {
  if (config.capacity == 0) throw Error(Errc::invalid_argument, "twin buffer capacity must be positive");
  TwinState s;
  s.sensor_id = std::move(sensor_id);
  s.certificate = std::move(certificate);
  s.config = config;
  return s;
}

TwinState twin_observe(TwinState state, const Measurement& m) {
  if (!state.buffer.empty() && m.timestamp <= state.buffer.back().timestamp) {
    ++state.dropped_samples;
    return state;
  }
  state.buffer.push_back(m);
  while (state.buffer.size() > state.config.capacity) state.buffer.pop_front();

  auto& st = state.stats;
  if (st.count == 0) st.first = m.timestamp;
  st.last = m.timestamp;
  ++st.count;
  const double delta = m.value - st.mean;
  st.mean += delta / static_cast<double>(st.count);
  st.m2 += delta * (m.value - st.mean);

  if (m.value < state.config.plausible_min || m.value > state.config.plausible_max) {
    state.flags.insert(TwinFlag::out_of_range);
  } else {
    state.flags.erase(TwinFlag::out_of_range);
  }
  if (certificate_expired(state.certificate, m.timestamp)) state.flags.insert(TwinFlag::certificate_expired);
  return state;
}

TwinState twin_ingest(TwinState state, double raw, Timestamp t, double u_timestamp) {
  Measurement m = apply_calibration(raw, state.certificate, t);
  m.source_id = state.sensor_id;
  m.u_timestamp = u_timestamp;
  return twin_observe(std::move(state), m);
}

std::set<TwinAction> twin_control(const TwinState& state, const std::set<TwinDirective>& directives) {
  std::set<TwinAction> actions;
  if (state.has(TwinFlag::out_of_range)) actions.insert(TwinAction::emit_alert);
  if (state.has(TwinFlag::certificate_expired)) actions.insert(TwinAction::request_recalibration);
  if (state.has(TwinFlag::drift_suspected) || directives.contains(TwinDirective::drift_reported)) {
    actions.insert(TwinAction::request_recalibration);
    actions.insert(TwinAction::annotate_stream);
  }
  if (directives.contains(TwinDirective::operator_recalibrate)) actions.insert(TwinAction::request_recalibration);
  if (directives.contains(TwinDirective::cooldown_active)) actions.erase(TwinAction::request_recalibration);
  if (directives.contains(TwinDirective::mute_alerts)) actions.erase(TwinAction::emit_alert);
  return actions;
}

std::vector<Measurement> request_enriched(const TwinState& state, Timestamp from, Timestamp to) {
  if (from > to) throw Error(Errc::inverted_range, "request range ends before it starts");
  auto lo = std::lower_bound(state.buffer.begin(), state.buffer.end(), from,
                             [](const Measurement& m, Timestamp t) { return m.timestamp < t; });
  auto hi = std::upper_bound(lo, state.buffer.end(), to,
                             [](Timestamp t, const Measurement& m) { return t < m.timestamp; });
  return {lo, hi};
}

TwinState install_certificate(TwinState state, CalibrationCertificate certificate) {
  state.certificate = std::move(certificate);
  state.flags.erase(TwinFlag::drift_suspected);
  state.flags.erase(TwinFlag::certificate_expired);
  return state;
}

}  // namespace metrotwin
