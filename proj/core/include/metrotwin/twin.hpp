#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "metrotwin/calibration.hpp"

namespace metrotwin {

enum class TwinFlag { drift_suspected, certificate_expired, out_of_range };
enum class TwinDirective { drift_reported, operator_recalibrate, cooldown_active, mute_alerts };
enum class TwinAction { emit_alert, request_recalibration, annotate_stream };

std::string_view to_string(TwinFlag f) noexcept;
std::string_view to_string(TwinAction a) noexcept;

/// Running statistics of the observed values (Welford recurrence).
struct ObserverStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  Timestamp first{};
  Timestamp last{};

  /// Sample variance; zero until two values have been seen.
  double variance() const noexcept { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  /// Samples per second over the observed span.
  double rate() const noexcept;
};

struct TwinConfig {
  std::size_t capacity = 4096;
  double plausible_min = -std::numeric_limits<double>::infinity();
  double plausible_max = std::numeric_limits<double>::infinity();
};

/// Digital twin of one sensor: the observer half keeps the buffer and
/// statistics, the controller half (`twin_control`) maps conditions to actions.
struct TwinState {
  std::string sensor_id;
  CalibrationCertificate certificate;
  TwinConfig config;
  std::deque<Measurement> buffer;
  ObserverStats stats;
  std::set<TwinFlag> flags;
  /// Samples refused because their timestamp did not advance.
  std::size_t dropped_samples = 0;

  bool has(TwinFlag f) const { return flags.contains(f); }
};

TwinState make_twin(std::string sensor_id, CalibrationCertificate certificate, TwinConfig config = {});

/// Appends `m` (evicting the oldest sample at capacity) and updates the
/// statistics and flags. Non-advancing timestamps are dropped and counted.
TwinState twin_observe(TwinState state, const Measurement& m);

/// Enriches a raw reading with the twin's certificate and observes it.
TwinState twin_ingest(TwinState state, double raw, Timestamp t, double u_timestamp = 0.0);

/// Pure decision table from flags and external directives to actions.
std::set<TwinAction> twin_control(const TwinState& state, const std::set<TwinDirective>& directives);

/// Buffered samples with from <= timestamp <= to.
std::vector<Measurement> request_enriched(const TwinState& state, Timestamp from, Timestamp to);

/// Replaces the certificate and clears the flags the old one caused.
TwinState install_certificate(TwinState state, CalibrationCertificate certificate);

}  // namespace metrotwin
