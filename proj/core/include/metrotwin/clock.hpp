#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metrotwin/measurement.hpp"

namespace metrotwin {

/// Node-local time distortion:
/// local = true + offset + skew * (true - epoch) + jitter.
struct ClockModel {
  std::string node_id;
  double offset = 0.0;        ///< seconds
  double skew = 0.0;          ///< dimensionless rate error, |skew| < 1e-3
  double jitter_sigma = 0.0;  ///< seconds, per timestamping
  /// Instant at which the accumulated skew is zero.
  Timestamp epoch{};

  void validate() const;
};

/// Reads the node clock at `true_time`. Jitter is drawn from `rng_seed` alone.
Timestamp local_time(const ClockModel& clock, Timestamp true_time, std::uint64_t rng_seed);

/// One two-way exchange: the collector sends at t1 (its clock), the node
/// receives at t2 and replies at t3 (node clock), the collector receives at t4.
struct SyncExchange {
  Timestamp t1{}, t2{}, t3{}, t4{};
  /// Ground truth, never read by the estimator.
  double path_delay_fwd = 0.0;
  double path_delay_rev = 0.0;
};

struct SyncModel {
  /// Per-timestamping jitter assumed by the estimator (seconds).
  double jitter_sigma = 0.0;
  /// Jitter of the collector's own timestamps t1 and t4 (seconds).
  double collector_jitter = 0.0;
  /// Largest path asymmetry the estimator allows for (seconds); treated as a
  /// uniform unknown with standard uncertainty bound / sqrt(3).
  double asymmetry_bound = 0.0;
};

struct OffsetEstimate {
  /// Node-minus-collector offset in seconds, timestamped at t4.
  Measurement offset;
  double mean_path_delay = 0.0;
};

/// Two-way estimate theta = ((t2 - t1) - (t4 - t3)) / 2, delay = ((t2 - t1) + (t4 - t3)) / 2.
OffsetEstimate estimate_offset(const SyncExchange& x, const SyncModel& model);

/// Linear clock model fitted to offset history:
/// offset(t) = offset + skew * (t - reference), t and reference on the collector base.
struct ClockEstimate {
  std::string node_id;
  /// Weighted centroid of the fitted points, where offset and skew decorrelate.
  Timestamp reference{};
  double offset = 0.0;
  double skew = 0.0;
  double u_offset = 0.0;
  double u_skew = 0.0;
  double cov_offset_skew = 0.0;
  std::size_t points = 0;

  /// A perfect clock: zero offset and skew, zero uncertainty.
  static ClockEstimate identity(std::string node_id);

  ClockModel to_clock_model(double jitter_sigma = 0.0) const;
  double offset_at(Timestamp t) const noexcept;
  double u_offset_at(Timestamp t) const noexcept;
  /// Maps a local reading back onto the collector time base.
  Timestamp to_true_time(Timestamp local) const noexcept;
};

/// Weighted least squares through (timestamp, offset) with weights 1/u^2.
/// Parameter uncertainties come from the unscaled fit covariance.
ClockEstimate discipline_clock(std::span<const Measurement> history);

}  // namespace metrotwin
