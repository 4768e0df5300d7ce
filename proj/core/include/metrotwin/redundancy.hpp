#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metrotwin/twin.hpp"

namespace metrotwin {

struct DriftReport {
  std::string sensor_id;
  Timestamp from{};
  Timestamp to{};
  double normalized_error = 0.0;
  double threshold_k = 2.0;
  bool flagged = false;
  /// Identifier of the leave-one-out consensus the sensor was compared with.
  std::string consensus_trace;
  std::size_t points = 0;
};

struct RecalibrationResult {
  CalibrationCertificate new_certificate;
  double fit_residual_rms = 0.0;
  std::size_t n_points = 0;
  double condition_number = 0.0;
  double reduced_chi2 = 0.0;
};

/// Inverse-variance consensus of simultaneous samples, optionally leaving one
/// sensor out. Needs three inputs, and two after the exclusion.
Measurement consensus_estimate(std::span<const Measurement> aligned, const std::optional<std::string>& exclude = {});

/// Normalised error of the window means,
/// E_n = |mean_sensor - mean_consensus| / sqrt(u^2(mean_sensor) + u^2(mean_consensus)),
/// over samples with from <= t < to that appear in both streams. Random parts
/// average down with 1/N, systematic parts do not.
DriftReport drift_score(std::span<const Measurement> sensor, std::span<const Measurement> consensus, Timestamp from,
                        Timestamp to, double threshold_k = 2.0);

struct RecalibrationOptions {
  std::size_t min_pairs = 30;
  /// Gain is identifiable only when the raw span exceeds this many median consensus u_c.
  double spread_factor = 10.0;
  bool allow_offset_only = true;
  Timestamp recalibrated_at{};
  Duration validity{std::chrono::hours(24 * 365)};
  std::string certificate_id;
  double drift_rate = 0.0;
  double u_drift = 0.0;
};

/// Weighted least squares of consensus against raw reading. The raw readings
/// are noisy themselves (u_noise of `current`, taken back to raw units), so the
/// fit corrects the gain for that attenuation and weights each pair with
/// 1/(u_c^2 + gain^2 u_x^2). Parameter covariance is scaled by the reduced
/// chi-square when it exceeds one; the consensus systematic uncertainty,
/// common to every pair, is added to u_offset. Without enough raw spread only
/// the offset is refitted and the current gain and its uncertainty are kept.
/// `raw` holds raw readings as the sample values.
RecalibrationResult infield_recalibrate(std::span<const Measurement> raw, std::span<const Measurement> consensus,
                                        Timestamp from, Timestamp to, const CalibrationCertificate& current,
                                        const RecalibrationOptions& options);

struct RecalibrationPolicy {
  double threshold_k = 2.0;
  Duration window{std::chrono::minutes(5)};
  Duration cooldown{std::chrono::hours(1)};
  /// Consecutive flagged windows required before recalibrating.
  std::size_t confirm_windows = 2;
  RecalibrationOptions fit;
};

/// Aligned data of one redundancy group for one window.
struct SensorWindow {
  std::string sensor_id;
  std::vector<Measurement> calibrated;
  std::vector<Measurement> raw;
};

struct NetworkWindow {
  Timestamp from{};
  Timestamp to{};
  std::vector<SensorWindow> sensors;
};

struct WorkflowEvent {
  enum class Kind { drift_report, recalibration, certificate_swap, error };

  Kind kind = Kind::drift_report;
  Timestamp at{};
  std::string sensor_id;
  std::optional<DriftReport> report;
  std::optional<RecalibrationResult> recalibration;
  std::string old_certificate_id;
  std::string new_certificate_id;
  std::string message;
};

/// Detect, recalibrate, swap. Flagging is iterative: the sensor with the
/// largest E_n above threshold is removed from the reference pool and the rest
/// are re-scored, so one faulty sensor cannot drag healthy ones over the line.
/// Recalibration runs against the consensus of all unflagged sensors, through
/// each twin's request_recalibration action, and respects a per-sensor cooldown.
class RecalibrationWorkflow {
 public:
  explicit RecalibrationWorkflow(RecalibrationPolicy policy, unsigned threads = 1);

  std::vector<WorkflowEvent> step(const NetworkWindow& window, std::map<std::string, TwinState>& twins);

  const RecalibrationPolicy& policy() const noexcept { return policy_; }

 private:
  struct SensorTrack {
    std::size_t consecutive_flags = 0;
    std::optional<Timestamp> cooldown_until;
    std::size_t swaps = 0;
  };

  RecalibrationPolicy policy_;
  unsigned threads_;
  std::map<std::string, SensorTrack> tracks_;
};

/// One JSON object (no trailing newline) for the audit log.
std::string audit_json_line(const WorkflowEvent& event);

}  // namespace metrotwin
