#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "metrotwin/measurement.hpp"

namespace metrotwin {

enum class Provenance { laboratory, in_field };

std::string_view to_string(Provenance p) noexcept;

/// Linear correction value = gain * raw + offset, with the uncertainty budget
/// of that correction.
struct CalibrationCertificate {
  std::string certificate_id;
  Provenance provenance = Provenance::laboratory;
  /// Only degree 1 (gain/offset) is implemented; the field is reserved.
  int model_degree = 1;

  double gain = 1.0;
  double u_gain = 0.0;
  double offset = 0.0;  ///< in `unit`
  double u_offset = 0.0;
  double cov_gain_offset = 0.0;
  /// Per-sample random uncertainty of the calibrated instrument, in `unit`.
  double u_noise = 0.0;
  /// Nominal drift in `unit` per second. Informational: drift is never applied
  /// as a correction, only `u_drift` enters the uncertainty.
  double drift_rate = 0.0;
  double u_drift = 0.0;

  Timestamp calibrated_at{};
  Timestamp valid_until{};

  Unit unit;      ///< calibrated output unit
  Unit raw_unit;  ///< unit of the raw reading
  QuantityKind kind = QuantityKind::dimensionless;
  /// Set when an in-field fit could only determine the offset.
  bool offset_only = false;

  friend bool operator==(const CalibrationCertificate&, const CalibrationCertificate&) = default;
};

/// Throws validation_error when an invariant is broken (Cauchy-Schwarz on
/// cov_gain_offset, negative uncertainties, empty validity window, unit/kind).
void validate(const CalibrationCertificate& cert);

bool certificate_expired(const CalibrationCertificate& cert, Timestamp t) noexcept;

/// value = gain * raw + offset; u_random = u_noise; u_systematic propagates
/// (gain, offset, drift) through sensitivities (raw, 1, t - calibrated_at).
Measurement apply_calibration(double raw, const CalibrationCertificate& cert, Timestamp t);

std::string certificate_to_json(const CalibrationCertificate& cert);
CalibrationCertificate certificate_from_json(std::string_view text);
CalibrationCertificate load_certificate(const std::filesystem::path& path);

}  // namespace metrotwin
