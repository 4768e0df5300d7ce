#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace metrotwin {

inline constexpr std::string_view kReportCsvHeader =
    "sensor_id,samples,coverage_k2,z_mean,z_std,flagged_windows,swaps,final_certificate,status";

/// Per-sensor quality summary of a finished run. z is the standardized
/// residual (value - truth) / u_c of the enriched stream.
struct SensorReport {
  std::string sensor_id;
  std::size_t samples = 0;
  /// Fraction of samples with |z| <= 2.
  double coverage_k2 = 0.0;
  double z_mean = 0.0;
  double z_std = 0.0;
  std::size_t flagged_windows = 0;
  std::size_t swaps = 0;
  std::string final_certificate;

  /// "FLAGGED" when any window was flagged, "ok" otherwise.
  std::string status() const { return flagged_windows > 0 ? "FLAGGED" : "ok"; }
};

std::vector<SensorReport> build_report(const std::filesystem::path& run_dir);
std::string report_csv(const std::vector<SensorReport>& rows);
std::string report_text(const std::vector<SensorReport>& rows);

}  // namespace metrotwin
