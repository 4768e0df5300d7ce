#include "metrotwin/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "metrotwin/calibration.hpp"
#include "metrotwin/error.hpp"
#include "metrotwin/stream_csv.hpp"

namespace metrotwin {

std::vector<SensorReport> build_report(const std::filesystem::path& run_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(run_dir / "streams")) {
    throw Error(Errc::io_error, run_dir.string() + " is not a run directory");
  }
  std::map<std::string, SensorReport> rows;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(run_dir / "streams")) {
    if (e.path().extension() == ".csv") files.push_back(e.path());
  }
  for (const auto& path : files) {
    const auto id = path.stem().string();
    auto& row = rows[id];
    row.sensor_id = id;
    const auto stream = read_stream_csv(path);
    const auto truth = read_truth_csv(run_dir / "truth" / (id + ".csv"));
    std::map<std::int64_t, double> truth_at;
    for (const auto& t : truth) truth_at[tai_ns(t.timestamp)] = t.value;
    double sum = 0.0, sum2 = 0.0;
    std::size_t covered = 0;
    for (const auto& m : stream) {
      auto it = truth_at.find(tai_ns(m.timestamp));
      const double u = m.combined_uncertainty();
      if (it == truth_at.end() || !(u > 0.0)) continue;
      const double z = (m.value - it->second) / u;
      sum += z;
      sum2 += z * z;
      if (std::abs(z) <= 2.0) ++covered;
      ++row.samples;
    }
    if (row.samples > 0) {
      const double n = static_cast<double>(row.samples);
      row.coverage_k2 = static_cast<double>(covered) / n;
      row.z_mean = sum / n;
      row.z_std = row.samples > 1 ? std::sqrt(std::max(0.0, (sum2 - n * row.z_mean * row.z_mean) / (n - 1.0))) : 0.0;
    }
    const auto cert_path = run_dir / "certificates" / (id + ".json");
    if (fs::exists(cert_path)) row.final_certificate = load_certificate(cert_path).certificate_id;
  }

  std::ifstream audit(run_dir / "audit.jsonl");
  std::string line;
  while (std::getline(audit, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse_error, "audit.jsonl: malformed line");
    auto it = rows.find(j.value("sensor_id", ""));
    if (it == rows.end()) continue;
    const auto type = j.value("type", "");
    if (type == "drift_report" && j.value("flagged", false)) ++it->second.flagged_windows;
    if (type == "certificate_swap") ++it->second.swaps;
  }

  std::vector<SensorReport> out;
  for (auto& [id, row] : rows) out.push_back(std::move(row));
  return out;
}

std::string report_csv(const std::vector<SensorReport>& rows) {
  std::string s(kReportCsvHeader);
  s += "\n";
  for (const auto& r : rows) {
    s += r.sensor_id + "," + std::to_string(r.samples) + "," + format_double(r.coverage_k2) + "," +
         format_double(r.z_mean) + "," + format_double(r.z_std) + "," + std::to_string(r.flagged_windows) + "," +
         std::to_string(r.swaps) + "," + r.final_certificate + "," + r.status() + "\n";
  }
  return s;
}

std::string report_text(const std::vector<SensorReport>& rows) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8s %8s %6s  %-24s %s\n", "sensor", "samples", "cov(k=2)",
                "z_mean", "z_std", "flagged", "swaps", "certificate", "status");
  out << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-16s %8zu %8.3f %8.3f %8.3f %8zu %6zu  %-24s %s\n", r.sensor_id.c_str(),
                  r.samples, r.coverage_k2, r.z_mean, r.z_std, r.flagged_windows, r.swaps,
                  r.final_certificate.c_str(), r.status().c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace metrotwin
