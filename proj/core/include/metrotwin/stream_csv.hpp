#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "metrotwin/measurement.hpp"

namespace metrotwin {

/// Column layout of every persisted measurement stream.
inline constexpr std::string_view kStreamCsvHeader =
    "timestamp_tai_ns,source_id,value,u_random,u_systematic,unit,quantity_kind,timestamp_rfc3339";

/// Column layout of simulation ground-truth files.
inline constexpr std::string_view kTruthCsvHeader = "timestamp_tai_ns,source_id,true_value,timestamp_rfc3339";

std::string format_stream_csv(std::span<const Measurement> stream);
void write_stream_csv(const std::filesystem::path& path, std::span<const Measurement> stream);
std::vector<Measurement> parse_stream_csv(std::string_view text);
std::vector<Measurement> read_stream_csv(const std::filesystem::path& path);

struct TruthSample {
  Timestamp timestamp{};
  std::string source_id;
  double value = 0.0;
};

void write_truth_csv(const std::filesystem::path& path, std::span<const TruthSample> samples);
std::vector<TruthSample> read_truth_csv(const std::filesystem::path& path);

/// Checks a file's header against `expected` and that every row has the same
/// number of fields. Returns a description of the first problem, empty if none.
std::string check_csv_schema(const std::filesystem::path& path, std::string_view expected);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace metrotwin
