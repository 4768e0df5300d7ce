#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metrotwin/scenario.hpp"

namespace metrotwin {

/// One entry of the event log. `payload` is a compact JSON object.
struct LogRecord {
  Timestamp sim_time{};
  std::string kind;
  std::string payload;
};

/// Ordered record of everything the run did: inputs (sync exchanges, raw
/// samples, epoch ticks) and the derived fusions, flags and swaps.
struct EventLog {
  std::vector<LogRecord> records;

  void append(Timestamp t, std::string kind, std::string payload);
  std::string to_jsonl() const;
  static EventLog from_jsonl(std::string_view text);
};

struct RunOptions {
  /// Output directory; empty selects default_output_dir(name).
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  /// Skip writing files (benchmarks, replay checks).
  bool write_files = true;
};

struct RunSummary {
  std::filesystem::path out_dir;
  /// Digest of final twin certificates, statistics and clock estimates.
  std::string state_digest;
  std::size_t samples = 0;
  std::size_t sync_exchanges = 0;
  std::size_t rejected_exchanges = 0;
  std::size_t flagged_reports = 0;
  std::size_t swaps = 0;
  std::size_t errors = 0;
  EventLog log;
};

/// `$METRO_TWIN_OUT/<name>` if the variable is set, `runs/<name>` otherwise.
std::filesystem::path default_output_dir(const std::string& scenario_name);

/// Executes the scenario on a single discrete-event clock. Same config and
/// seed give byte-identical output for any thread count.
///
/// Output layout:
///   streams/<sensor>.csv      enriched measurements on the collector time base
///   aligned/<sensor>.csv      streams interpolated onto the alignment grid
///   virtual/<rule>.csv        virtual-sensor outputs
///   truth/<sensor>.csv        ground truth keyed by the corrected timestamp
///   certificates/<sensor>.json  certificate in force at the end of the run
///   virtual_sensors.json      rule text of every virtual sensor
///   audit.jsonl               drift reports, recalibrations and swaps
///   events.jsonl              the event log
///   manifest.json             file digests and the final state digest
RunSummary run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Re-drives the pipeline from a recorded log instead of the simulator and
/// returns the resulting summary; its state digest matches the original run.
RunSummary replay_scenario(const ScenarioConfig& config, const EventLog& log, const RunOptions& options = {});

/// FNV-1a digest over every file under `dir` (sorted relative paths and
/// contents), as 16 hex digits.
std::string digest_directory(const std::filesystem::path& dir);

}  // namespace metrotwin
