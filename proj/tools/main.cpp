#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "metrotwin/aas.hpp"
#include "metrotwin/report.hpp"
#include "metrotwin/scenario.hpp"
#include "metrotwin/simulation.hpp"

namespace fs = std::filesystem;
using namespace metrotwin;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;
constexpr int kUsage = 64;

std::optional<Timestamp> parse_time_arg(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (auto t = parse_rfc3339(text)) return t;
  throw CLI::ValidationError("time", "'" + text + "' is not an RFC 3339 timestamp");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_summary(const RunSummary& s) {
  std::cout << "output       " << s.out_dir.string() << "\n"
            << "samples      " << s.samples << "\n"
            << "sync         " << s.sync_exchanges << " exchanges, " << s.rejected_exchanges << " rejected\n"
            << "flags        " << s.flagged_reports << "\n"
            << "swaps        " << s.swaps << "\n"
            << "errors       " << s.errors << "\n"
            << "state digest " << s.state_digest << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated sensor network with uncertainty-aware digital twins"};
  app.require_subcommand(1);

  std::string scenario_path, run_dir, stream_id, out_dir, from_text, to_text, output_file, log_path;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  auto* run = app.add_subcommand("run", "Execute a scenario and write its output directory");
  run->add_option("scenario", scenario_path, "Scenario file (.toml or .json)")->required();
  run->add_option("--out", out_dir, "Output directory (default: $METRO_TWIN_OUT/<name> or runs/<name>)");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--threads", threads, "Worker threads for same-time work")->check(CLI::Range(1u, 256u));

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file and list every problem");
  validate_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

  auto* export_cmd = app.add_subcommand("export-aas", "Export the measurement submodel of a stream");
  export_cmd->add_option("run_dir", run_dir, "Run output directory")->required();
  export_cmd->add_option("stream_id", stream_id, "Sensor or virtual-sensor id")->required();
  export_cmd->add_option("--from", from_text, "Range start (RFC 3339)");
  export_cmd->add_option("--to", to_text, "Range end (RFC 3339)");
  export_cmd->add_option("-o,--output", output_file, "Write the document here instead of stdout");

  auto* report_cmd = app.add_subcommand("report", "Summarize coverage, flags and swaps of a run");
  report_cmd->add_option("run_dir", run_dir, "Run output directory")->required();

  auto* replay_cmd = app.add_subcommand("replay", "Re-drive a scenario from its recorded event log");
  replay_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  replay_cmd->add_option("events", log_path, "events.jsonl of an earlier run")->required();
  replay_cmd->add_option("--out", out_dir, "Output directory")->required();
  replay_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 256u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) {
      const auto cfg = load_scenario(scenario_path);
      RunOptions opts;
      opts.out_dir = out_dir;
      opts.seed = seed;
      opts.threads = threads;
      print_summary(run_scenario(cfg, opts));
    } else if (*validate_cmd) {
      const auto cfg = load_scenario(scenario_path);
      std::cout << scenario_path << ": ok (" << cfg.nodes.size() << " nodes, " << cfg.sensors.size()
                << " sensors, " << cfg.virtual_sensors.size() << " virtual sensors, "
                << cfg.redundancy_groups.size() << " redundancy groups)\n";
    } else if (*export_cmd) {
      const auto doc = submodel_to_json(export_from_run(run_dir, stream_id, parse_time_arg(from_text),
                                                        parse_time_arg(to_text))) + "\n";
      if (output_file.empty()) {
        std::cout << doc;
      } else {
        std::ofstream(output_file, std::ios::binary) << doc;
      }
    } else if (*report_cmd) {
      const auto rows = build_report(run_dir);
      std::ofstream(fs::path(run_dir) / "report.csv", std::ios::binary) << report_csv(rows);
      std::cout << report_text(rows);
    } else if (*replay_cmd) {
      const auto cfg = load_scenario(scenario_path);
      const auto log = EventLog::from_jsonl(read_file(log_path));
      RunOptions opts;
      opts.out_dir = out_dir;
      opts.threads = threads;
      print_summary(replay_scenario(cfg, log, opts));
    }
  } catch (const ValidationFailure& e) {
    std::cerr << "validation failed: " << e.issues().size() << " problem(s)\n";
    for (const auto& issue : e.issues()) std::cerr << "  " << issue << "\n";
    return kValidation;
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::parse_error ? kValidation : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
