#include "metrotwin/simulation.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <future>
#include <queue>
#include <sstream>

#include "json.hpp"
#include "metrotwin/collector.hpp"
#include "metrotwin/random.hpp"
#include "metrotwin/stream_csv.hpp"

namespace metrotwin {

using json = nlohmann::ordered_json;

void EventLog::append(Timestamp t, std::string kind, std::string payload) {
  records.push_back({t, std::move(kind), std::move(payload)});
}

std::string EventLog::to_jsonl() const {
  std::string out;
  for (const auto& r : records) {
    out += "{\"sim_time_tai_ns\":" + std::to_string(tai_ns(r.sim_time)) + ",\"kind\":\"" + r.kind +
           "\",\"payload\":" + r.payload + "}\n";
  }
  return out;
}

EventLog EventLog::from_jsonl(std::string_view text) {
  EventLog log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      log.append(from_tai_ns(j.at("sim_time_tai_ns").get<std::int64_t>()), j.at("kind").get<std::string>(),
                 j.at("payload").dump());
    } catch (const json::exception& e) {
      throw Error(Errc::parse_error, "event log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return log;
}

std::filesystem::path default_output_dir(const std::string& scenario_name) {
  if (const char* env = std::getenv("METRO_TWIN_OUT"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env) / scenario_name;
  }
  return std::filesystem::path("runs") / scenario_name;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + p.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::vector<std::filesystem::path> files_under(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::exists(dir)) return files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), dir));
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });
  return files;
}

json exchange_json(const std::string& node, std::uint64_t k, const SyncExchange& x) {
  json j;
  j["node"] = node;
  j["k"] = k;
  j["t1_ns"] = tai_ns(x.t1);
  j["t2_ns"] = tai_ns(x.t2);
  j["t3_ns"] = tai_ns(x.t3);
  j["t4_ns"] = tai_ns(x.t4);
  j["delay_fwd_s"] = x.path_delay_fwd;
  j["delay_rev_s"] = x.path_delay_rev;
  return j;
}

json sample_json(const RawSample& s) {
  json j;
  j["sensor"] = s.sensor_id;
  j["node"] = s.node_id;
  j["raw"] = s.raw;
  j["local_ns"] = tai_ns(s.local_time);
  j["true_ns"] = tai_ns(s.true_time);
  j["true_value"] = s.true_value;
  return j;
}

/// The measurement side of the run: collector, twins, alignment, virtual
/// sensors and the recalibration workflow. It sees only what a real
/// deployment would see (exchanges and raw samples), so a recorded log can
/// drive it without the simulator.
class Pipeline {
 public:
  Pipeline(const ScenarioConfig& cfg, unsigned threads, EventLog& log, RunSummary& summary)
      : cfg_(cfg), threads_(std::max(1u, threads)), log_(log), summary_(summary) {
    for (const auto& n : cfg.nodes) {
      collector_.register_node(n.node_id, n.jitter_sigma);
      history_[n.node_id];
    }
    for (const auto& s : cfg.sensors) {
      twins_.emplace(s.model.sensor_id,
                     make_twin(s.model.sensor_id, cfg.certificates.at(s.certificate_ref), s.twin));
      data_[s.model.sensor_id].period = s.model.sample_period;
    }
    for (const auto& r : cfg.virtual_sensors) virtual_[r.id];
    for (std::size_t g = 0; g < cfg.redundancy_groups.size(); ++g) workflows_.emplace_back(cfg.recalibration, threads_);
  }

  void on_sync(Timestamp at, const std::string& node_id, const SyncExchange& x) {
    ++summary_.sync_exchanges;
    const auto* node = cfg_.find_node(node_id);
    if (node == nullptr) throw Error(Errc::unknown_node, node_id);
    const SyncModel model{node->jitter_sigma, cfg_.sync.collector_jitter, cfg_.sync.asymmetry_bound};
    OffsetEstimate est;
    try {
      est = estimate_offset(x, model);
    } catch (const Error& e) {
      ++summary_.rejected_exchanges;
      log_.append(at, "sync_rejected", json{{"node", node_id}, {"error", e.what()}}.dump());
      return;
    }
    auto& h = history_[node_id];
    h.push_back(est.offset);
    while (h.size() > cfg_.sync.history) h.pop_front();
    if (h.size() < 2) return;
    const std::vector<Measurement> pts(h.begin(), h.end());
    try {
      auto clock = discipline_clock(pts);
      clock.node_id = node_id;
      collector_.update_clock(clock);
      log_.append(at, "clock_update",
                  json{{"node", node_id}, {"offset_s", clock.offset}, {"skew", clock.skew},
                       {"u_offset_s", clock.u_offset}, {"reference_ns", tai_ns(clock.reference)}}
                      .dump());
    } catch (const Error& e) {
      ++summary_.errors;
      log_.append(at, "error", json{{"node", node_id}, {"error", e.what()}}.dump());
    }
  }

  void on_sample(const RawSample& s) {
    ++summary_.samples;
    auto& twin = twins_.at(s.sensor_id);
    auto& d = data_.at(s.sensor_id);
    const auto corrected = collector_.correct(s.node_id, s.local_time);
    const auto dropped = twin.dropped_samples;
    try {
      twin = twin_ingest(std::move(twin), s.raw, corrected.time, corrected.uncertainty);
    } catch (const Error& e) {
      ++summary_.errors;
      log_.append(s.true_time, "error", json{{"sensor", s.sensor_id}, {"error", e.what()}}.dump());
      return;
    }
    if (twin.dropped_samples != dropped) {
      log_.append(s.true_time, "sample_dropped", json{{"sensor", s.sensor_id}}.dump());
      return;
    }
    const Measurement& m = twin.buffer.back();
    d.enriched.push_back(m);
    Measurement raw = m;
    raw.value = s.raw;
    raw.u_random = 0.0;
    raw.u_systematic = 0.0;
    raw.unit = twin.certificate.raw_unit;
    d.raw.push_back(raw);
    d.truth.push_back({m.timestamp, s.sensor_id, s.true_value});
  }

  void on_epoch(Timestamp at, Timestamp from, Timestamp to) {
    const auto grid = cfg_.alignment.grid_period;

    // Alignment of every physical stream is independent; results merge in sensor order.
    std::vector<std::string> ids;
    for (const auto& [id, d] : data_) ids.push_back(id);
    struct Aligned {
      std::vector<Measurement> calibrated, raw;
      std::string error;
    };
    std::vector<Aligned> aligned(ids.size());
    auto align_one = [&](std::size_t i) {
      const auto& d = data_.at(ids[i]);
      aligned[i].calibrated = align_window(d.enriched, d.period, grid, from, to, aligned[i].error);
      if (aligned[i].error.empty()) aligned[i].raw = align_window(d.raw, d.period, grid, from, to, aligned[i].error);
    };
    parallel_for(ids.size(), align_one);

    StreamMap window;
    std::map<std::string, std::vector<Measurement>> raw_window;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!aligned[i].error.empty()) {
        ++summary_.errors;
        log_.append(at, "error", json{{"sensor", ids[i]}, {"stage", "align"}, {"error", aligned[i].error}}.dump());
        continue;
      }
      auto& out = data_.at(ids[i]).aligned;
      out.insert(out.end(), aligned[i].calibrated.begin(), aligned[i].calibrated.end());
      window[ids[i]] = std::move(aligned[i].calibrated);
      raw_window[ids[i]] = std::move(aligned[i].raw);
    }

    std::vector<std::vector<Measurement>> fused(cfg_.virtual_sensors.size());
    std::vector<std::string> fuse_errors(cfg_.virtual_sensors.size());
    parallel_for(cfg_.virtual_sensors.size(), [&](std::size_t i) {
      try {
        fused[i] = run_virtual_sensor_rule(cfg_.virtual_sensors[i], window);
      } catch (const Error& e) {
        fuse_errors[i] = e.what();
      }
    });
    for (std::size_t i = 0; i < fused.size(); ++i) {
      const auto& id = cfg_.virtual_sensors[i].id;
      if (!fuse_errors[i].empty()) {
        ++summary_.errors;
        log_.append(at, "error", json{{"virtual", id}, {"error", fuse_errors[i]}}.dump());
        continue;
      }
      log_.append(at, "fusion", json{{"virtual", id}, {"points", fused[i].size()}}.dump());
      auto& out = virtual_.at(id);
      out.insert(out.end(), fused[i].begin(), fused[i].end());
    }

    if (cfg_.recalibration_enabled) {
      for (std::size_t g = 0; g < cfg_.redundancy_groups.size(); ++g) {
        NetworkWindow nw{from, to, {}};
        for (const auto& id : cfg_.redundancy_groups[g].sensors) {
          auto it = window.find(id);
          if (it == window.end()) continue;
          nw.sensors.push_back({id, it->second, raw_window.at(id)});
        }
        for (const auto& e : workflows_[g].step(nw, twins_)) record(at, cfg_.redundancy_groups[g].id, e);
      }
    }

    for (const auto& [id, twin] : twins_) {
      const auto actions = twin_control(twin, {});
      if (actions.empty()) continue;
      json flags = json::array();
      for (auto f : twin.flags) flags.push_back(std::string(to_string(f)));
      json acts = json::array();
      for (auto a : actions) acts.push_back(std::string(to_string(a)));
      log_.append(at, "twin_actions", json{{"sensor", id}, {"flags", flags}, {"actions", acts}}.dump());
    }
  }

  void write(const std::filesystem::path& dir) const {
    namespace fs = std::filesystem;
    for (const char* sub : {"streams", "aligned", "virtual", "truth", "certificates"}) {
      fs::remove_all(dir / sub);
      fs::create_directories(dir / sub);
    }
    for (const auto& [id, d] : data_) {
      write_stream_csv(dir / "streams" / (id + ".csv"), d.enriched);
      write_stream_csv(dir / "aligned" / (id + ".csv"), d.aligned);
      write_truth_csv(dir / "truth" / (id + ".csv"), d.truth);
    }
    for (const auto& [id, v] : virtual_) write_stream_csv(dir / "virtual" / (id + ".csv"), v);
    json rules = json::array();
    for (const auto& r : cfg_.virtual_sensors) rules.push_back(json{{"id", r.id}, {"rule", describe(r.expr)}});
    spit(dir / "virtual_sensors.json", rules.dump(2) + "\n");
    for (const auto& [id, t] : twins_) spit(dir / "certificates" / (id + ".json"), certificate_to_json(t.certificate) + "\n");
    std::string audit;
    for (const auto& line : audit_) audit += line + "\n";
    spit(dir / "audit.jsonl", audit);
  }

  std::string state_digest() const {
    std::string s;
    for (const auto& [id, t] : twins_) {
      s += id + "|" + certificate_to_json(t.certificate) + "|" + std::to_string(t.stats.count) + "|" +
           format_double(t.stats.mean) + "|" + format_double(t.stats.m2) + "|" + std::to_string(t.dropped_samples);
      for (auto f : t.flags) s += "|" + std::string(to_string(f));
      s += "\n";
    }
    for (const auto& n : cfg_.nodes) {
      const auto& c = collector_.clock(n.node_id);
      s += n.node_id + "|" + std::to_string(tai_ns(c.reference)) + "|" + format_double(c.offset) + "|" +
           format_double(c.skew) + "|" + format_double(c.u_offset) + "|" + format_double(c.u_skew) + "\n";
    }
    for (const auto& [id, d] : data_) {
      s += id + "|" + std::to_string(d.enriched.size()) + "|" + std::to_string(d.aligned.size()) + "\n";
    }
    for (const auto& [id, v] : virtual_) s += id + "|" + std::to_string(v.size()) + "\n";
    return hex64(fnv1a64(s));
  }

 private:
  struct SensorData {
    Duration period{};
    std::vector<Measurement> enriched;
    std::vector<Measurement> raw;
    std::vector<Measurement> aligned;
    std::vector<TruthSample> truth;
  };

  template <class F>
  void parallel_for(std::size_t n, F&& f) {
    if (threads_ <= 1 || n < 2) {
      for (std::size_t i = 0; i < n; ++i) f(i);
      return;
    }
    std::vector<std::future<void>> jobs;
    const std::size_t workers = std::min<std::size_t>(threads_, n);
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < n; i += workers) f(i);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  /// Aligns the part of `stream` around [from, to) and keeps the grid points inside it.
  static std::vector<Measurement> align_window(const std::vector<Measurement>& stream, Duration period,
                                               Duration grid, Timestamp from, Timestamp to, std::string& error) {
    const auto margin = 2 * std::max(period, grid);
    auto lo = std::lower_bound(stream.begin(), stream.end(), from - margin,
                               [](const Measurement& m, Timestamp t) { return m.timestamp < t; });
    auto hi = std::lower_bound(stream.begin(), stream.end(), to + margin,
                               [](const Measurement& m, Timestamp t) { return m.timestamp < t; });
    std::vector<Measurement> out;
    if (lo == hi) {
      error = "EmptyStream: no samples near the window";
      return out;
    }
    const std::vector<std::vector<Measurement>> input{std::vector<Measurement>(lo, hi)};
    try {
      auto result = align_streams(input, grid);
      for (auto& m : result.front()) {
        if (m.timestamp >= from && m.timestamp < to) out.push_back(std::move(m));
      }
    } catch (const Error& e) {
      error = e.what();
    }
    return out;
  }

  void record(Timestamp at, const std::string& group, const WorkflowEvent& e) {
    audit_.push_back(audit_json_line(e));
    switch (e.kind) {
      case WorkflowEvent::Kind::drift_report:
        if (e.report->flagged) {
          ++summary_.flagged_reports;
          log_.append(at, "flag",
                      json{{"group", group}, {"sensor", e.sensor_id}, {"normalized_error", e.report->normalized_error}}
                          .dump());
        }
        break;
      case WorkflowEvent::Kind::recalibration:
        log_.append(at, "recalibration",
                    json{{"group", group},
                         {"sensor", e.sensor_id},
                         {"gain", e.recalibration->new_certificate.gain},
                         {"offset", e.recalibration->new_certificate.offset}}
                        .dump());
        break;
      case WorkflowEvent::Kind::certificate_swap:
        ++summary_.swaps;
        log_.append(at, "swap",
                    json{{"group", group}, {"sensor", e.sensor_id}, {"old", e.old_certificate_id},
                         {"new", e.new_certificate_id}}
                        .dump());
        break;
      case WorkflowEvent::Kind::error:
        ++summary_.errors;
        log_.append(at, "error", json{{"group", group}, {"sensor", e.sensor_id}, {"error", e.message}}.dump());
        break;
    }
  }

  const ScenarioConfig& cfg_;
  unsigned threads_;
  EventLog& log_;
  RunSummary& summary_;
  Collector collector_;
  std::map<std::string, std::deque<Measurement>> history_;
  std::map<std::string, TwinState> twins_;
  std::map<std::string, SensorData> data_;
  std::map<std::string, std::vector<Measurement>> virtual_;
  std::vector<RecalibrationWorkflow> workflows_;
  std::vector<std::string> audit_;
};

enum class EventClass { sync = 0, sample = 1, epoch = 2 };

struct Scheduled {
  Timestamp at;
  EventClass cls;
  std::string entity;
  std::uint64_t seq;
  std::size_t index;  ///< node, sensor or epoch number

  bool operator>(const Scheduled& o) const {
    return std::tie(at, cls, entity, seq) > std::tie(o.at, o.cls, o.entity, o.seq);
  }
};

Duration alignment_lag(const ScenarioConfig& cfg) {
  Duration lag = cfg.alignment.grid_period;
  for (const auto& s : cfg.sensors) lag = std::max(lag, s.model.sample_period);
  return lag;
}

/// Simulated exchange `k` with `node`; all draws come from the node's sync seed.
SyncExchange simulate_exchange(const ScenarioConfig& cfg, const ClockModel& node, std::uint64_t seed, std::uint64_t k,
                               Timestamp at) {
  const CounterRng rng(seed);
  const auto& s = cfg.sync;
  const double common = s.path_delay + s.path_delay_spread * (rng.uniform(k, 0) - 0.5);
  const double asym = s.asymmetry_bound * (2.0 * rng.uniform(k, 1) - 1.0);
  SyncExchange x;
  x.path_delay_fwd = common + 0.5 * asym;
  x.path_delay_rev = common - 0.5 * asym;
  const auto arrive = at + seconds_to_duration(x.path_delay_fwd);
  const auto reply = arrive + seconds_to_duration(s.turnaround);
  x.t1 = at + seconds_to_duration(s.collector_jitter * rng.normal(k, 1));
  x.t2 = local_time(node, arrive, derive_seed(seed, 2 * k + 1));
  x.t3 = local_time(node, reply, derive_seed(seed, 2 * k + 2));
  x.t4 = reply + seconds_to_duration(x.path_delay_rev + s.collector_jitter * rng.normal(k, 2));
  return x;
}

std::pair<Timestamp, Timestamp> epoch_window(const ScenarioConfig& cfg, std::size_t k) {
  return {cfg.start + static_cast<std::int64_t>(k - 1) * cfg.alignment.epoch,
          cfg.start + static_cast<std::int64_t>(k) * cfg.alignment.epoch};
}

json epoch_json(std::size_t k, Timestamp from, Timestamp to) {
  return json{{"epoch", k}, {"from_ns", tai_ns(from)}, {"to_ns", tai_ns(to)}};
}

void finish(const ScenarioConfig& cfg, const RunOptions& options, Pipeline& pipeline, RunSummary& summary,
            std::uint64_t seed) {
  summary.state_digest = pipeline.state_digest();
  if (!options.write_files) return;
  namespace fs = std::filesystem;
  summary.out_dir = options.out_dir.empty() ? default_output_dir(cfg.name) : options.out_dir;
  const auto& dir = summary.out_dir;
  fs::create_directories(dir);
  fs::remove(dir / "manifest.json");
  pipeline.write(dir);
  spit(dir / "events.jsonl", summary.log.to_jsonl());

  json manifest;
  manifest["schema_version"] = 1;
  manifest["scenario"] = cfg.name;
  manifest["seed"] = seed;
  manifest["state_digest"] = summary.state_digest;
  json files = json::array();
  for (const auto& rel : files_under(dir)) {
    const auto text = slurp(dir / rel);
    files.push_back(json{{"path", rel.generic_string()}, {"bytes", text.size()}, {"fnv1a64", hex64(fnv1a64(text))}});
  }
  manifest["files"] = files;
  spit(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  ScenarioConfig cfg = config;
  if (options.seed) cfg.seed = *options.seed;

  RunSummary summary;
  Pipeline pipeline(cfg, options.threads, summary.log, summary);

  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> queue;
  std::uint64_t seq = 0;
  const auto end = cfg.start + cfg.duration;

  std::vector<std::uint64_t> sync_seeds;
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
    sync_seeds.push_back(derive_seed(cfg.seed, "sync/" + cfg.nodes[i].node_id));
    // Two warm-up exchanges before the start give every node a clock estimate.
    queue.push({cfg.start - 2 * cfg.sync.period, EventClass::sync, cfg.nodes[i].node_id, seq++, i});
  }
  std::vector<std::uint64_t> sensor_seeds;
  for (std::size_t i = 0; i < cfg.sensors.size(); ++i) {
    sensor_seeds.push_back(derive_seed(cfg.seed, "sensor/" + cfg.sensors[i].model.sensor_id));
    queue.push({cfg.start, EventClass::sample, cfg.sensors[i].model.sensor_id, seq++, i});
  }
  const auto lag = alignment_lag(cfg);
  const auto epochs = static_cast<std::size_t>(cfg.duration / cfg.alignment.epoch);
  if (epochs > 0) queue.push({epoch_window(cfg, 1).second + lag, EventClass::epoch, "", seq++, 1});

  while (!queue.empty()) {
    const auto ev = queue.top();
    queue.pop();
    switch (ev.cls) {
      case EventClass::sync: {
        const auto& node = cfg.nodes[ev.index];
        const auto k = static_cast<std::uint64_t>((ev.at - (cfg.start - 2 * cfg.sync.period)) / cfg.sync.period);
        const auto x = simulate_exchange(cfg, node, sync_seeds[ev.index], k, ev.at);
        summary.log.append(ev.at, "sync", exchange_json(node.node_id, k, x).dump());
        pipeline.on_sync(ev.at, node.node_id, x);
        if (ev.at + cfg.sync.period <= end) queue.push({ev.at + cfg.sync.period, ev.cls, ev.entity, seq++, ev.index});
        break;
      }
      case EventClass::sample: {
        const auto& sc = cfg.sensors[ev.index];
        const auto s = sample_sensor(sc.model, *cfg.find_node(sc.model.node_id), ev.at, sensor_seeds[ev.index]);
        summary.log.append(ev.at, "sample", sample_json(s).dump());
        pipeline.on_sample(s);
        const auto next = ev.at + sc.model.sample_period;
        if (next <= end) queue.push({next, ev.cls, ev.entity, seq++, ev.index});
        break;
      }
      case EventClass::epoch: {
        const auto [from, to] = epoch_window(cfg, ev.index);
        summary.log.append(ev.at, "epoch", epoch_json(ev.index, from, to).dump());
        pipeline.on_epoch(ev.at, from, to);
        if (ev.index < epochs) {
          queue.push({epoch_window(cfg, ev.index + 1).second + lag, ev.cls, ev.entity, seq++, ev.index + 1});
        }
        break;
      }
    }
  }
  finish(cfg, options, pipeline, summary, cfg.seed);
  return summary;
}

RunSummary replay_scenario(const ScenarioConfig& config, const EventLog& log, const RunOptions& options) {
  ScenarioConfig cfg = config;
  if (options.seed) cfg.seed = *options.seed;
  RunSummary summary;
  Pipeline pipeline(cfg, options.threads, summary.log, summary);
  for (const auto& r : log.records) {
    try {
      const auto p = json::parse(r.payload);
      if (r.kind == "sync") {
        SyncExchange x;
        x.t1 = from_tai_ns(p.at("t1_ns").get<std::int64_t>());
        x.t2 = from_tai_ns(p.at("t2_ns").get<std::int64_t>());
        x.t3 = from_tai_ns(p.at("t3_ns").get<std::int64_t>());
        x.t4 = from_tai_ns(p.at("t4_ns").get<std::int64_t>());
        x.path_delay_fwd = p.at("delay_fwd_s").get<double>();
        x.path_delay_rev = p.at("delay_rev_s").get<double>();
        summary.log.append(r.sim_time, r.kind, r.payload);
        pipeline.on_sync(r.sim_time, p.at("node").get<std::string>(), x);
      } else if (r.kind == "sample") {
        RawSample s;
        s.sensor_id = p.at("sensor").get<std::string>();
        s.node_id = p.at("node").get<std::string>();
        s.raw = p.at("raw").get<double>();
        s.local_time = from_tai_ns(p.at("local_ns").get<std::int64_t>());
        s.true_time = from_tai_ns(p.at("true_ns").get<std::int64_t>());
        s.true_value = p.at("true_value").get<double>();
        summary.log.append(r.sim_time, r.kind, r.payload);
        pipeline.on_sample(s);
      } else if (r.kind == "epoch") {
        summary.log.append(r.sim_time, r.kind, r.payload);
        pipeline.on_epoch(r.sim_time, from_tai_ns(p.at("from_ns").get<std::int64_t>()),
                          from_tai_ns(p.at("to_ns").get<std::int64_t>()));
      }
    } catch (const json::exception& e) {
      throw Error(Errc::parse_error, "event log record '" + r.kind + "': " + e.what());
    }
  }
  finish(cfg, options, pipeline, summary, cfg.seed);
  return summary;
}

std::string digest_directory(const std::filesystem::path& dir) {
  std::uint64_t h = fnv1a64("");
  for (const auto& rel : files_under(dir)) {
    h = fnv1a64(rel.generic_string(), h);
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(slurp(dir / rel), h);
  }
  return hex64(h);
}

}  // namespace metrotwin
