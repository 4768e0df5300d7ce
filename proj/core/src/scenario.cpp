#include "metrotwin/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "toml_lite.hpp"

namespace metrotwin {

using json = nlohmann::ordered_json;

const SensorConfig* ScenarioConfig::find_sensor(std::string_view id) const {
  for (const auto& s : sensors) {
    if (s.model.sensor_id == id) return &s;
  }
  return nullptr;
}

const ClockModel* ScenarioConfig::find_node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.node_id == id) return &n;
  }
  return nullptr;
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string s = std::to_string(issues.size()) + " problem(s)";
  for (const auto& i : issues) s += "\n  " + i;
  return s;
}

/// Reads fields while collecting problems instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> issues;

  void issue(const std::string& path, const std::string& what) { issues.push_back(path + ": " + what); }

  const json* child(const json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  double number(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback) {
    const json* v = child(obj, key);
    if (v == nullptr) {
      if (!fallback) issue(path + "." + key, "required number is missing");
      return fallback.value_or(0.0);
    }
    if (!v->is_number()) {
      issue(path + "." + key, "expected a number");
      return fallback.value_or(0.0);
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) issue(path + "." + key, "must be finite");
    return d;
  }

  std::string text(const json& obj, const std::string& key, const std::string& path,
                   std::optional<std::string> fallback = std::nullopt) {
    const json* v = child(obj, key);
    if (v == nullptr) {
      if (!fallback) issue(path + "." + key, "required string is missing");
      return fallback.value_or("");
    }
    if (!v->is_string()) {
      issue(path + "." + key, "expected a string");
      return fallback.value_or("");
    }
    return v->get<std::string>();
  }

  bool boolean(const json& obj, const std::string& key, const std::string& path, bool fallback) {
    const json* v = child(obj, key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) {
      issue(path + "." + key, "expected true or false");
      return fallback;
    }
    return v->get<bool>();
  }

  Duration seconds(const json& obj, const std::string& key, const std::string& path, std::optional<double> fallback,
                   bool positive = true) {
    const double s = number(obj, key, path, fallback);
    if (positive && !(s > 0.0)) issue(path + "." + key, "must be positive");
    return seconds_to_duration(s);
  }

  std::vector<const json*> items(const json& root, const std::string& key) {
    std::vector<const json*> out;
    const json* v = child(root, key);
    if (v == nullptr) return out;
    if (!v->is_array()) {
      issue(key, "expected an array of tables");
      return out;
    }
    for (const auto& e : *v) out.push_back(&e);
    return out;
  }

  void check_id(const std::string& id, const std::string& path) {
    if (id.empty()) {
      issue(path, "id must not be empty");
      return;
    }
    for (char c : id) {
      if (std::isalnum(static_cast<unsigned char>(c)) == 0 && c != '_' && c != '-' && c != '.') {
        issue(path, "id '" + id + "' may only contain letters, digits, '_', '-' and '.'");
        return;
      }
    }
  }
};

std::vector<SignalComponent> read_signal(Reader& r, const json& arr, const std::string& path) {
  std::vector<SignalComponent> out;
  if (!arr.is_array()) {
    r.issue(path, "expected an array of signal components");
    return out;
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& c = arr[i];
    const std::string p = path + "[" + std::to_string(i) + "]";
    const auto kind = r.text(c, "kind", p);
    SignalComponent s;
    if (kind == "constant") {
      s.kind = SignalComponent::Kind::constant;
      s.value = r.number(c, "value", p, std::nullopt);
    } else if (kind == "ramp") {
      s.kind = SignalComponent::Kind::ramp;
      s.value = r.number(c, "slope", p, std::nullopt);
      s.start = r.number(c, "start_s", p, 0.0);
    } else if (kind == "sine") {
      s.kind = SignalComponent::Kind::sine;
      s.value = r.number(c, "amplitude", p, std::nullopt);
      s.period = r.number(c, "period_s", p, std::nullopt);
      s.phase = r.number(c, "phase_rad", p, 0.0);
      if (!(s.period > 0.0)) r.issue(p + ".period_s", "must be positive");
    } else if (kind == "step") {
      s.kind = SignalComponent::Kind::step;
      s.value = r.number(c, "height", p, std::nullopt);
      s.start = r.number(c, "at_s", p, std::nullopt);
    } else {
      r.issue(p + ".kind", "unknown signal kind '" + kind + "'");
      continue;
    }
    out.push_back(s);
  }
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ValidationFailure::ValidationFailure(std::vector<std::string> issues)
    : Error(Errc::validation_error, join_issues(issues)), issues_(std::move(issues)) {}

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir, bool as_json) {
  json root;
  if (as_json) {
    try {
      root = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(Errc::parse_error, e.what());
    }
  } else {
    root = detail::parse_toml(text);
  }

  Reader r;
  ScenarioConfig cfg;

  const json* meta = r.child(root, "scenario");
  if (meta == nullptr || !meta->is_object()) {
    r.issue("scenario", "missing [scenario] table");
    throw ValidationFailure(r.issues);
  }
  cfg.name = r.text(*meta, "name", "scenario");
  r.check_id(cfg.name, "scenario.name");
  if (const auto t = parse_rfc3339(r.text(*meta, "start", "scenario", "2024-01-01T00:00:00Z"))) {
    cfg.start = *t;
  } else {
    r.issue("scenario.start", "not an RFC 3339 timestamp");
  }
  cfg.duration = r.seconds(*meta, "duration_s", "scenario", std::nullopt);
  if (const json* seed = r.child(*meta, "seed"); seed == nullptr) {
    r.issue("scenario.seed", "a seed is mandatory");
  } else if (!seed->is_number_integer() || seed->get<std::int64_t>() < 0) {
    r.issue("scenario.seed", "expected a non-negative integer");
  } else {
    cfg.seed = static_cast<std::uint64_t>(seed->get<std::int64_t>());
  }

  if (const json* sync = r.child(root, "sync")) {
    cfg.sync.period = r.seconds(*sync, "period_s", "sync", 10.0);
    cfg.sync.path_delay = r.number(*sync, "path_delay_s", "sync", cfg.sync.path_delay);
    cfg.sync.path_delay_spread = r.number(*sync, "path_delay_spread_s", "sync", cfg.sync.path_delay_spread);
    cfg.sync.asymmetry_bound = r.number(*sync, "asymmetry_bound_s", "sync", cfg.sync.asymmetry_bound);
    cfg.sync.turnaround = r.number(*sync, "turnaround_s", "sync", cfg.sync.turnaround);
    cfg.sync.collector_jitter = r.number(*sync, "collector_jitter_s", "sync", 0.0);
    cfg.sync.history = static_cast<std::size_t>(r.number(*sync, "history", "sync", 32));
    if (cfg.sync.history < 2) r.issue("sync.history", "must keep at least 2 estimates");
    if (cfg.sync.path_delay < 0 || cfg.sync.path_delay_spread < 0 || cfg.sync.asymmetry_bound < 0 ||
        cfg.sync.turnaround < 0 || cfg.sync.collector_jitter < 0) {
      r.issue("sync", "delays, bounds and jitter must be non-negative");
    }
    if (cfg.sync.path_delay - 0.5 * cfg.sync.path_delay_spread - 0.5 * cfg.sync.asymmetry_bound < 0) {
      r.issue("sync", "path_delay too small for the configured spread and asymmetry");
    }
  }
  if (const json* align = r.child(root, "alignment")) {
    cfg.alignment.grid_period = r.seconds(*align, "grid_period_s", "alignment", 1.0);
    cfg.alignment.epoch = r.seconds(*align, "epoch_s", "alignment", 300.0);
  }
  if (const json* rec = r.child(root, "recalibration")) {
    auto& p = cfg.recalibration;
    cfg.recalibration_enabled = r.boolean(*rec, "enabled", "recalibration", true);
    p.threshold_k = r.number(*rec, "threshold_k", "recalibration", 2.0);
    if (!(p.threshold_k > 0.0)) r.issue("recalibration.threshold_k", "must be positive");
    p.window = r.seconds(*rec, "window_s", "recalibration", 300.0);
    p.cooldown = r.seconds(*rec, "cooldown_s", "recalibration", 3600.0, false);
    p.confirm_windows = static_cast<std::size_t>(r.number(*rec, "confirm_windows", "recalibration", 2));
    p.fit.min_pairs = static_cast<std::size_t>(r.number(*rec, "min_pairs", "recalibration", 30));
    p.fit.spread_factor = r.number(*rec, "spread_factor", "recalibration", 10.0);
    p.fit.allow_offset_only = r.boolean(*rec, "allow_offset_only", "recalibration", true);
    p.fit.validity = seconds_to_duration(86400.0 * r.number(*rec, "validity_days", "recalibration", 365.0));
    p.fit.drift_rate = r.number(*rec, "drift_rate", "recalibration", 0.0);
    p.fit.u_drift = r.number(*rec, "u_drift", "recalibration", 0.0);
    if (p.confirm_windows < 1) r.issue("recalibration.confirm_windows", "must be at least 1");
  }
  if (cfg.recalibration.window != cfg.alignment.epoch) {
    r.issue("recalibration.window_s", "must equal alignment.epoch_s (windows are evaluated once per epoch)");
  }

  std::set<std::string> ids;
  auto unique = [&](const std::string& id, const std::string& path) {
    r.check_id(id, path);
    if (!ids.insert(id).second) r.issue(path, "duplicate id '" + id + "'");
  };

  const auto nodes = r.items(root, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = "nodes[" + std::to_string(i) + "]";
    ClockModel c;
    c.node_id = r.text(*nodes[i], "id", p);
    unique(c.node_id, p + ".id");
    c.offset = r.number(*nodes[i], "offset_s", p, 0.0);
    c.skew = r.number(*nodes[i], "skew", p, 0.0);
    c.jitter_sigma = r.number(*nodes[i], "jitter_s", p, 0.0);
    c.epoch = cfg.start;
    try {
      c.validate();
    } catch (const Error& e) {
      r.issue(p, e.what());
    }
    cfg.nodes.push_back(c);
  }

  const auto certs = r.items(root, "certificates");
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const std::string p = "certificates[" + std::to_string(i) + "]";
    const auto id = r.text(*certs[i], "id", p);
    unique(id, p + ".id");
    try {
      CalibrationCertificate cert;
      if (const json* file = r.child(*certs[i], "file")) {
        if (!file->is_string()) throw Error(Errc::parse_error, "file must be a string");
        cert = load_certificate(base_dir / file->get<std::string>());
      } else {
        json inline_cert = *certs[i];
        inline_cert.erase("id");
        if (!inline_cert.contains("certificate_id")) inline_cert["certificate_id"] = id;
        cert = certificate_from_json(inline_cert.dump());
      }
      cfg.certificates[id] = cert;
    } catch (const Error& e) {
      r.issue(p, e.what());
    }
  }

  std::map<std::string, std::vector<SignalComponent>> measurands;
  const auto ms = r.items(root, "measurands");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const std::string p = "measurands[" + std::to_string(i) + "]";
    const auto id = r.text(*ms[i], "id", p);
    unique(id, p + ".id");
    if (const json* sig = r.child(*ms[i], "signal")) {
      measurands[id] = read_signal(r, *sig, p + ".signal");
    } else {
      r.issue(p + ".signal", "required signal is missing");
    }
  }

  const auto sensors = r.items(root, "sensors");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const auto& s = *sensors[i];
    const std::string p = "sensors[" + std::to_string(i) + "]";
    SensorConfig sc;
    auto& m = sc.model;
    m.sensor_id = r.text(s, "id", p);
    unique(m.sensor_id, p + ".id");
    m.node_id = r.text(s, "node", p);
    if (cfg.find_node(m.node_id) == nullptr) r.issue(p + ".node", "unknown node '" + m.node_id + "'");
    sc.certificate_ref = r.text(s, "certificate", p);
    if (auto it = cfg.certificates.find(sc.certificate_ref); it == cfg.certificates.end()) {
      r.issue(p + ".certificate", "unknown certificate '" + sc.certificate_ref + "'");
    } else {
      m.nominal_gain = it->second.gain;
      m.nominal_offset = it->second.offset;
    }
    m.sample_period = r.seconds(s, "sample_period_s", p, 1.0);
    m.noise_sigma = r.number(s, "noise_sigma", p, 0.0);
    m.gain_error = r.number(s, "gain_error", p, 0.0);
    m.offset_error = r.number(s, "offset_error", p, 0.0);
    m.origin = cfg.start;
    if (!(m.noise_sigma >= 0.0)) r.issue(p + ".noise_sigma", "must be non-negative");
    if (const json* ref = r.child(s, "measurand")) {
      sc.measurand_ref = ref->is_string() ? ref->get<std::string>() : "";
      if (auto it = measurands.find(sc.measurand_ref); it != measurands.end()) {
        m.signal = it->second;
      } else {
        r.issue(p + ".measurand", "unknown measurand '" + sc.measurand_ref + "'");
      }
    } else if (const json* sig = r.child(s, "signal")) {
      m.signal = read_signal(r, *sig, p + ".signal");
    } else {
      r.issue(p, "needs either 'measurand' or 'signal'");
    }
    try {
      m.validate();
    } catch (const Error& e) {
      r.issue(p, e.what());
    }
    sc.twin.capacity = static_cast<std::size_t>(r.number(s, "buffer_capacity", p, 4096));
    if (sc.twin.capacity == 0) r.issue(p + ".buffer_capacity", "must be positive");
    if (const json* range = r.child(s, "plausible_range")) {
      if (range->is_array() && range->size() == 2 && (*range)[0].is_number() && (*range)[1].is_number() &&
          (*range)[0].get<double>() < (*range)[1].get<double>()) {
        sc.twin.plausible_min = (*range)[0].get<double>();
        sc.twin.plausible_max = (*range)[1].get<double>();
      } else {
        r.issue(p + ".plausible_range", "expected [min, max] with min < max");
      }
    }
    cfg.sensors.push_back(std::move(sc));
  }

  const auto faults = r.items(root, "faults");
  for (std::size_t i = 0; i < faults.size(); ++i) {
    const std::string p = "faults[" + std::to_string(i) + "]";
    FaultSpec f;
    f.sensor_id = r.text(*faults[i], "sensor", p);
    const auto kind = r.text(*faults[i], "kind", p);
    if (kind == "step_bias") {
      f.fault.kind = FaultInjection::Kind::step_bias;
    } else if (kind == "ramp_drift") {
      f.fault.kind = FaultInjection::Kind::ramp_drift;
    } else {
      r.issue(p + ".kind", "expected step_bias or ramp_drift, got '" + kind + "'");
    }
    const double start_s = r.number(*faults[i], "start_s", p, std::nullopt);
    if (start_s < 0.0 || seconds_to_duration(start_s) > cfg.duration) {
      r.issue(p + ".start_s", "injection lies outside the scenario duration");
    }
    f.fault.start = cfg.start + seconds_to_duration(start_s);
    f.fault.magnitude = r.number(*faults[i], "magnitude", p, std::nullopt);
    if (cfg.find_sensor(f.sensor_id) == nullptr) {
      r.issue(p + ".sensor", "unknown sensor '" + f.sensor_id + "'");
    }
    cfg.faults.push_back(f);
  }
  for (const auto& f : cfg.faults) {
    for (auto& s : cfg.sensors) {
      if (s.model.sensor_id == f.sensor_id) s.model.faults.push_back(f.fault);
    }
  }

  const auto groups = r.items(root, "redundancy_groups");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const std::string p = "redundancy_groups[" + std::to_string(i) + "]";
    RedundancyGroup g;
    g.id = r.text(*groups[i], "id", p);
    unique(g.id, p + ".id");
    const json* members = r.child(*groups[i], "sensors");
    if (members == nullptr || !members->is_array()) {
      r.issue(p + ".sensors", "expected an array of sensor ids");
    } else {
      for (const auto& m : *members) {
        const auto id = m.is_string() ? m.get<std::string>() : std::string();
        if (cfg.find_sensor(id) == nullptr) r.issue(p + ".sensors", "unknown sensor '" + id + "'");
        g.sensors.push_back(id);
      }
      if (g.sensors.size() < 3) r.issue(p + ".sensors", "redundancy needs at least three sensors");
    }
    cfg.redundancy_groups.push_back(std::move(g));
  }

  const auto virtuals = r.items(root, "virtual_sensors");
  for (std::size_t i = 0; i < virtuals.size(); ++i) {
    const std::string p = "virtual_sensors[" + std::to_string(i) + "]";
    VirtualSensorRule rule;
    rule.id = r.text(*virtuals[i], "id", p);
    unique(rule.id, p + ".id");
    const auto text_rule = r.text(*virtuals[i], "rule", p);
    try {
      rule.expr = parse_rule(text_rule);
      for (const auto& ref : referenced_streams(rule.expr)) {
        if (cfg.find_sensor(ref) == nullptr) r.issue(p + ".rule", "unknown stream '" + ref + "'");
      }
    } catch (const Error& e) {
      r.issue(p + ".rule", e.what());
    }
    cfg.virtual_sensors.push_back(std::move(rule));
  }

  if (!r.issues.empty()) throw ValidationFailure(r.issues);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  const auto text = slurp(path);
  return parse_scenario(text, path.parent_path(), path.extension() == ".json");
}

}  // namespace metrotwin
