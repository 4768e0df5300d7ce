#include "metrotwin/aas.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "metrotwin/error.hpp"
#include "metrotwin/stream_csv.hpp"

namespace metrotwin {

using json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kSemanticPrefix = "urn:metrotwin:measurement:";

std::string_view type_name(SubmodelElement::Type t) {
  switch (t) {
    case SubmodelElement::Type::number: return "number";
    case SubmodelElement::Type::text: return "text";
    case SubmodelElement::Type::timestamp: return "timestamp";
    case SubmodelElement::Type::series: return "series";
  }
  return "text";
}

SubmodelElement::Type parse_type(const std::string& s) {
  if (s == "number") return SubmodelElement::Type::number;
  if (s == "text") return SubmodelElement::Type::text;
  if (s == "timestamp") return SubmodelElement::Type::timestamp;
  if (s == "series") return SubmodelElement::Type::series;
  throw Error(Errc::parse_error, "unknown element type '" + s + "'");
}

SubmodelElement text_element(std::string id, std::string value) {
  SubmodelElement e;
  e.semantic_id = std::string(kSemanticPrefix) + id;
  e.id_short = std::move(id);
  e.type = SubmodelElement::Type::text;
  e.text = std::move(value);
  return e;
}

SubmodelElement time_element(std::string id, Timestamp t) {
  auto e = text_element(std::move(id), format_rfc3339_utc(t));
  e.type = SubmodelElement::Type::timestamp;
  return e;
}

SubmodelElement number_element(std::string id, double v, std::string unit, double u_r = 0.0, double u_s = 0.0) {
  SubmodelElement e;
  e.semantic_id = std::string(kSemanticPrefix) + id;
  e.id_short = std::move(id);
  e.type = SubmodelElement::Type::number;
  e.number = v;
  e.unit = std::move(unit);
  e.u_random = u_r;
  e.u_systematic = u_s;
  return e;
}

struct StreamSlice {
  const Measurement* latest = nullptr;
  std::size_t count = 0;
};

StreamSlice slice(std::span<const Measurement> stream, Timestamp from, Timestamp to) {
  if (to < from) throw Error(Errc::inverted_range, "export range ends before it starts");
  StreamSlice s;
  for (const auto& m : stream) {
    if (m.timestamp < from || m.timestamp > to) continue;
    ++s.count;
    if (s.latest == nullptr || m.timestamp >= s.latest->timestamp) s.latest = &m;
  }
  return s;
}

void add_series(Submodel& sm, std::span<const Measurement> stream, const std::string& stream_ref, Timestamp from,
                Timestamp to) {
  const auto s = slice(stream, from, to);
  auto series = text_element("Series", stream_ref);
  series.type = SubmodelElement::Type::series;
  sm.elements.push_back(series);
  sm.elements.push_back(time_element("SeriesFrom", from));
  sm.elements.push_back(time_element("SeriesTo", to));
  sm.elements.push_back(number_element("SampleCount", static_cast<double>(s.count), "1"));
  if (s.latest != nullptr) {
    const auto& m = *s.latest;
    sm.elements.push_back(text_element("QuantityKind", std::string(to_string(m.kind))));
    sm.elements.push_back(number_element("LatestValue", m.value, m.unit.symbol(), m.u_random, m.u_systematic));
    sm.elements.push_back(number_element("LatestCombinedUncertainty", m.combined_uncertainty(), m.unit.symbol()));
    sm.elements.push_back(time_element("LatestTimestamp", m.timestamp));
    sm.elements.push_back(number_element("LatestTimestampUncertainty", m.u_timestamp, "s"));
  }
}

Submodel physical_submodel(const std::string& id, const CalibrationCertificate& cert,
                           std::span<const Measurement> stream, const std::string& stream_ref, Timestamp from,
                           Timestamp to) {
  Submodel sm;
  sm.asset_id = "urn:metrotwin:asset:" + id;
  sm.submodel_id = "urn:metrotwin:submodel:measurement:" + id;
  sm.provenance = "physical";
  sm.elements.push_back(text_element("SensorId", id));
  sm.elements.push_back(text_element("CertificateId", cert.certificate_id));
  sm.elements.push_back(text_element("CertificateProvenance", std::string(to_string(cert.provenance))));
  sm.elements.push_back(time_element("CalibratedAt", cert.calibrated_at));
  sm.elements.push_back(time_element("ValidUntil", cert.valid_until));
  sm.elements.push_back(number_element("Gain", cert.gain, (cert.unit / cert.raw_unit).symbol(), cert.u_gain));
  sm.elements.push_back(number_element("Offset", cert.offset, cert.unit.symbol(), cert.u_offset));
  sm.elements.push_back(number_element("Noise", cert.u_noise, cert.unit.symbol()));
  sm.elements.push_back(text_element("OffsetOnly", cert.offset_only ? "true" : "false"));
  add_series(sm, stream, stream_ref, from, to);
  validate(sm);
  return sm;
}

Submodel virtual_submodel(const std::string& id, const std::string& rule_text, std::span<const Measurement> stream,
                          const std::string& stream_ref, Timestamp from, Timestamp to) {
  Submodel sm;
  sm.asset_id = "urn:metrotwin:asset:" + id;
  sm.submodel_id = "urn:metrotwin:submodel:measurement:" + id;
  sm.provenance = "virtual";
  sm.elements.push_back(text_element("SensorId", id));
  sm.elements.push_back(text_element("Rule", rule_text));
  add_series(sm, stream, stream_ref, from, to);
  validate(sm);
  return sm;
}

std::pair<Timestamp, Timestamp> full_range(std::span<const Measurement> stream, std::optional<Timestamp> from,
                                           std::optional<Timestamp> to) {
  Timestamp lo{}, hi{};
  if (!stream.empty()) {
    lo = stream.front().timestamp;
    hi = stream.back().timestamp;
  }
  return {from.value_or(lo), to.value_or(hi)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const SubmodelElement* Submodel::find(std::string_view id_short) const {
  for (const auto& e : elements) {
    if (e.id_short == id_short) return &e;
  }
  return nullptr;
}

void validate(const Submodel& sm) {
  std::set<std::string> seen;
  for (const auto& e : sm.elements) {
    if (e.id_short.empty()) throw Error(Errc::validation_error, "element without idShort");
    if (!seen.insert(e.id_short).second) throw Error(Errc::validation_error, "duplicate idShort " + e.id_short);
    if (e.type == SubmodelElement::Type::number && e.unit.empty()) {
      throw Error(Errc::validation_error, "numeric element " + e.id_short + " has no unit");
    }
  }
}

std::string submodel_to_json(const Submodel& sm) {
  validate(sm);
  json j;
  j["schema_version"] = sm.schema_version;
  j["asset_id"] = sm.asset_id;
  j["submodel_id"] = sm.submodel_id;
  j["provenance"] = sm.provenance;
  json elements = json::array();
  for (const auto& e : sm.elements) {
    json el;
    el["idShort"] = e.id_short;
    el["semanticId"] = e.semantic_id;
    el["valueType"] = type_name(e.type);
    if (e.type == SubmodelElement::Type::number) {
      el["value"] = e.number;
      el["unit"] = e.unit;
      el["u_random"] = e.u_random;
      el["u_systematic"] = e.u_systematic;
    } else {
      el["value"] = e.text;
    }
    elements.push_back(std::move(el));
  }
  j["elements"] = std::move(elements);
  return j.dump(2);
}

Submodel submodel_from_json(std::string_view text) {
  Submodel sm;
  try {
    const auto j = json::parse(text);
    sm.schema_version = j.at("schema_version").get<std::string>();
    if (sm.schema_version != kSubmodelSchema) {
      throw Error(Errc::parse_error, "unsupported submodel schema '" + sm.schema_version + "'");
    }
    sm.asset_id = j.at("asset_id").get<std::string>();
    sm.submodel_id = j.at("submodel_id").get<std::string>();
    sm.provenance = j.at("provenance").get<std::string>();
    for (const auto& el : j.at("elements")) {
      SubmodelElement e;
      e.id_short = el.at("idShort").get<std::string>();
      e.semantic_id = el.at("semanticId").get<std::string>();
      e.type = parse_type(el.at("valueType").get<std::string>());
      if (e.type == SubmodelElement::Type::number) {
        e.number = el.at("value").get<double>();
        e.unit = el.at("unit").get<std::string>();
        e.u_random = el.at("u_random").get<double>();
        e.u_systematic = el.at("u_systematic").get<double>();
      } else {
        e.text = el.at("value").get<std::string>();
      }
      sm.elements.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse_error, std::string("submodel: ") + e.what());
  }
  validate(sm);
  return sm;
}

Submodel export_submodel(const TwinState& twin, const std::string& stream_ref, Timestamp from, Timestamp to) {
  const std::vector<Measurement> buffer(twin.buffer.begin(), twin.buffer.end());
  return physical_submodel(twin.sensor_id, twin.certificate, buffer, stream_ref, from, to);
}

Submodel export_submodel(const VirtualSensorRule& rule, std::span<const Measurement> stream,
                         const std::string& stream_ref, Timestamp from, Timestamp to) {
  return virtual_submodel(rule.id, describe(rule.expr), stream, stream_ref, from, to);
}

Submodel export_from_run(const std::filesystem::path& run_dir, const std::string& stream_id,
                         std::optional<Timestamp> from, std::optional<Timestamp> to) {
  namespace fs = std::filesystem;
  const auto physical = fs::path("streams") / (stream_id + ".csv");
  const auto virt = fs::path("virtual") / (stream_id + ".csv");
  if (fs::exists(run_dir / physical)) {
    const auto stream = read_stream_csv(run_dir / physical);
    const auto cert = load_certificate(run_dir / "certificates" / (stream_id + ".json"));
    const auto [lo, hi] = full_range(stream, from, to);
    return physical_submodel(stream_id, cert, stream, physical.generic_string(), lo, hi);
  }
  if (fs::exists(run_dir / virt)) {
    const auto stream = read_stream_csv(run_dir / virt);
    std::string rule_text;
    const auto rules_path = run_dir / "virtual_sensors.json";
    if (fs::exists(rules_path)) {
      try {
        for (const auto& r : json::parse(slurp(rules_path))) {
          if (r.at("id").get<std::string>() == stream_id) rule_text = r.at("rule").get<std::string>();
        }
      } catch (const json::exception& e) {
        throw Error(Errc::parse_error, std::string("virtual_sensors.json: ") + e.what());
      }
    }
    const auto [lo, hi] = full_range(stream, from, to);
    return virtual_submodel(stream_id, rule_text, stream, virt.generic_string(), lo, hi);
  }
  throw Error(Errc::unknown_stream, "no stream '" + stream_id + "' in " + run_dir.string());
}

}  // namespace metrotwin
