#include "metrotwin/calibration.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "metrotwin/error.hpp"
#include "metrotwin/propagation.hpp"

namespace metrotwin {

using nlohmann::ordered_json;

std::string_view to_string(Provenance p) noexcept { return p == Provenance::laboratory ? "laboratory" : "in_field"; }

void validate(const CalibrationCertificate& c) {
  auto fail = [&](const std::string& what) {
    throw Error(Errc::validation_error, "certificate " + c.certificate_id + ": " + what);
  };
  for (double v : {c.gain, c.u_gain, c.offset, c.u_offset, c.cov_gain_offset, c.u_noise, c.drift_rate, c.u_drift}) {
    if (!std::isfinite(v)) fail("non-finite field");
  }
  if (c.u_gain < 0 || c.u_offset < 0 || c.u_noise < 0 || c.u_drift < 0) fail("negative uncertainty");
  if (std::abs(c.cov_gain_offset) > c.u_gain * c.u_offset * (1.0 + 1e-12)) fail("|cov_gain_offset| > u_gain * u_offset");
  if (c.valid_until <= c.calibrated_at) fail("valid_until must be after calibrated_at");
  if (c.model_degree != 1) fail("only model_degree 1 is supported");
  if (c.unit.exponents() != canonical_dimension(c.kind)) fail("unit does not match quantity kind");
}

bool certificate_expired(const CalibrationCertificate& cert, Timestamp t) noexcept { return t > cert.valid_until; }

Measurement apply_calibration(double raw, const CalibrationCertificate& cert, Timestamp t) {
  if (!std::isfinite(raw)) throw Error(Errc::non_finite_raw, "raw reading for " + cert.certificate_id);
  const double dt = seconds_between(cert.calibrated_at, t);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov(0, 0) = cert.u_gain * cert.u_gain;
  cov(1, 1) = cert.u_offset * cert.u_offset;
  cov(0, 1) = cov(1, 0) = cert.cov_gain_offset;
  cov(2, 2) = cert.u_drift * cert.u_drift;
  const Unit per_second = units::second().pow(-1);
  UncertainVector inputs(Eigen::Vector3d(cert.gain, cert.offset, 0.0), cov,
                         {cert.unit / cert.raw_unit, cert.unit, cert.unit * per_second}, {true, true, true});
  const double c[] = {raw, 1.0, dt};
  const Unit cu[] = {cert.raw_unit, Unit::dimensionless(), units::second()};

  Measurement m = combine_linear(c, inputs, cert.unit, cu);
  m.u_random = cert.u_noise;
  m.kind = cert.kind;
  m.timestamp = t;
  return m;
}

namespace {

Timestamp read_time(const ordered_json& j, const char* key) {
  const auto text = j.at(key).get<std::string>();
  auto t = parse_rfc3339(text);
  if (!t) throw Error(Errc::parse_error, std::string(key) + ": not an RFC 3339 timestamp: " + text);
  return *t;
}

Unit read_unit(const ordered_json& j, const char* key) {
  const auto text = j.at(key).get<std::string>();
  auto u = parse_unit(text);
  if (!u) throw Error(Errc::parse_error, std::string(key) + ": unknown unit " + text);
  return *u;
}

}  // namespace

std::string certificate_to_json(const CalibrationCertificate& c) {
  ordered_json j;
  j["certificate_id"] = c.certificate_id;
  j["provenance"] = to_string(c.provenance);
  j["model_degree"] = c.model_degree;
  j["gain"] = c.gain;
  j["u_gain"] = c.u_gain;
  j["offset"] = c.offset;
  j["u_offset"] = c.u_offset;
  j["cov_gain_offset"] = c.cov_gain_offset;
  j["u_noise"] = c.u_noise;
  j["drift_rate"] = c.drift_rate;
  j["u_drift"] = c.u_drift;
  j["calibrated_at"] = format_rfc3339_utc(c.calibrated_at);
  j["valid_until"] = format_rfc3339_utc(c.valid_until);
  j["unit"] = c.unit.symbol();
  j["raw_unit"] = c.raw_unit.symbol();
  j["quantity_kind"] = to_string(c.kind);
  j["offset_only"] = c.offset_only;
  return j.dump(2);
}

CalibrationCertificate certificate_from_json(std::string_view text) {
  CalibrationCertificate c;
  try {
    const auto j = ordered_json::parse(text);
    c.certificate_id = j.at("certificate_id").get<std::string>();
    const auto prov = j.value("provenance", std::string("laboratory"));
    if (prov == "laboratory") {
      c.provenance = Provenance::laboratory;
    } else if (prov == "in_field") {
      c.provenance = Provenance::in_field;
    } else {
      throw Error(Errc::parse_error, "unknown provenance " + prov);
    }
    c.model_degree = j.value("model_degree", 1);
    c.gain = j.at("gain").get<double>();
    c.u_gain = j.at("u_gain").get<double>();
    c.offset = j.at("offset").get<double>();
    c.u_offset = j.at("u_offset").get<double>();
    c.cov_gain_offset = j.value("cov_gain_offset", 0.0);
    c.u_noise = j.at("u_noise").get<double>();
    c.drift_rate = j.value("drift_rate", 0.0);
    c.u_drift = j.value("u_drift", 0.0);
    c.calibrated_at = read_time(j, "calibrated_at");
    c.valid_until = read_time(j, "valid_until");
    c.unit = read_unit(j, "unit");
    c.raw_unit = j.contains("raw_unit") ? read_unit(j, "raw_unit") : c.unit;
    const auto kind_text = j.at("quantity_kind").get<std::string>();
    const auto kind = parse_quantity_kind(kind_text);
    if (!kind) throw Error(Errc::parse_error, "unknown quantity_kind " + kind_text);
    c.kind = *kind;
    c.offset_only = j.value("offset_only", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("certificate: ") + e.what());
  }
  validate(c);
  return c;
}

CalibrationCertificate load_certificate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return certificate_from_json(ss.str());
}

}  // namespace metrotwin
