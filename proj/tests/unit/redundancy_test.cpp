#include <gtest/gtest.h>

#include <map>
#include <random>

#include "json.hpp"
#include "metrotwin/error.hpp"
#include "metrotwin/redundancy.hpp"
#include "oracle.hpp"

using namespace metrotwin;

namespace {

Timestamp sec(std::int64_t s) { return from_tai_ns(s * 1'000'000'000); }

Measurement point(const std::string& id, std::int64_t t, double v, double ur, double us) {
  Measurement m;
  m.value = v;
  m.u_random = ur;
  m.u_systematic = us;
  m.unit = units::kelvin();
  m.kind = QuantityKind::temperature;
  m.timestamp = sec(t);
  m.source_id = id;
  return m;
}

CalibrationCertificate unit_cert(const std::string& id) {
  CalibrationCertificate c;
  c.certificate_id = id;
  c.u_gain = 1e-4;
  c.u_offset = 0.02;
  c.u_noise = 0.1;
  c.calibrated_at = sec(0);
  c.valid_until = sec(10'000'000);
  c.unit = units::kelvin();
  c.raw_unit = units::kelvin();
  c.kind = QuantityKind::temperature;
  return c;
}

/// Aligned window for `ids`; truth is a slow ramp, sensor k reads bias[k] high
/// and is calibrated with its twin's certificate when one exists.
NetworkWindow make_window(const std::vector<std::string>& ids, const std::vector<double>& bias, std::int64_t from,
                          std::int64_t len, std::mt19937_64& gen, const std::map<std::string, TwinState>& twins,
                          double noise = 0.1) {
  NetworkWindow w;
  w.from = sec(from);
  w.to = sec(from + len);
  std::normal_distribution<double> z(0, noise);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    SensorWindow s;
    s.sensor_id = ids[k];
    const auto it = twins.find(ids[k]);
    const auto cert = it != twins.end() ? it->second.certificate : unit_cert(ids[k]);
    for (std::int64_t t = from; t < from + len; ++t) {
      const double raw = 300.0 + 0.01 * static_cast<double>(t) + bias[k] + z(gen);
      s.raw.push_back(point(ids[k], t, raw, 0, 0));
      auto m = apply_calibration(raw, cert, sec(t));
      m.source_id = ids[k];
      s.calibrated.push_back(m);
    }
    w.sensors.push_back(std::move(s));
  }
  return w;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io_error;
}

}  // namespace

TEST(Consensus, LeaveOneOut) {
  const std::vector<Measurement> in{point("a", 0, 1, 1, 0), point("b", 0, 2, 1, 0), point("c", 0, 9, 1, 0)};
  EXPECT_DOUBLE_EQ(consensus_estimate(in).value, 4.0);
  const auto loo = consensus_estimate(in, std::string("c"));
  EXPECT_DOUBLE_EQ(loo.value, 1.5);
  EXPECT_EQ(loo.source_id, "consensus-without-c");
  EXPECT_EQ(code_of([&] { consensus_estimate(std::span(in).first(2)); }), Errc::insufficient_redundancy);
}

TEST(DriftScore, NormalisedErrorByHand) {
  std::vector<Measurement> s, c;
  for (int t = 0; t < 16; ++t) {
    s.push_back(point("s", t, 10.5, 0.4, 0.1));
    c.push_back(point("c", t, 10.0, 0.2, 0.05));
  }
  const auto r = drift_score(s, c, sec(0), sec(16), 2.0);
  const double us = std::hypot(0.4 / 4.0, 0.1), uc = std::hypot(0.2 / 4.0, 0.05);
  EXPECT_NEAR(r.normalized_error, 0.5 / std::hypot(us, uc), 1e-12);
  EXPECT_TRUE(r.flagged);
  EXPECT_EQ(r.points, 16u);
  EXPECT_EQ(r.sensor_id, "s");
  EXPECT_EQ(r.consensus_trace, "c");
}

TEST(DriftScore, HalfOpenWindowAndErrors) {
  std::vector<Measurement> s, c;
  for (int t = 0; t < 20; ++t) {
    s.push_back(point("s", t, 1, 0.1, 0));
    c.push_back(point("c", t, 1, 0.1, 0));
  }
  EXPECT_EQ(drift_score(s, c, sec(5), sec(15)).points, 10u);
  EXPECT_EQ(drift_score(s, c, sec(5), sec(15)).normalized_error, 0.0);
  EXPECT_EQ(code_of([&] { drift_score(s, c, sec(5), sec(14)); }), Errc::window_too_small);
  EXPECT_EQ(code_of([&] { drift_score(s, c, sec(5), sec(4)); }), Errc::inverted_range);
}

TEST(DriftScore, HealthyFalseFlagRateMatchesGaussianTail) {
  // One sensor against an independent reference with the same budget; E_n ~ |N(0,1)|.
  std::mt19937_64 gen(90);
  std::normal_distribution<double> z(0, 1);
  int flags = 0;
  const int trials = 4000;
  for (int k = 0; k < trials; ++k) {
    std::vector<Measurement> s, c;
    const double bs = 0.05 * z(gen), bc = 0.05 * z(gen);
    for (int t = 0; t < 25; ++t) {
      s.push_back(point("s", t, bs + 0.2 * z(gen), 0.2, 0.05));
      c.push_back(point("c", t, bc + 0.2 * z(gen), 0.2, 0.05));
    }
    flags += drift_score(s, c, sec(0), sec(25), 2.0).flagged ? 1 : 0;
  }
  const double p = static_cast<double>(flags) / trials;
  EXPECT_NEAR(p, 0.0455, 4 * std::sqrt(0.0455 * 0.9545 / trials));
}

TEST(InfieldRecalibrate, RecoversGainAndOffset) {
  std::vector<Measurement> raw, cons;
  for (int t = 0; t < 100; ++t) {
    const double x = 10.0 + 0.5 * t;
    raw.push_back(point("s", t, x, 0, 0));
    cons.push_back(point("c", t, 1.02 * x - 0.5, 0.1, 0.03));
  }
  RecalibrationOptions opts;
  opts.recalibrated_at = sec(100);
  auto noiseless = unit_cert("old");
  noiseless.u_noise = 0.0;
  const auto r = infield_recalibrate(raw, cons, sec(0), sec(100), noiseless, opts);
  EXPECT_NEAR(r.new_certificate.gain, 1.02, 1e-12);
  EXPECT_NEAR(r.new_certificate.offset, -0.5, 1e-10);
  EXPECT_FALSE(r.new_certificate.offset_only);
  EXPECT_EQ(r.new_certificate.provenance, Provenance::in_field);
  EXPECT_EQ(r.new_certificate.calibrated_at, sec(100));
  EXPECT_EQ(r.n_points, 100u);
  EXPECT_NEAR(r.fit_residual_rms, 0.0, 1e-10);
  EXPECT_GE(r.new_certificate.u_offset, 0.03);
  EXPECT_NO_THROW(validate(r.new_certificate));
}

TEST(InfieldRecalibrate, UncertaintyMatchesReplication) {
  // Noisy raw readings against a noisy consensus: the fitted gain must not be
  // attenuated and the reported uncertainties must match the spread.
  std::mt19937_64 gen(7);
  std::normal_distribution<double> z(0, 0.1);
  std::vector<double> gains, offsets, u_gain, u_offset, covered;
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<Measurement> raw, cons;
    for (int t = 0; t < 200; ++t) {
      const double x = 20.0 + 0.05 * t;
      raw.push_back(point("s", t, x + z(gen), 0, 0));
      cons.push_back(point("c", t, 0.98 * x + 1.0 + z(gen), 0.1, 0.0));
    }
    const auto r = infield_recalibrate(raw, cons, sec(0), sec(200), unit_cert("old"), {});
    ASSERT_FALSE(r.new_certificate.offset_only);
    gains.push_back(r.new_certificate.gain);
    offsets.push_back(r.new_certificate.offset);
    u_gain.push_back(r.new_certificate.u_gain);
    u_offset.push_back(r.new_certificate.u_offset);
  }
  const auto mg = oracle::moments(gains), mo = oracle::moments(offsets);
  EXPECT_NEAR(mg.mean, 0.98, 4 * mg.stddev / std::sqrt(1000.0));
  EXPECT_NEAR(mo.mean, 1.0, 4 * mo.stddev / std::sqrt(1000.0));
  // chi-square scaling only ever widens, so allow the reported u to sit slightly above the spread
  EXPECT_NEAR(oracle::moments(u_gain).mean, mg.stddev, 0.1 * mg.stddev);
  EXPECT_NEAR(oracle::moments(u_offset).mean, mo.stddev, 0.1 * mo.stddev);
}

TEST(InfieldRecalibrate, OffsetOnlyFallback) {
  std::vector<Measurement> raw, cons;
  for (int t = 0; t < 50; ++t) {
    raw.push_back(point("s", t, 300.0 + 0.001 * (t % 3), 0, 0));
    cons.push_back(point("c", t, 299.4, 0.1, 0.02));
  }
  auto cert = unit_cert("old");
  cert.gain = 1.0;
  const auto r = infield_recalibrate(raw, cons, sec(0), sec(50), cert, {});
  EXPECT_TRUE(r.new_certificate.offset_only);
  EXPECT_EQ(r.new_certificate.gain, 1.0);
  EXPECT_NEAR(r.new_certificate.offset, 299.4 - (300.0 + 0.001 * 49.0 / 50.0), 1e-9);
  EXPECT_TRUE(std::isinf(r.condition_number));

  RecalibrationOptions strict;
  strict.allow_offset_only = false;
  EXPECT_EQ(code_of([&] { infield_recalibrate(raw, cons, sec(0), sec(50), cert, strict); }), Errc::rank_deficient);
  EXPECT_EQ(code_of([&] { infield_recalibrate(raw, cons, sec(0), sec(20), cert, {}); }), Errc::insufficient_pairs);
}

TEST(Workflow, FlagsConfirmsAndSwapsOnce) {
  std::mt19937_64 gen(11);
  const std::vector<std::string> ids{"A", "B", "C", "D"};
  std::map<std::string, TwinState> twins;
  for (const auto& id : ids) twins.emplace(id, make_twin(id, unit_cert(id + "-lab")));
  RecalibrationPolicy policy;
  policy.window = std::chrono::seconds(120);
  policy.cooldown = std::chrono::seconds(600);
  policy.fit.min_pairs = 30;
  RecalibrationWorkflow wf(policy);

  std::vector<std::size_t> swaps_per_window;
  for (int k = 0; k < 4; ++k) {
    const auto w = make_window(ids, {0, 0, 0, 1.0}, 120 * k, 120, gen, twins);
    const auto ev = wf.step(w, twins);
    std::size_t swaps = 0;
    for (const auto& e : ev) {
      if (e.kind == WorkflowEvent::Kind::drift_report) {
        EXPECT_EQ(e.report->flagged, e.sensor_id == "D" && k < 2) << e.sensor_id << " window " << k;
      }
      if (e.kind == WorkflowEvent::Kind::certificate_swap) {
        ++swaps;
        EXPECT_EQ(e.sensor_id, "D");
        EXPECT_EQ(e.old_certificate_id, "D-lab");
        EXPECT_EQ(e.new_certificate_id, "D-infield-1");
      }
      EXPECT_FALSE(nlohmann::json::parse(audit_json_line(e)).is_discarded());
    }
    swaps_per_window.push_back(swaps);
  }
  EXPECT_EQ(swaps_per_window, (std::vector<std::size_t>{0, 1, 0, 0}));
  // the gain is weakly determined over a 1.2 K span, so judge the corrected reading at the operating point
  const auto& fixed = twins.at("D").certificate;
  EXPECT_NEAR(fixed.gain * 304.0 + fixed.offset, 303.0, 0.1);
}

TEST(Workflow, HealthyNetworkNeverSwaps) {
  std::mt19937_64 gen(12);
  const std::vector<std::string> ids{"A", "B", "C", "D", "E"};
  std::map<std::string, TwinState> twins;
  for (const auto& id : ids) twins.emplace(id, make_twin(id, unit_cert(id + "-lab")));
  RecalibrationWorkflow wf(RecalibrationPolicy{}, 2);
  for (int k = 0; k < 20; ++k) {
    for (const auto& e : wf.step(make_window(ids, {0, 0, 0, 0, 0}, 300 * k, 300, gen, twins), twins)) {
      EXPECT_NE(e.kind, WorkflowEvent::Kind::certificate_swap);
      EXPECT_NE(e.kind, WorkflowEvent::Kind::error) << e.message;
    }
  }
}

TEST(Workflow, TwoSensorsReportErrors) {
  std::mt19937_64 gen(13);
  std::map<std::string, TwinState> twins;
  RecalibrationWorkflow wf(RecalibrationPolicy{});
  const auto ev = wf.step(make_window({"A", "B"}, {0, 0}, 0, 60, gen, twins), twins);
  EXPECT_TRUE(ev.empty());
}
