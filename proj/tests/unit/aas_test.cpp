#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "metrotwin/aas.hpp"
#include "metrotwin/error.hpp"
#include "metrotwin/simulation.hpp"

using namespace metrotwin;

namespace {

CalibrationCertificate cert() {
  CalibrationCertificate c;
  c.certificate_id = "C-1";
  c.u_gain = 1e-4;
  c.u_offset = 0.02;
  c.u_noise = 0.05;
  c.calibrated_at = from_tai_ns(0);
  c.valid_until = from_tai_ns(1'000'000'000'000LL);
  c.unit = units::kelvin();
  c.raw_unit = units::kelvin();
  c.kind = QuantityKind::temperature;
  return c;
}

Timestamp sec(std::int64_t s) { return from_tai_ns(s * 1'000'000'000); }

TwinState twin_with(std::size_t n) {
  auto t = make_twin("TT-9", cert());
  for (std::size_t i = 1; i <= n; ++i) t = twin_ingest(std::move(t), 300.0 + static_cast<double>(i), sec(i), 1e-6);
  return t;
}

}  // namespace

TEST(Aas, PhysicalSubmodelRoundTrip) {
  const auto sm = export_submodel(twin_with(20), "streams/TT-9.csv", sec(5), sec(10));
  EXPECT_EQ(sm.provenance, "physical");
  EXPECT_EQ(sm.find("SampleCount")->number, 6.0);
  EXPECT_EQ(sm.find("LatestValue")->number, 310.0);
  EXPECT_EQ(sm.find("LatestValue")->unit, "K");
  EXPECT_GT(sm.find("LatestValue")->u_systematic, 0.0);
  EXPECT_EQ(sm.find("LatestTimestampUncertainty")->number, 1e-6);
  EXPECT_EQ(sm.find("CertificateId")->text, "C-1");
  const auto back = submodel_from_json(submodel_to_json(sm));
  EXPECT_EQ(back, sm);
}

TEST(Aas, SingleSampleSeries) {
  const auto sm = export_submodel(twin_with(1), "s.csv", sec(1), sec(1));
  EXPECT_EQ(sm.find("SampleCount")->number, 1.0);
  EXPECT_EQ(submodel_from_json(submodel_to_json(sm)), sm);
}

TEST(Aas, EmptyRangeHasNoLatestValue) {
  const auto sm = export_submodel(twin_with(3), "s.csv", sec(50), sec(60));
  EXPECT_EQ(sm.find("SampleCount")->number, 0.0);
  EXPECT_EQ(sm.find("LatestValue"), nullptr);
  EXPECT_THROW(export_submodel(twin_with(3), "s.csv", sec(60), sec(50)), Error);
}

TEST(Aas, VirtualProvenanceCarriesRule) {
  const VirtualSensorRule rule{"v-mean", parse_rule("fuse(a, b)")};
  std::vector<Measurement> stream(3);
  for (int i = 0; i < 3; ++i) {
    stream[i].value = i;
    stream[i].u_random = 0.1;
    stream[i].unit = units::kelvin();
    stream[i].kind = QuantityKind::temperature;
    stream[i].timestamp = sec(i);
    stream[i].source_id = "v-mean";
  }
  const auto sm = export_submodel(rule, stream, "virtual/v-mean.csv", sec(0), sec(2));
  EXPECT_EQ(sm.provenance, "virtual");
  EXPECT_EQ(sm.find("Rule")->text, "fuse(a, b)");
  EXPECT_EQ(sm.find("CertificateId"), nullptr);
  EXPECT_EQ(submodel_from_json(submodel_to_json(sm)), sm);
}

TEST(Aas, ValidationAndParsing) {
  Submodel sm;
  sm.elements.push_back({"A", "urn:a", SubmodelElement::Type::number, 1.0, "", "m"});
  EXPECT_NO_THROW(validate(sm));
  sm.elements.push_back(sm.elements.front());
  EXPECT_THROW(validate(sm), Error);
  sm.elements.pop_back();
  sm.elements.front().unit.clear();
  EXPECT_THROW(validate(sm), Error);
  EXPECT_THROW(submodel_from_json("{}"), Error);
  EXPECT_THROW(submodel_from_json(R"({"schema_version":"other/9"})"), Error);
}

TEST(Aas, ExportFromRunDirectory) {
  RunOptions opt;
  opt.out_dir = fixtures::scratch_dir("aas_run");
  run_scenario(parse_scenario(fixtures::small_scenario(600), "."), opt);
  const auto phys = export_from_run(opt.out_dir, "T1");
  EXPECT_EQ(phys.provenance, "physical");
  EXPECT_EQ(phys.find("SampleCount")->number, 601.0);
  EXPECT_EQ(submodel_from_json(submodel_to_json(phys)), phys);
  const auto virt = export_from_run(opt.out_dir, "bath-mean");
  EXPECT_EQ(virt.provenance, "virtual");
  EXPECT_EQ(virt.find("Rule")->text, "fuse(T1, T2, T3, T4)");
  try {
    export_from_run(opt.out_dir, "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_stream);
  }
}
