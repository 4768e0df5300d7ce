#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "metrotwin/scenario.hpp"

using namespace metrotwin;

namespace {

std::vector<std::string> issues_of(const std::string& text) {
  try {
    parse_scenario(text, fixtures::source_dir() / "scenarios");
  } catch (const ValidationFailure& f) {
    return f.issues();
  }
  return {};
}

bool mentions(const std::vector<std::string>& issues, const std::string& needle) {
  for (const auto& i : issues) {
    if (i.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) text.replace(pos, from.size(), to);
  return text;
}

}  // namespace

TEST(Scenario, BundledScenariosLoad) {
  for (const char* name : {"manufacturing_line.toml", "process_swarm.toml"}) {
    const auto cfg = load_scenario(fixtures::source_dir() / "scenarios" / name);
    EXPECT_FALSE(cfg.sensors.empty()) << name;
    EXPECT_FALSE(cfg.redundancy_groups.empty()) << name;
    EXPECT_GT(cfg.seed, 0u);
  }
}

TEST(Scenario, SmallScenarioFields) {
  const auto cfg = parse_scenario(fixtures::small_scenario(), ".");
  EXPECT_EQ(cfg.name, "small");
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.duration, std::chrono::seconds(1800));
  ASSERT_EQ(cfg.sensors.size(), 4u);
  EXPECT_EQ(cfg.sensors[3].model.faults.size(), 1u);
  EXPECT_NEAR(cfg.sensors[0].model.true_value(cfg.start + std::chrono::seconds(150)), 302.0, 1e-9);
  EXPECT_EQ(cfg.find_node("n1")->offset, 0.1);
  EXPECT_EQ(cfg.certificates.at("lab").certificate_id, "LAB-1");
  EXPECT_EQ(cfg.virtual_sensors.size(), 2u);
  EXPECT_EQ(cfg.recalibration.window, cfg.alignment.epoch);
}

TEST(Scenario, JsonFormIsAccepted) {
  const auto text = R"({"scenario": {"name": "j", "start": "2025-01-01T00:00:00Z", "duration_s": 60, "seed": 1}})";
  const auto cfg = parse_scenario(text, ".", true);
  EXPECT_EQ(cfg.name, "j");
  EXPECT_TRUE(cfg.sensors.empty());
}

TEST(Scenario, DanglingCertificateReference) {
  const auto issues = issues_of(replace(fixtures::small_scenario(), "certificate = \"lab\"", "certificate = \"nope\""));
  EXPECT_TRUE(mentions(issues, "sensors[0].certificate")) << issues.size();
  EXPECT_TRUE(mentions(issues, "unknown certificate 'nope'"));
}

TEST(Scenario, FaultAfterTheEnd) {
  const auto issues = issues_of(replace(fixtures::small_scenario(), "start_s = 600", "start_s = 5000"));
  EXPECT_TRUE(mentions(issues, "faults[0].start_s"));
}

TEST(Scenario, SeedIsMandatory) {
  EXPECT_TRUE(mentions(issues_of(replace(fixtures::small_scenario(), "seed = 5", "")), "scenario.seed"));
  EXPECT_TRUE(mentions(issues_of(replace(fixtures::small_scenario(), "seed = 5", "seed = -1")), "scenario.seed"));
}

TEST(Scenario, ReportsEveryIssueWithPaths) {
  auto text = fixtures::small_scenario();
  text = replace(text, "node = \"n2\"", "node = \"n9\"");
  text = replace(text, "noise_sigma = 0.05", "noise_sigma = -1");
  text = replace(text, "sensors = [\"T1\", \"T2\", \"T3\", \"T4\"]", "sensors = [\"T1\", \"T2\"]");
  text = replace(text, "rule = \"fuse(T1, T2, T3, T4)\"", "rule = \"fuse(T1, TX)\"");
  const auto issues = issues_of(text);
  EXPECT_TRUE(mentions(issues, "sensors[2].node"));
  EXPECT_TRUE(mentions(issues, "sensors[0].noise_sigma"));
  EXPECT_TRUE(mentions(issues, "redundancy_groups[0].sensors"));
  EXPECT_TRUE(mentions(issues, "virtual_sensors[0].rule"));
  EXPECT_GE(issues.size(), 4u);
}

TEST(Scenario, DuplicateIdsAndBadNames) {
  auto text = replace(fixtures::small_scenario(), "id = \"T2\"", "id = \"T1\"");
  EXPECT_TRUE(mentions(issues_of(text), "duplicate id 'T1'"));
  text = replace(fixtures::small_scenario(), "id = \"T3\"", "id = \"T 3\"");
  EXPECT_FALSE(issues_of(text).empty());
}

TEST(Scenario, WindowMustMatchEpoch) {
  const auto issues = issues_of(replace(fixtures::small_scenario(), "window_s = 300", "window_s = 600"));
  EXPECT_TRUE(mentions(issues, "recalibration.window_s"));
}

TEST(Scenario, SyntaxErrorsAreParseErrors) {
  try {
    parse_scenario("[scenario\nname = 1", ".");
    FAIL();
  } catch (const ValidationFailure&) {
    FAIL() << "syntax error reported as validation failure";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::parse_error);
  }
  EXPECT_THROW(load_scenario("/nonexistent/scenario.toml"), Error);
}

TEST(Scenario, CertificateFileRelativeToScenario) {
  const auto dir = fixtures::scratch_dir("scenario_relative");
  std::filesystem::create_directories(dir / "certs");
  std::filesystem::copy_file(fixtures::source_dir() / "scenarios/certificates/tt-lab-2024.json",
                             dir / "certs/tt.json");
  auto text = fixtures::small_scenario();
  const auto start = text.find("[[certificates]]");
  const auto end = text.find("[[measurands]]");
  text.replace(start, end - start, "[[certificates]]\nid = \"lab\"\nfile = \"certs/tt.json\"\n\n");
  {
    std::ofstream(dir / "s.toml") << text;
  }
  const auto cfg = load_scenario(dir / "s.toml");
  EXPECT_EQ(cfg.certificates.at("lab").kind, QuantityKind::temperature);
}
