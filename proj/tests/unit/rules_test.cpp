#include <gtest/gtest.h>

#include "metrotwin/error.hpp"
#include "metrotwin/rules.hpp"

using namespace metrotwin;

namespace {

Timestamp sec(std::int64_t s) { return from_tai_ns(s * 1'000'000'000); }

std::vector<Measurement> ramp(const std::string& id, double start, double step, std::size_t n, double ur = 0.1,
                              Unit unit = units::kelvin(), QuantityKind kind = QuantityKind::temperature) {
  std::vector<Measurement> out;
  for (std::size_t i = 0; i < n; ++i) {
    Measurement m;
    m.value = start + step * static_cast<double>(i);
    m.u_random = ur;
    m.u_systematic = 0.05;
    m.unit = unit;
    m.kind = kind;
    m.timestamp = sec(static_cast<std::int64_t>(i));
    m.source_id = id;
    out.push_back(m);
  }
  return out;
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

TEST(RuleParse, Grammar) {
  const auto r = parse_rule("label(350, window_average(10s, fuse(TT-101, fir([0.25,0.5,0.25], TT-102))))");
  EXPECT_EQ(r.kind, RuleExpr::Kind::label);
  EXPECT_EQ(r.threshold, 350.0);
  const auto& wa = r.args.at(0);
  EXPECT_EQ(wa.kind, RuleExpr::Kind::window_average);
  EXPECT_EQ(wa.window, std::chrono::seconds(10));
  const auto& fu = wa.args.at(0);
  ASSERT_EQ(fu.args.size(), 2u);
  EXPECT_EQ(fu.args[1].coefficients, (std::vector<double>{0.25, 0.5, 0.25}));
  EXPECT_EQ(referenced_streams(r), (std::vector<std::string>{"TT-101", "TT-102"}));
}

TEST(RuleParse, DescribeRoundTrips) {
  for (const char* text : {"TT-1", "fuse(a, b, c)", "fir([0.5, 0.5], a)", "window_average(500ms, a)",
                           "window_average(5min, a)", "label(-2.5, fuse(a, window_average(1h, b)))"}) {
    const auto r = parse_rule(text);
    EXPECT_EQ(describe(parse_rule(describe(r))), describe(r)) << text;
  }
  EXPECT_EQ(describe(parse_rule("window_average(5min,a)")), "window_average(300s, a)");
}

TEST(RuleParse, SyntaxErrors) {
  for (const char* text : {"", "fuse(", "fuse(a,)", "fir(0.5, a)", "fir([0.5], a", "window_average(10, a)",
                           "window_average(0s, a)", "window_average(3 parsecs, a)", "label(x, a)", "median(a, b)",
                           "a b", "fuse(a))"}) {
    EXPECT_EQ(code_of([&] { parse_rule(text); }), Errc::rule_syntax) << text;
  }
}

TEST(RuleEval, FuseOfStreams) {
  StreamMap aligned{{"a", ramp("a", 10, 0, 5)}, {"b", ramp("b", 12, 0, 5)}};
  const auto out = run_virtual_sensor_rule({"v", parse_rule("fuse(a, b)")}, aligned);
  ASSERT_EQ(out.size(), 5u);
  EXPECT_DOUBLE_EQ(out[0].value, 11.0);
  EXPECT_EQ(out[0].source_id, "v");
}

TEST(RuleEval, FuseOnlyAtCommonTimestamps) {
  auto b = ramp("b", 1, 0, 5);
  b.erase(b.begin() + 2);
  StreamMap aligned{{"a", ramp("a", 1, 0, 5)}, {"b", b}};
  EXPECT_EQ(run_virtual_sensor_rule({"v", parse_rule("fuse(a, b)")}, aligned).size(), 4u);
}

TEST(RuleEval, NestedSubexpressionsAreFusable) {
  StreamMap aligned{{"a", ramp("a", 1, 1, 10)}};
  const auto out = run_virtual_sensor_rule({"v", parse_rule("fuse(fir([0.5, 0.5], a), fir([1], a))")}, aligned);
  ASSERT_EQ(out.size(), 9u);
  EXPECT_EQ(out[0].timestamp, sec(1));
}

TEST(RuleEval, WindowAverageAndLabel) {
  StreamMap aligned{{"a", ramp("a", 0, 1, 10)}};
  const auto avg = run_virtual_sensor_rule({"v", parse_rule("window_average(5s, a)")}, aligned);
  ASSERT_EQ(avg.size(), 2u);
  EXPECT_DOUBLE_EQ(avg[0].value, 2.0);
  EXPECT_EQ(avg[0].source_id, "v");

  const auto lab = run_virtual_sensor_rule({"hot", parse_rule("label(4.5, a)")}, aligned);
  ASSERT_EQ(lab.size(), 10u);
  EXPECT_EQ(lab[4].value, 0.0);
  EXPECT_EQ(lab[5].value, 1.0);
  EXPECT_EQ(lab[5].kind, QuantityKind::label);
  EXPECT_GT(lab[5].u_random, lab[9].u_random);
  EXPECT_LE(lab[5].u_random, 0.5);
}

TEST(RuleEval, Errors) {
  StreamMap aligned{{"a", ramp("a", 0, 1, 10)},
                    {"p", ramp("p", 1e5, 0, 10, 10.0, units::pascal(), QuantityKind::pressure)}};
  EXPECT_EQ(code_of([&] { run_virtual_sensor_rule({"v", parse_rule("fuse(a, zz)")}, aligned); }),
            Errc::unknown_stream_ref);
  EXPECT_EQ(code_of([&] { run_virtual_sensor_rule({"v", parse_rule("fuse(a, p)")}, aligned); }),
            Errc::dimension_mismatch);
}
