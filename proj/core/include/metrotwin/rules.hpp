#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "metrotwin/collector.hpp"

namespace metrotwin {

/// A virtual-sensor rule as an expression tree. Grammar:
///
///     expr := NAME
///           | fuse(expr, expr, ...)
///           | fir([b0, b1, ...], expr)
///           | window_average(DURATION, expr)      DURATION: 500ms, 10s, 5min, 1h
///           | label(THRESHOLD, expr)
struct RuleExpr {
  enum class Kind { stream, fuse, fir, window_average, label };

  Kind kind = Kind::stream;
  std::string stream;
  std::vector<RuleExpr> args;
  std::vector<double> coefficients;
  Duration window{};
  double threshold = 0.0;
};

RuleExpr parse_rule(std::string_view text);
/// Canonical text of the rule; parse_rule(describe(r)) reproduces r.
std::string describe(const RuleExpr& rule);
std::vector<std::string> referenced_streams(const RuleExpr& rule);

struct VirtualSensorRule {
  std::string id;
  RuleExpr expr;
};

/// Evaluates the rule over aligned streams. Every output sample carries the
/// rule id as source_id. `fuse` combines samples at timestamps present in all
/// of its inputs; `label` emits 0/1 with u_random = sqrt(p_wrong (1 - p_wrong)).
std::vector<Measurement> run_virtual_sensor_rule(const VirtualSensorRule& rule, const StreamMap& aligned);

}  // namespace metrotwin
