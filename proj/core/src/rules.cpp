#include "metrotwin/rules.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "metrotwin/error.hpp"
#include "metrotwin/fusion.hpp"
#include "metrotwin/stream_csv.hpp"

namespace metrotwin {

namespace {

class RuleParser {
 public:
  explicit RuleParser(std::string_view text) : text_(text) {}

  RuleExpr parse() {
    RuleExpr e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::rule_syntax, what + " at offset " + std::to_string(pos_) + " in '" + std::string(text_) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.' || c == '+';
  }

  std::string_view word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && word_char(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected a name or number");
    return text_.substr(start, pos_ - start);
  }

  double number() {
    const auto w = word();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size()) fail("bad number '" + std::string(w) + "'");
    return v;
  }

  Duration duration() {
    const auto w = word();
    std::size_t split = 0;
    while (split < w.size() && (std::isdigit(static_cast<unsigned char>(w[split])) != 0 || w[split] == '.')) ++split;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + split, v);
    if (split == 0 || ec != std::errc{} || ptr != w.data() + split) fail("bad duration '" + std::string(w) + "'");
    const auto unit = w.substr(split);
    double scale = 0.0;
    if (unit == "ns") scale = 1e-9;
    else if (unit == "us") scale = 1e-6;
    else if (unit == "ms") scale = 1e-3;
    else if (unit == "s") scale = 1.0;
    else if (unit == "min") scale = 60.0;
    else if (unit == "h") scale = 3600.0;
    else fail("unknown duration unit '" + std::string(unit) + "'");
    const Duration d = seconds_to_duration(v * scale);
    if (d <= Duration::zero()) fail("duration must be positive");
    return d;
  }

  RuleExpr expr() {
    const std::string name(word());
    RuleExpr e;
    if (!accept('(')) {
      e.kind = RuleExpr::Kind::stream;
      e.stream = name;
      return e;
    }
    if (name == "fuse") {
      e.kind = RuleExpr::Kind::fuse;
      do {
        e.args.push_back(expr());
      } while (accept(','));
    } else if (name == "fir") {
      e.kind = RuleExpr::Kind::fir;
      expect('[');
      do {
        e.coefficients.push_back(number());
      } while (accept(','));
      expect(']');
      expect(',');
      e.args.push_back(expr());
    } else if (name == "window_average") {
      e.kind = RuleExpr::Kind::window_average;
      e.window = duration();
      expect(',');
      e.args.push_back(expr());
    } else if (name == "label") {
      e.kind = RuleExpr::Kind::label;
      e.threshold = number();
      expect(',');
      e.args.push_back(expr());
    } else {
      fail("unknown operator '" + name + "'");
    }
    expect(')');
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string describe_duration(Duration d) {
  const auto ns = d.count();
  if (ns % 1'000'000'000 == 0) return std::to_string(ns / 1'000'000'000) + "s";
  if (ns % 1'000'000 == 0) return std::to_string(ns / 1'000'000) + "ms";
  if (ns % 1'000 == 0) return std::to_string(ns / 1'000) + "us";
  return std::to_string(ns) + "ns";
}

void collect_refs(const RuleExpr& e, std::vector<std::string>& out) {
  if (e.kind == RuleExpr::Kind::stream) {
    out.push_back(e.stream);
    return;
  }
  for (const auto& a : e.args) collect_refs(a, out);
}

std::vector<Measurement> relabel(std::vector<Measurement> s, const std::string& id) {
  for (auto& m : s) m.source_id = id;
  return s;
}

std::vector<Measurement> evaluate(const RuleExpr& e, const std::string& id, const StreamMap& aligned) {
  switch (e.kind) {
    case RuleExpr::Kind::stream: {
      auto it = aligned.find(e.stream);
      if (it == aligned.end()) throw Error(Errc::unknown_stream_ref, "rule " + id + " references unknown stream " + e.stream);
      return it->second;
    }
    case RuleExpr::Kind::fuse: {
      std::vector<std::vector<Measurement>> inputs;
      // nested sub-expressions need distinct source ids to be fusable
      for (std::size_t k = 0; k < e.args.size(); ++k) {
        inputs.push_back(evaluate(e.args[k], id + "." + std::to_string(k), aligned));
      }
      const Measurement* proto = nullptr;
      for (const auto& s : inputs) {
        if (s.empty()) continue;
        if (proto == nullptr) proto = &s.front();
        if (!check_dimensions(proto->unit, s.front().unit)) {
          throw Error(Errc::dimension_mismatch, "rule " + id + " fuses " + proto->unit.symbol() + " with " +
                                                    s.front().unit.symbol());
        }
      }
      std::vector<std::unordered_map<std::int64_t, std::size_t>> index(inputs.size());
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        for (std::size_t i = 0; i < inputs[k].size(); ++i) index[k][tai_ns(inputs[k][i].timestamp)] = i;
      }
      std::vector<Measurement> out;
      std::vector<Measurement> at;
      for (const auto& m : inputs.front()) {
        at.clear();
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          auto hit = index[k].find(tai_ns(m.timestamp));
          if (hit == index[k].end()) break;
          at.push_back(inputs[k][hit->second]);
        }
        if (at.size() != inputs.size()) continue;
        auto fused = virtual_sensor_fuse(at, id).measurement;
        fused.source_id = id;
        out.push_back(std::move(fused));
      }
      return out;
    }
    case RuleExpr::Kind::fir:
      return relabel(fir_low_pass(evaluate(e.args.front(), id, aligned), FirFilter(e.coefficients)), id);
    case RuleExpr::Kind::window_average:
      return relabel(window_average(relabel(evaluate(e.args.front(), id, aligned), id), e.window).averages, id);
    case RuleExpr::Kind::label: {
      auto in = evaluate(e.args.front(), id, aligned);
      std::vector<Measurement> out;
      out.reserve(in.size());
      for (const auto& m : in) {
        const auto lv = label_with_uncertainty(m, e.threshold);
        Measurement l;
        l.value = lv.label == Label::above ? 1.0 : 0.0;
        l.u_random = std::sqrt(lv.p_wrong * (1.0 - lv.p_wrong));
        l.unit = Unit::dimensionless();
        l.kind = QuantityKind::label;
        l.timestamp = m.timestamp;
        l.u_timestamp = m.u_timestamp;
        l.source_id = id;
        out.push_back(std::move(l));
      }
      return out;
    }
  }
  return {};
}

}  // namespace

RuleExpr parse_rule(std::string_view text) { return RuleParser(text).parse(); }

std::string describe(const RuleExpr& e) {
  switch (e.kind) {
    case RuleExpr::Kind::stream: return e.stream;
    case RuleExpr::Kind::fuse: {
      std::string s = "fuse(";
      for (std::size_t i = 0; i < e.args.size(); ++i) s += (i ? ", " : "") + describe(e.args[i]);
      return s + ")";
    }
    case RuleExpr::Kind::fir: {
      std::string s = "fir([";
      for (std::size_t i = 0; i < e.coefficients.size(); ++i) s += (i ? ", " : "") + format_double(e.coefficients[i]);
      return s + "], " + describe(e.args.front()) + ")";
    }
    case RuleExpr::Kind::window_average:
      return "window_average(" + describe_duration(e.window) + ", " + describe(e.args.front()) + ")";
    case RuleExpr::Kind::label: return "label(" + format_double(e.threshold) + ", " + describe(e.args.front()) + ")";
  }
  return {};
}

std::vector<std::string> referenced_streams(const RuleExpr& rule) {
  std::vector<std::string> out;
  collect_refs(rule, out);
  return out;
}

std::vector<Measurement> run_virtual_sensor_rule(const VirtualSensorRule& rule, const StreamMap& aligned) {
  return evaluate(rule.expr, rule.id, aligned);
}

}  // namespace metrotwin
