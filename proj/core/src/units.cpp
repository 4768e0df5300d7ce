#include "metrotwin/units.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <numeric>
#include <utility>
#include <vector>

#include "metrotwin/error.hpp"

namespace metrotwin {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0) throw Error(Errc::invalid_argument, "unit scale must be a positive rational");
  const auto g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational operator*(Rational a, Rational b) {
  // cross-reduce first to keep the intermediate products small
  const auto g1 = std::gcd(a.num_, b.den_);
  const auto g2 = std::gcd(b.num_, a.den_);
  return Rational((a.num_ / g1) * (b.num_ / g2), (a.den_ / g2) * (b.den_ / g1));
}

Rational operator/(Rational a, Rational b) { return a * Rational(b.den_, b.num_); }

Unit Unit::base(BaseDimension d) {
  DimensionVector e{};
  e[static_cast<std::size_t>(d)] = 1;
  return Unit(e);
}

bool Unit::is_dimensionless() const noexcept { return exponents_ == DimensionVector{}; }

Unit Unit::pow(int power) const {
  DimensionVector e{};
  for (std::size_t i = 0; i < kBaseDimensions; ++i) e[i] = static_cast<std::int8_t>(exponents_[i] * power);
  Rational s;
  const Rational step = power >= 0 ? scale_ : Rational(scale_.den(), scale_.num());
  for (int i = 0; i < std::abs(power); ++i) s = s * step;
  return Unit(e, s);
}

Unit operator*(const Unit& a, const Unit& b) {
  DimensionVector e{};
  for (std::size_t i = 0; i < kBaseDimensions; ++i) e[i] = static_cast<std::int8_t>(a.exponents_[i] + b.exponents_[i]);
  return Unit(e, a.scale_ * b.scale_);
}

Unit operator/(const Unit& a, const Unit& b) { return a * b.pow(-1); }

bool check_dimensions(const Unit& a, const Unit& b) noexcept { return a.exponents() == b.exponents(); }

double conversion_factor(const Unit& from, const Unit& to) {
  if (!check_dimensions(from, to)) {
    throw Error(Errc::dimension_mismatch, "cannot convert " + from.symbol() + " to " + to.symbol());
  }
  const Rational r = from.scale() / to.scale();
  return r.to_double();
}

namespace units {
namespace {
Unit dims(int m, int kg, int s, int a = 0, int k = 0, int mol = 0, int cd = 0) {
  return Unit(DimensionVector{static_cast<std::int8_t>(m), static_cast<std::int8_t>(kg), static_cast<std::int8_t>(s),
                              static_cast<std::int8_t>(a), static_cast<std::int8_t>(k), static_cast<std::int8_t>(mol),
                              static_cast<std::int8_t>(cd)});
}
}  // namespace
Unit metre() { return Unit::base(BaseDimension::length); }
Unit kilogram() { return Unit::base(BaseDimension::mass); }
Unit second() { return Unit::base(BaseDimension::time); }
Unit ampere() { return Unit::base(BaseDimension::current); }
Unit kelvin() { return Unit::base(BaseDimension::temperature); }
Unit mole() { return Unit::base(BaseDimension::amount); }
Unit candela() { return Unit::base(BaseDimension::luminosity); }
Unit pascal() { return dims(-1, 1, -2); }
Unit bar() { return pascal().scaled(Rational(100000, 1)); }
Unit watt() { return dims(2, 1, -3); }
Unit joule() { return dims(2, 1, -2); }
Unit volt() { return dims(2, 1, -3, -1); }
Unit hertz() { return dims(0, 0, -1); }
Unit cubic_metre_per_second() { return dims(3, 0, -1); }
Unit litre_per_minute() { return dims(3, 0, -1).scaled(Rational(1, 60000)); }
Unit kilogram_per_second() { return dims(0, 1, -1); }
}  // namespace units

namespace {

struct NamedUnit {
  std::string_view symbol;
  Unit (*make)();
};

Unit make_dimensionless() { return Unit::dimensionless(); }
Unit make_kilowatt() { return units::watt().scaled(Rational(1000, 1)); }
Unit make_kilowatt_hour() { return units::joule().scaled(Rational(3600000, 1)); }
Unit make_litre() { return units::metre().pow(3).scaled(Rational(1, 1000)); }
Unit make_minute() { return units::second().scaled(Rational(60, 1)); }
Unit make_hour() { return units::second().scaled(Rational(3600, 1)); }
Unit make_gram() { return units::kilogram().scaled(Rational(1, 1000)); }
Unit make_kilopascal() { return units::pascal().scaled(Rational(1000, 1)); }
Unit make_millibar() { return units::pascal().scaled(Rational(100, 1)); }

// Order matters for `symbol()`: the first exact match wins.
constexpr NamedUnit kNamed[] = {
    {"1", &make_dimensionless},
    {"m", &units::metre},
    {"kg", &units::kilogram},
    {"s", &units::second},
    {"A", &units::ampere},
    {"K", &units::kelvin},
    {"mol", &units::mole},
    {"cd", &units::candela},
    {"Pa", &units::pascal},
    {"kPa", &make_kilopascal},
    {"bar", &units::bar},
    {"mbar", &make_millibar},
    {"W", &units::watt},
    {"kW", &make_kilowatt},
    {"J", &units::joule},
    {"kWh", &make_kilowatt_hour},
    {"V", &units::volt},
    {"Hz", &units::hertz},
    {"m3/s", &units::cubic_metre_per_second},
    {"L/min", &units::litre_per_minute},
    {"kg/s", &units::kilogram_per_second},
    {"L", &make_litre},
    {"min", &make_minute},
    {"h", &make_hour},
    {"g", &make_gram},
};

constexpr std::string_view kBaseSymbols[kBaseDimensions] = {"m", "kg", "s", "A", "K", "mol", "cd"};

std::optional<Unit> lookup(std::string_view symbol) {
  for (const auto& n : kNamed) {
    if (n.symbol == symbol) return n.make();
  }
  return std::nullopt;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// One factor such as `m3`, `s-2` or `kWh`.
std::optional<Unit> parse_factor(std::string_view tok) {
  if (tok.empty()) return std::nullopt;
  if (auto u = lookup(tok)) return u;
  std::size_t split = tok.size();
  while (split > 0 && (std::isdigit(static_cast<unsigned char>(tok[split - 1])) != 0)) --split;
  if (split > 0 && split < tok.size() && tok[split - 1] == '-') --split;
  if (split == 0 || split == tok.size()) return std::nullopt;
  auto base = lookup(tok.substr(0, split));
  auto power = parse_int(tok.substr(split));
  if (!base || !power) return std::nullopt;
  return base->pow(static_cast<int>(*power));
}

std::optional<Unit> parse_product(std::string_view text) {
  Unit result;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(".*", start);
    if (end == std::string_view::npos) end = text.size();
    auto f = parse_factor(text.substr(start, end - start));
    if (!f) return std::nullopt;
    result = result * *f;
    start = end + 1;
  }
  return result;
}

}  // namespace

std::string Unit::symbol() const {
  for (const auto& n : kNamed) {
    if (n.make() == *this) return std::string(n.symbol);
  }
  std::string out;
  if (scale_ != Rational{}) {
    out = "(" + std::to_string(scale_.num()) + "/" + std::to_string(scale_.den()) + ")*";
  }
  bool any = false;
  for (std::size_t i = 0; i < kBaseDimensions; ++i) {
    if (exponents_[i] == 0) continue;
    if (any) out += '.';
    out += kBaseSymbols[i];
    if (exponents_[i] != 1) out += std::to_string(exponents_[i]);
    any = true;
  }
  if (!any) out += '1';
  return out;
}

std::optional<Unit> parse_unit(std::string_view text) {
  if (auto u = lookup(text)) return u;
  Rational scale;
  if (!text.empty() && text.front() == '(') {
    const auto close = text.find(")*");
    const auto slash = text.find('/');
    if (close == std::string_view::npos || slash == std::string_view::npos || slash > close) return std::nullopt;
    auto num = parse_int(text.substr(1, slash - 1));
    auto den = parse_int(text.substr(slash + 1, close - slash - 1));
    if (!num || !den || *num <= 0 || *den <= 0) return std::nullopt;
    scale = Rational(*num, *den);
    text.remove_prefix(close + 2);
  }
  std::optional<Unit> u;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    auto numer = parse_product(text.substr(0, slash));
    auto denom = parse_product(text.substr(slash + 1));
    if (!numer || !denom) return std::nullopt;
    u = *numer / *denom;
  } else {
    u = parse_product(text);
  }
  if (!u) return std::nullopt;
  return u->scaled(scale);
}

namespace {
struct KindInfo {
  QuantityKind kind;
  std::string_view name;
  Unit (*unit)();
};

constexpr KindInfo kKinds[] = {
    {QuantityKind::dimensionless, "dimensionless", &make_dimensionless},
    {QuantityKind::length, "length", &units::metre},
    {QuantityKind::mass, "mass", &units::kilogram},
    {QuantityKind::time, "time", &units::second},
    {QuantityKind::temperature, "temperature", &units::kelvin},
    {QuantityKind::pressure, "pressure", &units::pascal},
    {QuantityKind::flow, "flow", &units::cubic_metre_per_second},
    {QuantityKind::mass_flow, "mass_flow", &units::kilogram_per_second},
    {QuantityKind::power, "power", &units::watt},
    {QuantityKind::energy, "energy", &units::joule},
    {QuantityKind::voltage, "voltage", &units::volt},
    {QuantityKind::current, "current", &units::ampere},
    {QuantityKind::frequency, "frequency", &units::hertz},
    {QuantityKind::label, "label", &make_dimensionless},
};
}  // namespace

std::string_view to_string(QuantityKind kind) noexcept {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

std::optional<QuantityKind> parse_quantity_kind(std::string_view text) noexcept {
  for (const auto& k : kKinds) {
    if (k.name == text) return k.kind;
  }
  return std::nullopt;
}

Unit canonical_unit(QuantityKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.unit();
  }
  return {};
}

DimensionVector canonical_dimension(QuantityKind kind) noexcept {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.unit().exponents();
  }
  return {};
}

}  // namespace metrotwin
