#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace metrotwin {

/// Exact positive rational, kept in lowest terms.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 1;
  std::int64_t den_ = 1;
};

enum class BaseDimension : std::size_t { length, mass, time, current, temperature, amount, luminosity };

inline constexpr std::size_t kBaseDimensions = 7;
using DimensionVector = std::array<std::int8_t, kBaseDimensions>;

/// A coherent SI unit times an exact rational scale (bar = 10^5 Pa, L = 1/1000 m^3).
/// Affine units (degree Celsius) are deliberately not representable.
class Unit {
 public:
  constexpr Unit() = default;
  Unit(DimensionVector exponents, Rational scale = {}) : exponents_(exponents), scale_(scale) {}

  static Unit dimensionless() { return {}; }
  static Unit base(BaseDimension d);

  const DimensionVector& exponents() const noexcept { return exponents_; }
  const Rational& scale() const noexcept { return scale_; }
  bool is_dimensionless() const noexcept;

  Unit pow(int power) const;
  Unit scaled(Rational factor) const { return Unit(exponents_, scale_ * factor); }

  /// Canonical text: a registered symbol when one matches exactly, otherwise a
  /// product of base symbols such as `kg.m-1.s-2`, prefixed by `(n/d)*` for non-unit scales.
  std::string symbol() const;

  friend Unit operator*(const Unit& a, const Unit& b);
  friend Unit operator/(const Unit& a, const Unit& b);
  friend bool operator==(const Unit&, const Unit&) = default;

 private:
  DimensionVector exponents_{};
  Rational scale_{};
};

/// True iff both units have the same dimension (scales may differ).
bool check_dimensions(const Unit& a, const Unit& b) noexcept;

/// Factor converting a value expressed in `from` into `to`. Dimensions must agree.
double conversion_factor(const Unit& from, const Unit& to);

/// Parses registered symbols and products of them: `Pa`, `m3/s`, `kg.m-1.s-2`,
/// `W*s`, `1` for dimensionless. Returns nullopt on anything unrecognised.
std::optional<Unit> parse_unit(std::string_view text);

namespace units {
Unit metre();
Unit kilogram();
Unit second();
Unit ampere();
Unit kelvin();
Unit mole();
Unit candela();
Unit pascal();
Unit bar();
Unit watt();
Unit joule();
Unit volt();
Unit hertz();
Unit cubic_metre_per_second();
Unit litre_per_minute();
Unit kilogram_per_second();
}  // namespace units

enum class QuantityKind {
  dimensionless,
  length,
  mass,
  time,
  temperature,
  pressure,
  flow,
  mass_flow,
  power,
  energy,
  voltage,
  current,
  frequency,
  label,
};

std::string_view to_string(QuantityKind kind) noexcept;
std::optional<QuantityKind> parse_quantity_kind(std::string_view text) noexcept;
/// SI dimension every unit of this kind must have.
DimensionVector canonical_dimension(QuantityKind kind) noexcept;
Unit canonical_unit(QuantityKind kind);

}  // namespace metrotwin
