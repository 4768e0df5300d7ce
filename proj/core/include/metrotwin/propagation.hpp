#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "metrotwin/measurement.hpp"

namespace metrotwin {

/// First-order (GUM) propagation through y = sum_i c_i x_i.
///
/// `sensitivity_units[i]` is the unit of c_i (dimensionless when omitted); each
/// product c_i * x_i must have the dimension of `output_unit`, and scale
/// differences are converted exactly. The output's `u_systematic` is the part of
/// the quadratic form restricted to inputs flagged systematic; the remainder is
/// `u_random`. Negative quadratic forms within 1e-12 (relative to the sum of
/// absolute terms) are clamped to zero, larger ones raise non_psd_covariance.
Measurement combine_linear(std::span<const double> sensitivities, const UncertainVector& inputs,
                           const Unit& output_unit, std::span<const Unit> sensitivity_units = {});

/// Input model for Monte Carlo propagation.
struct DistributionSpec {
  enum class Kind { gaussian, uniform, triangular };

  Kind kind = Kind::gaussian;
  double a = 0.0;  ///< mean (gaussian) or lower bound
  double b = 1.0;  ///< sigma (gaussian) or upper bound

  static DistributionSpec gaussian(double mean, double sigma);
  static DistributionSpec uniform(double lower, double upper);
  /// Symmetric triangular distribution on [lower, upper].
  static DistributionSpec triangular(double lower, double upper);

  double mean() const noexcept;
  double stddev() const noexcept;
  /// Maps a uniform variate in (0, 1) through the inverse CDF.
  double quantile(double p) const noexcept;
  void validate() const;
};

using ScalarModel = std::function<double(std::span<const double>)>;

struct MonteCarloOptions {
  std::size_t draws = 1'000'000;
  std::uint64_t seed = 0;
  double coverage_probability = 0.95;
  Unit output_unit{};
  QuantityKind output_kind = QuantityKind::dimensionless;
  /// Worker threads; results do not depend on this value.
  unsigned threads = 1;
};

struct MonteCarloResult {
  /// value = sample mean, u_random = sample standard deviation.
  Measurement estimate;
  /// Shortest interval holding `coverage_probability` of the draws.
  double lower = 0.0;
  double upper = 0.0;
  std::size_t draws = 0;
};

/// Propagates distributions through a scalar model by sampling. Correlations
/// enter through a gaussian copula; each draw depends only on (seed, draw index).
MonteCarloResult monte_carlo_propagate(const ScalarModel& model, std::span<const DistributionSpec> inputs,
                                       const Eigen::MatrixXd& correlation, const MonteCarloOptions& options);

/// Expanded-uncertainty interval value -/+ k * u_c.
std::pair<double, double> coverage_interval(const Measurement& m, double k);

}  // namespace metrotwin
