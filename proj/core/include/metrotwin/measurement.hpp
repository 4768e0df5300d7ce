#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metrotwin/timestamp.hpp"
#include "metrotwin/units.hpp"

namespace metrotwin {

/// One uncertainty-enriched sample.
///
/// The standard uncertainty is kept split: `u_random` is uncorrelated between
/// samples, `u_systematic` is fully correlated between samples of the same
/// source and independent between sources.
struct Measurement {
  double value = 0.0;
  double u_random = 0.0;
  double u_systematic = 0.0;
  Unit unit;
  QuantityKind kind = QuantityKind::dimensionless;
  Timestamp timestamp{};
  std::string source_id;
  /// Standard uncertainty of `timestamp` in seconds, set by the collector.
  double u_timestamp = 0.0;

  double combined_uncertainty() const noexcept { return std::hypot(u_random, u_systematic); }
};

/// Throws `Error` (invalid_argument / dimension_mismatch) if the sample breaks
/// a Measurement invariant.
void validate(const Measurement& m);

/// Values with a joint covariance, the input side of linear propagation.
class UncertainVector {
 public:
  UncertainVector(Eigen::VectorXd values, Eigen::MatrixXd covariance, std::vector<Unit> units,
                  std::vector<bool> systematic = {});

  /// Independent inputs from standard uncertainties.
  static UncertainVector independent(std::span<const double> values, std::span<const double> uncertainties,
                                     std::vector<Unit> units = {});
  /// Inputs with the given standard uncertainties and correlation matrix.
  static UncertainVector correlated(std::span<const double> values, std::span<const double> uncertainties,
                                    const Eigen::MatrixXd& correlation, std::vector<Unit> units = {});

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  const std::vector<Unit>& units() const noexcept { return units_; }
  /// Inputs flagged systematic contribute to the output's `u_systematic`.
  const std::vector<bool>& systematic() const noexcept { return systematic_; }
  Eigen::MatrixXd correlation() const;

  UncertainVector& mark_systematic(std::size_t index, bool flag = true);

 private:
  Eigen::VectorXd values_;
  Eigen::MatrixXd covariance_;
  std::vector<Unit> units_;
  std::vector<bool> systematic_;
};

}  // namespace metrotwin
