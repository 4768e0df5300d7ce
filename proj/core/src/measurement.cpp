#include "metrotwin/measurement.hpp"

#include <algorithm>
#include <cmath>

#include "metrotwin/error.hpp"

namespace metrotwin {

void validate(const Measurement& m) {
  if (!std::isfinite(m.value)) throw Error(Errc::invalid_argument, "non-finite value from " + m.source_id);
  if (!(m.u_random >= 0.0) || !(m.u_systematic >= 0.0) || !std::isfinite(m.u_random) ||
      !std::isfinite(m.u_systematic)) {
    throw Error(Errc::invalid_argument, "uncertainties must be finite and non-negative (" + m.source_id + ")");
  }
  if (!(m.u_timestamp >= 0.0)) throw Error(Errc::invalid_argument, "timestamp uncertainty must be non-negative");
  if (m.unit.exponents() != canonical_dimension(m.kind)) {
    throw Error(Errc::dimension_mismatch, "unit " + m.unit.symbol() + " does not fit quantity kind " +
                                              std::string(to_string(m.kind)));
  }
}

UncertainVector::UncertainVector(Eigen::VectorXd values, Eigen::MatrixXd covariance, std::vector<Unit> units,
                                 std::vector<bool> systematic)
    : values_(std::move(values)),
      covariance_(std::move(covariance)),
      units_(std::move(units)),
      systematic_(std::move(systematic)) {
  const auto n = values_.size();
  if (covariance_.rows() != n || covariance_.cols() != n) {
    throw Error(Errc::length_mismatch, "covariance shape does not match value count");
  }
  if (units_.empty()) units_.assign(static_cast<std::size_t>(n), Unit{});
  if (systematic_.empty()) systematic_.assign(static_cast<std::size_t>(n), false);
  if (units_.size() != static_cast<std::size_t>(n) || systematic_.size() != static_cast<std::size_t>(n)) {
    throw Error(Errc::length_mismatch, "units/systematic flags do not match value count");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(covariance_(i, i) >= 0.0)) throw Error(Errc::non_psd_covariance, "negative variance on the diagonal");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double a = covariance_(i, j);
      const double b = covariance_(j, i);
      const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
      if (std::abs(a - b) > 1e-12 * scale) throw Error(Errc::non_psd_covariance, "covariance is not symmetric");
      const double bound = std::sqrt(covariance_(i, i) * covariance_(j, j));
      if (std::abs(a) > bound * (1.0 + 1e-12) + 1e-300) {
        throw Error(Errc::non_psd_covariance, "correlation outside [-1, 1]");
      }
    }
  }
}

UncertainVector UncertainVector::independent(std::span<const double> values, std::span<const double> uncertainties,
                                             std::vector<Unit> units) {
  return correlated(values, uncertainties,
                    Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(values.size()),
                                              static_cast<Eigen::Index>(values.size())),
                    std::move(units));
}

UncertainVector UncertainVector::correlated(std::span<const double> values, std::span<const double> uncertainties,
                                            const Eigen::MatrixXd& correlation, std::vector<Unit> units) {
  const auto n = static_cast<Eigen::Index>(values.size());
  if (uncertainties.size() != values.size() || correlation.rows() != n || correlation.cols() != n) {
    throw Error(Errc::length_mismatch, "values, uncertainties and correlation must agree in size");
  }
  Eigen::VectorXd v(n);
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = values[static_cast<std::size_t>(i)];
    u(i) = uncertainties[static_cast<std::size_t>(i)];
    if (!(u(i) >= 0.0)) throw Error(Errc::invalid_argument, "standard uncertainty must be non-negative");
  }
  Eigen::MatrixXd cov = u.asDiagonal() * correlation * u.asDiagonal();
  return UncertainVector(std::move(v), std::move(cov), std::move(units));
}

Eigen::MatrixXd UncertainVector::correlation() const {
  const auto n = values_.size();
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = std::sqrt(covariance_(i, i) * covariance_(j, j));
      r(i, j) = d > 0.0 ? std::clamp(covariance_(i, j) / d, -1.0, 1.0) : 0.0;
    }
  }
  return r;
}

UncertainVector& UncertainVector::mark_systematic(std::size_t index, bool flag) {
  if (index >= systematic_.size()) throw Error(Errc::length_mismatch, "systematic flag index out of range");
  systematic_[index] = flag;
  return *this;
}

}  // namespace metrotwin
