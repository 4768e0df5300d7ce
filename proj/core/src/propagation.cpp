#include "metrotwin/propagation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "metrotwin/error.hpp"
#include "metrotwin/numeric.hpp"
#include "metrotwin/random.hpp"

namespace metrotwin {

namespace {

constexpr double kPsdSlack = 1e-12;

QuantityKind kind_for(const Unit& unit) {
  for (auto k : {QuantityKind::dimensionless, QuantityKind::length, QuantityKind::mass, QuantityKind::time,
                 QuantityKind::temperature, QuantityKind::pressure, QuantityKind::flow, QuantityKind::mass_flow,
                 QuantityKind::power, QuantityKind::energy, QuantityKind::voltage, QuantityKind::current,
                 QuantityKind::frequency}) {
    if (canonical_dimension(k) == unit.exponents()) return k;
  }
  return QuantityKind::dimensionless;
}

// c' Cov c over the index set where mask is true; throws if negative beyond slack.
double quadratic_form(const Eigen::VectorXd& c, const Eigen::MatrixXd& cov, const std::vector<bool>* mask) {
  const auto n = c.size();
  double q = 0.0;
  double magnitude = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask != nullptr && !(*mask)[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask != nullptr && !(*mask)[static_cast<std::size_t>(j)]) continue;
      const double term = c(i) * c(j) * cov(i, j);
      q += term;
      magnitude += std::abs(term);
    }
  }
  if (q < 0.0) {
    if (q < -kPsdSlack * magnitude) {
      throw Error(Errc::non_psd_covariance, "quadratic form is negative (" + std::to_string(q) + ")");
    }
    q = 0.0;
  }
  return q;
}

}  // namespace

Measurement combine_linear(std::span<const double> sensitivities, const UncertainVector& inputs,
                           const Unit& output_unit, std::span<const Unit> sensitivity_units) {
  const std::size_t n = inputs.size();
  if (sensitivities.size() != n) throw Error(Errc::length_mismatch, "sensitivities and inputs differ in length");
  if (!sensitivity_units.empty() && sensitivity_units.size() != n) {
    throw Error(Errc::length_mismatch, "sensitivity units and inputs differ in length");
  }

  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Unit term_unit = sensitivity_units.empty() ? inputs.units()[i] : sensitivity_units[i] * inputs.units()[i];
    if (!check_dimensions(term_unit, output_unit)) {
      throw Error(Errc::dimension_mismatch, "term " + std::to_string(i) + " has unit " + term_unit.symbol() +
                                                ", expected " + output_unit.symbol());
    }
    c(static_cast<Eigen::Index>(i)) = sensitivities[i] * conversion_factor(term_unit, output_unit);
    terms[i] = c(static_cast<Eigen::Index>(i)) * inputs.values()(static_cast<Eigen::Index>(i));
  }

  const double total = quadratic_form(c, inputs.covariance(), nullptr);
  const double systematic = quadratic_form(c, inputs.covariance(), &inputs.systematic());

  Measurement out;
  out.value = numeric::pairwise_sum(terms);
  out.unit = output_unit;
  out.kind = kind_for(output_unit);
  if (systematic <= total) {
    out.u_systematic = std::sqrt(systematic);
    out.u_random = std::sqrt(total - systematic);
  } else {
    // negative cross terms between flagged and unflagged inputs; keep u_c exact
    out.u_systematic = std::sqrt(total);
    out.u_random = 0.0;
  }
  return out;
}

DistributionSpec DistributionSpec::gaussian(double mean, double sigma) {
  DistributionSpec d{Kind::gaussian, mean, sigma};
  d.validate();
  return d;
}

DistributionSpec DistributionSpec::uniform(double lower, double upper) {
  DistributionSpec d{Kind::uniform, lower, upper};
  d.validate();
  return d;
}

DistributionSpec DistributionSpec::triangular(double lower, double upper) {
  DistributionSpec d{Kind::triangular, lower, upper};
  d.validate();
  return d;
}

void DistributionSpec::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b)) throw Error(Errc::invalid_argument, "distribution parameters must be finite");
  if (kind == Kind::gaussian && !(b > 0.0)) throw Error(Errc::invalid_argument, "gaussian sigma must be positive");
  if (kind != Kind::gaussian && !(a < b)) throw Error(Errc::invalid_argument, "lower bound must be below upper bound");
}

double DistributionSpec::mean() const noexcept { return kind == Kind::gaussian ? a : 0.5 * (a + b); }

double DistributionSpec::stddev() const noexcept {
  switch (kind) {
    case Kind::gaussian: return b;
    case Kind::uniform: return (b - a) / std::sqrt(12.0);
    case Kind::triangular: return (b - a) / std::sqrt(24.0);
  }
  return 0.0;
}

double DistributionSpec::quantile(double p) const noexcept {
  switch (kind) {
    case Kind::gaussian: return a + b * numeric::normal_quantile(p);
    case Kind::uniform: return a + p * (b - a);
    case Kind::triangular: {
      const double w = b - a;
      return p < 0.5 ? a + w * std::sqrt(0.5 * p) : b - w * std::sqrt(0.5 * (1.0 - p));
    }
  }
  return 0.0;
}

MonteCarloResult monte_carlo_propagate(const ScalarModel& model, std::span<const DistributionSpec> inputs,
                                       const Eigen::MatrixXd& correlation, const MonteCarloOptions& options) {
  const auto n = static_cast<Eigen::Index>(inputs.size());
  if (options.draws < 10'000) throw Error(Errc::invalid_argument, "at least 10^4 draws are required");
  if (!(options.coverage_probability > 0.0 && options.coverage_probability < 1.0)) {
    throw Error(Errc::invalid_argument, "coverage probability must lie in (0, 1)");
  }
  if (correlation.rows() != n || correlation.cols() != n) {
    throw Error(Errc::length_mismatch, "correlation matrix does not match input count");
  }
  for (const auto& d : inputs) d.validate();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(correlation(i, i) - 1.0) > kPsdSlack) throw Error(Errc::non_psd_correlation, "diagonal must be 1");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(correlation(i, j) - correlation(j, i)) > kPsdSlack) {
        throw Error(Errc::non_psd_correlation, "correlation matrix is not symmetric");
      }
    }
  }

  // Factor R = L L^T through the eigendecomposition so that semidefinite
  // matrices (|r| = 1) are accepted.
  Eigen::MatrixXd factor = Eigen::MatrixXd::Identity(n, n);
  if (!correlation.isIdentity(0.0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(correlation);
    const Eigen::VectorXd lambda = eig.eigenvalues();
    if (n > 0 && lambda.minCoeff() < -kPsdSlack * std::max(1.0, lambda.maxCoeff())) {
      throw Error(Errc::non_psd_correlation, "correlation matrix has a negative eigenvalue");
    }
    factor = eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  const CounterRng rng(options.seed);
  const std::size_t draws = options.draws;
  std::vector<double> ys(draws);
  std::atomic<std::size_t> first_failure{std::numeric_limits<std::size_t>::max()};

  auto run_range = [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd z(n);
    Eigen::VectorXd zc(n);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (std::size_t k = begin; k < end; ++k) {
      for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal(k, static_cast<std::uint64_t>(i));
      zc.noalias() = factor * z;
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& d = inputs[static_cast<std::size_t>(i)];
        x[static_cast<std::size_t>(i)] = d.kind == DistributionSpec::Kind::gaussian
                                             ? d.a + d.b * zc(i)
                                             : d.quantile(numeric::normal_cdf(zc(i)));
      }
      const double y = model(x);
      if (!std::isfinite(y)) {
        std::size_t prev = first_failure.load();
        while (k < prev && !first_failure.compare_exchange_weak(prev, k)) {
        }
        return;
      }
      ys[k] = y;
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, 64));
  if (threads == 1) {
    run_range(0, draws);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (draws + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(draws, t * chunk);
      const std::size_t end = std::min(draws, begin + chunk);
      pool.emplace_back(run_range, begin, end);
    }
  }
  if (const auto bad = first_failure.load(); bad != std::numeric_limits<std::size_t>::max()) {
    throw Error(Errc::model_evaluation_failure, "non-finite model output at draw " + std::to_string(bad));
  }

  const double mean = numeric::pairwise_sum(ys) / static_cast<double>(draws);
  std::vector<double> sq(draws);
  for (std::size_t k = 0; k < draws; ++k) sq[k] = (ys[k] - mean) * (ys[k] - mean);
  const double variance = numeric::pairwise_sum(sq) / static_cast<double>(draws - 1);

  std::sort(ys.begin(), ys.end());
  const auto inside = static_cast<std::size_t>(std::ceil(options.coverage_probability * static_cast<double>(draws)));
  std::size_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + inside - 1 < draws; ++i) {
    const double w = ys[i + inside - 1] - ys[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }

  MonteCarloResult r;
  r.estimate.value = mean;
  r.estimate.u_random = std::sqrt(variance);
  r.estimate.unit = options.output_unit;
  r.estimate.kind = options.output_kind;
  r.estimate.source_id = "monte_carlo";
  r.lower = ys[best];
  r.upper = ys[best + inside - 1];
  r.draws = draws;
  return r;
}

std::pair<double, double> coverage_interval(const Measurement& m, double k) {
  if (!(k > 0.0)) throw Error(Errc::invalid_argument, "coverage factor must be positive");
  const double half = k * m.combined_uncertainty();
  return {m.value - half, m.value + half};
}

}  // namespace metrotwin
