#pragma once

// Reference computations for the tests. Everything here is deliberately
// independent of the library: std::mt19937_64 and <random> distributions,
// textbook formulas and brute force.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

/// Two-pass sample mean and standard deviation.
inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  if (xs.empty()) return m;
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  return m;
}

/// Lower-triangular Cholesky factor of a small dense matrix (row-major n x n).
inline std::vector<double> cholesky(const std::vector<double>& a, std::size_t n) {
  std::vector<double> l(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = i == j ? std::sqrt(std::max(s, 0.0)) : (l[j * n + j] > 0 ? s / l[j * n + j] : 0.0);
    }
  }
  return l;
}

/// Monte Carlo standard deviation of y = sum c_i x_i for zero-mean gaussian x
/// with standard deviations `u` and correlation `r` (row-major).
inline double mc_linear_std(const std::vector<double>& c, const std::vector<double>& u, const std::vector<double>& r,
                            std::size_t draws, std::uint64_t seed) {
  const std::size_t n = c.size();
  std::vector<double> cov(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cov[i * n + j] = r[i * n + j] * u[i] * u[j];
  }
  const auto l = cholesky(cov, n);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> ys(draws), zs(n);
  for (std::size_t d = 0; d < draws; ++d) {
    for (auto& v : zs) v = z(gen);
    double y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double xi = 0.0;
      for (std::size_t k = 0; k <= i; ++k) xi += l[i * n + k] * zs[k];
      y += c[i] * xi;
    }
    ys[d] = y;
  }
  return moments(ys).stddev;
}

/// Analytic first-order u_c of sum c_i x_i, written out as a double sum.
inline double gum_linear_std(const std::vector<double>& c, const std::vector<double>& u, const std::vector<double>& r) {
  double v = 0.0;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) v += c[i] * c[j] * u[i] * u[j] * r[i * n + j];
  }
  return std::sqrt(v);
}

/// Standard error of a sample standard deviation estimated from n gaussian draws.
inline double stddev_standard_error(double sigma, std::size_t n) {
  return sigma / std::sqrt(2.0 * static_cast<double>(n - 1));
}

/// Empirical standard deviation of the inverse-variance weighted mean of
/// independent gaussian inputs, over `reps` replications.
inline double mc_weighted_mean_std(const std::vector<double>& sigmas, std::size_t reps, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> w;
  for (double s : sigmas) w.push_back(1.0 / (s * s));
  const double sw = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> est(reps);
  for (auto& e : est) {
    double num = 0.0;
    for (std::size_t i = 0; i < sigmas.size(); ++i) num += w[i] * std::normal_distribution<double>(0.0, sigmas[i])(gen);
    e = num / sw;
  }
  return moments(est).stddev;
}

/// Fraction of gaussian draws N(value, u) on the other side of `threshold`.
inline double mc_label_flip(double value, double u, double threshold, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(value, u);
  std::size_t flips = 0;
  const bool above = value >= threshold;
  for (std::size_t i = 0; i < draws; ++i) {
    if ((z(gen) >= threshold) != above) ++flips;
  }
  return static_cast<double>(flips) / static_cast<double>(draws);
}

/// Ordinary least-squares line y = a x + b through points.
struct Line {
  double a = 0.0;
  double b = 0.0;
};

inline Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return {sxy / sxx, my - sxy / sxx * mx};
}

}  // namespace oracle
