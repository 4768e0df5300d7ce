#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace metrotwin::numeric {

/// Pairwise (cascade) summation; error grows as O(log n) instead of O(n).
double pairwise_sum(std::span<const double> xs) noexcept;

/// Standard normal cumulative distribution function.
inline double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse of `normal_cdf` on (0, 1).
double normal_quantile(double p) noexcept;

}  // namespace metrotwin::numeric
