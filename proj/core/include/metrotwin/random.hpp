#pragma once

#include <cstdint>
#include <string_view>

namespace metrotwin {

/// Stateless counter-based generator: every variate is a pure function of
/// (key, counter), so draws can be evaluated in any order or in parallel.
class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t bits(std::uint64_t counter, std::uint64_t lane = 0) const noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter, std::uint64_t lane = 0) const noexcept;
  /// Standard normal via Box-Muller on lanes (2*lane, 2*lane+1).
  double normal(std::uint64_t counter, std::uint64_t lane = 0) const noexcept;

 private:
  std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for a named entity derived from a global seed; adding entities never
/// changes the seeds of existing ones.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view entity) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// FNV-1a, used for output digests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

}  // namespace metrotwin
