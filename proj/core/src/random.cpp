#include "metrotwin/random.hpp"

#include <cmath>
#include <numbers>

namespace metrotwin {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t CounterRng::bits(std::uint64_t counter, std::uint64_t lane) const noexcept {
  std::uint64_t h = mix64(key_ + 0x9e3779b97f4a7c15ULL * (counter + 1));
  h = mix64(h ^ (0xd1b54a32d192ed03ULL * (lane + 1)));
  return mix64(h + key_);
}

double CounterRng::uniform(std::uint64_t counter, std::uint64_t lane) const noexcept {
  return (static_cast<double>(bits(counter, lane) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter, std::uint64_t lane) const noexcept {
  const double u1 = uniform(counter, 2 * lane);
  const double u2 = uniform(counter, 2 * lane + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) noexcept {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view entity) noexcept {
  return mix64(global_seed ^ mix64(fnv1a64(entity)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return mix64(seed ^ mix64(salt + 0x632be59bd9b4e019ULL));
}

}  // namespace metrotwin
