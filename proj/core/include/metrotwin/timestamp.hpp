#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace metrotwin {

/// International Atomic Time, counted in nanoseconds since 1970-01-01T00:00:00 TAI.
struct TaiClock {
  using rep = std::int64_t;
  using period = std::nano;
  using duration = std::chrono::duration<rep, period>;
  using time_point = std::chrono::time_point<TaiClock>;
  static constexpr bool is_steady = false;
};

using Timestamp = TaiClock::time_point;
using Duration = std::chrono::nanoseconds;

/// TAI - UTC in effect since 2017-01-01. Used only for the RFC 3339 convenience
/// rendering; no leap-second table is carried.
inline constexpr std::int64_t kTaiMinusUtcSeconds = 37;

constexpr Timestamp from_tai_ns(std::int64_t ns) { return Timestamp{Duration{ns}}; }
constexpr std::int64_t tai_ns(Timestamp t) { return t.time_since_epoch().count(); }

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) * 1e-9; }
/// Rounds to the nearest nanosecond.
Duration seconds_to_duration(double seconds);

/// Seconds elapsed from `from` to `to` (negative when `to` precedes `from`).
inline double seconds_between(Timestamp from, Timestamp to) { return to_seconds(to - from); }

std::string format_rfc3339_utc(Timestamp t);
/// Accepts `YYYY-MM-DDTHH:MM:SS[.fraction](Z|±HH:MM)`.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

}  // namespace metrotwin
