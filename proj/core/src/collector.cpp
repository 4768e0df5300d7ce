#include "metrotwin/collector.hpp"

#include <algorithm>
#include <cmath>

#include "metrotwin/error.hpp"

namespace metrotwin {

void Collector::register_node(const std::string& node_id, double jitter_sigma) {
  if (!(jitter_sigma >= 0.0)) throw Error(Errc::invalid_argument, "jitter must be non-negative");
  nodes_[node_id] = Node{ClockEstimate::identity(node_id), jitter_sigma};
}

void Collector::update_clock(const ClockEstimate& estimate) {
  auto it = nodes_.find(estimate.node_id);
  if (it == nodes_.end()) throw Error(Errc::unknown_node, estimate.node_id);
  it->second.estimate = estimate;
}

const ClockEstimate& Collector::clock(const std::string& node_id) const {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end()) throw Error(Errc::unknown_node, node_id);
  return it->second.estimate;
}

CorrectedTime Collector::correct(const std::string& node_id, Timestamp local) const {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end()) throw Error(Errc::unknown_node, node_id);
  const auto& node = it->second;
  CorrectedTime c;
  c.time = node.estimate.to_true_time(local);
  c.uncertainty = std::hypot(node.estimate.u_offset_at(c.time), node.jitter_sigma);
  return c;
}

StreamMap collect(const Collector& collector, std::span<const LocalSample> samples) {
  StreamMap out;
  for (const auto& s : samples) {
    const auto corrected = collector.correct(s.node_id, s.measurement.timestamp);
    Measurement m = s.measurement;
    m.timestamp = corrected.time;
    m.u_timestamp = corrected.uncertainty;
    out[m.source_id].push_back(std::move(m));
  }
  for (auto& [id, stream] : out) {
    std::stable_sort(stream.begin(), stream.end(),
                     [](const Measurement& a, const Measurement& b) { return a.timestamp < b.timestamp; });
  }
  return out;
}

namespace {

std::int64_t ceil_to_grid(std::int64_t t, std::int64_t p) {
  std::int64_t q = t / p;
  if (q * p < t) ++q;
  return q * p;
}

Measurement interpolate(const Measurement& a, const Measurement& b, Timestamp t) {
  const double span = seconds_between(a.timestamp, b.timestamp);
  const double w = seconds_between(a.timestamp, t) / span;
  Measurement m = a;
  m.timestamp = t;
  m.value = (1.0 - w) * a.value + w * b.value;
  m.u_systematic = (1.0 - w) * a.u_systematic + w * b.u_systematic;
  m.u_timestamp = (1.0 - w) * a.u_timestamp + w * b.u_timestamp;
  const double slope = (b.value - a.value) / span;
  const double u_interp = std::abs(slope) * m.u_timestamp;
  const double var_random = (1.0 - w) * (1.0 - w) * a.u_random * a.u_random + w * w * b.u_random * b.u_random;
  m.u_random = std::sqrt(var_random + u_interp * u_interp);
  return m;
}

}  // namespace

std::vector<std::vector<Measurement>> align_streams(std::span<const std::vector<Measurement>> streams,
                                                    Duration period) {
  if (period <= Duration::zero()) throw Error(Errc::invalid_argument, "grid period must be positive");
  if (streams.empty()) return {};
  Timestamp lo = Timestamp::min();
  Timestamp hi = Timestamp::max();
  for (const auto& s : streams) {
    if (s.empty()) throw Error(Errc::empty_stream, "cannot align an empty stream");
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i].timestamp <= s[i - 1].timestamp) {
        throw Error(Errc::non_monotonic_timestamp, "stream " + s[i].source_id + " is not time-ordered");
      }
    }
    lo = std::max(lo, s.front().timestamp);
    hi = std::min(hi, s.back().timestamp);
  }
  const std::int64_t p = period.count();
  const std::int64_t first = ceil_to_grid(tai_ns(lo), p);
  if (lo > hi || first > tai_ns(hi)) {
    throw Error(Errc::grid_outside_stream, "no grid point lies inside the common span of the streams");
  }

  std::vector<std::vector<Measurement>> out(streams.size());
  for (std::size_t k = 0; k < streams.size(); ++k) {
    const auto& s = streams[k];
    auto& dst = out[k];
    dst.reserve(static_cast<std::size_t>((tai_ns(hi) - first) / p + 1));
    std::size_t i = 0;
    for (std::int64_t g = first; g <= tai_ns(hi); g += p) {
      const Timestamp t = from_tai_ns(g);
      while (i + 1 < s.size() && s[i + 1].timestamp <= t) ++i;
      if (s[i].timestamp == t) {
        dst.push_back(s[i]);
      } else {
        dst.push_back(interpolate(s[i], s[i + 1], t));
      }
    }
  }
  return out;
}

}  // namespace metrotwin
