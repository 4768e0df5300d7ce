#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "metrotwin/clock.hpp"

namespace metrotwin {

using StreamMap = std::map<std::string, std::vector<Measurement>>;

/// A sample as it leaves a field node: `measurement.timestamp` is node-local.
struct LocalSample {
  std::string node_id;
  Measurement measurement;
};

struct CorrectedTime {
  Timestamp time;
  /// Standard uncertainty of `time` in seconds.
  double uncertainty = 0.0;
};

/// The collection service. Holds the current clock estimate of every
/// registered node and maps local timestamps onto the collector time base.
class Collector {
 public:
  /// `jitter_sigma` is the node's timestamping noise; it adds to the residual
  /// synchronisation uncertainty of every sample from that node.
  void register_node(const std::string& node_id, double jitter_sigma = 0.0);
  void update_clock(const ClockEstimate& estimate);

  bool knows(const std::string& node_id) const { return nodes_.contains(node_id); }
  const ClockEstimate& clock(const std::string& node_id) const;

  CorrectedTime correct(const std::string& node_id, Timestamp local) const;

 private:
  struct Node {
    ClockEstimate estimate;
    double jitter_sigma = 0.0;
  };
  std::map<std::string, Node> nodes_;
};

/// Maps every sample onto the uniform base and groups by source, each stream
/// time-ordered. `u_timestamp` carries the residual synchronisation uncertainty.
StreamMap collect(const Collector& collector, std::span<const LocalSample> samples);

/// Linear interpolation of every stream onto the grid {k * period}, restricted
/// to the span all streams cover. Interpolated samples get the timestamp term
/// |slope| * u_timestamp added to u_random in quadrature; samples already on a
/// grid point pass through unchanged.
std::vector<std::vector<Measurement>> align_streams(std::span<const std::vector<Measurement>> streams,
                                                    Duration period);

}  // namespace metrotwin
