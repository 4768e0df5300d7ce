#pragma once

#include <span>
#include <string>
#include <vector>

#include "metrotwin/measurement.hpp"

namespace metrotwin {

/// Finite impulse response filter; y[n] = sum_j coefficients[j] * x[n - j].
class FirFilter {
 public:
  explicit FirFilter(std::vector<double> coefficients);

  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  std::size_t taps() const noexcept { return coefficients_.size(); }
  double gain() const noexcept;

 private:
  std::vector<double> coefficients_;
};

struct WindowGap {
  Timestamp from;
  Timestamp to;
};

struct WindowAverageResult {
  std::vector<Measurement> averages;
  /// Windows that held no sample; they produce no output.
  std::vector<WindowGap> gaps;
};

/// Arithmetic mean over consecutive windows `[t0 + i*window, t0 + (i+1)*window)`
/// with t0 the first sample's timestamp. Random parts shrink with 1/sqrt(N); the
/// systematic part is fully correlated and is averaged linearly. Output
/// timestamps are window midpoints. Samples are ordered by (timestamp, value)
/// before summation, so input order never changes the result.
WindowAverageResult window_average(std::span<const Measurement> samples, Duration window);

/// Valid-region convolution: the first taps-1 samples produce no output.
/// Output timestamps are those of the newest contributing sample.
std::vector<Measurement> fir_low_pass(std::span<const Measurement> samples, const FirFilter& filter);

struct FuseResult {
  Measurement measurement;
  /// Set when only one input was given and it was passed through unchanged.
  bool single_input = false;
};

/// Inverse-variance weighted mean of simultaneous samples from distinct sources.
FuseResult virtual_sensor_fuse(std::span<const Measurement> aligned, const std::string& virtual_id = "virtual");

enum class Label { below, above };

struct LabeledValue {
  Label label = Label::below;
  /// Probability that the label is wrong under a gaussian measurand.
  double p_wrong = 0.0;
  Measurement source;
  double threshold = 0.0;
};

/// `above` iff value >= threshold; p_wrong = Phi(-|value - threshold| / u_c).
LabeledValue label_with_uncertainty(const Measurement& m, double threshold);

}  // namespace metrotwin
