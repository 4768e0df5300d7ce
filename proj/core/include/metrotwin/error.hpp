#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace metrotwin {

enum class Errc {
  // uncertainty_core
  dimension_mismatch,
  non_psd_covariance,
  non_psd_correlation,
  length_mismatch,
  model_evaluation_failure,
  invalid_argument,
  // fusion
  empty_window,
  mixed_units,
  mixed_sources,
  non_uniform_spacing,
  filter_longer_than_stream,
  zero_uncertainty_input,
  misaligned_inputs,
  duplicate_source,
  // sensor / twin
  non_finite_raw,
  off_grid_sample,
  non_monotonic_timestamp,
  inverted_range,
  // collector / sync
  negative_delay,
  degenerate_fit,
  insufficient_history,
  unknown_node,
  empty_stream,
  grid_outside_stream,
  unknown_stream_ref,
  rule_syntax,
  // redundancy
  insufficient_redundancy,
  window_too_small,
  rank_deficient,
  insufficient_pairs,
  // scenario / io
  parse_error,
  validation_error,
  unknown_stream,
  io_error,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure in the library surfaces as this exception; `code()` is the
/// stable machine-readable part, `what()` carries context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace metrotwin
