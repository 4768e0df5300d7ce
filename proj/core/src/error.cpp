#include "metrotwin/error.hpp"

namespace metrotwin {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::non_psd_covariance: return "NonPSDCovariance";
    case Errc::non_psd_correlation: return "NonPSDCorrelation";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::model_evaluation_failure: return "ModelEvaluationFailure";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::empty_window: return "EmptyWindow";
    case Errc::mixed_units: return "MixedUnits";
    case Errc::mixed_sources: return "MixedSources";
    case Errc::non_uniform_spacing: return "NonUniformSpacing";
    case Errc::filter_longer_than_stream: return "FilterLongerThanStream";
    case Errc::zero_uncertainty_input: return "ZeroUncertaintyInput";
    case Errc::misaligned_inputs: return "MisalignedInputs";
    case Errc::duplicate_source: return "DuplicateSource";
    case Errc::non_finite_raw: return "NonFiniteRaw";
    case Errc::off_grid_sample: return "OffGridSample";
    case Errc::non_monotonic_timestamp: return "NonMonotonicTimestamp";
    case Errc::inverted_range: return "InvertedRange";
    case Errc::negative_delay: return "NegativeDelay";
    case Errc::degenerate_fit: return "DegenerateFit";
    case Errc::insufficient_history: return "InsufficientHistory";
    case Errc::unknown_node: return "UnknownNode";
    case Errc::empty_stream: return "EmptyStream";
    case Errc::grid_outside_stream: return "GridOutsideStream";
    case Errc::unknown_stream_ref: return "UnknownStreamRef";
    case Errc::rule_syntax: return "RuleSyntax";
    case Errc::insufficient_redundancy: return "InsufficientRedundancy";
    case Errc::window_too_small: return "WindowTooSmall";
    case Errc::rank_deficient: return "RankDeficient";
    case Errc::insufficient_pairs: return "InsufficientPairs";
    case Errc::parse_error: return "ParseError";
    case Errc::validation_error: return "ValidationError";
    case Errc::unknown_stream: return "UnknownStream";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace metrotwin
