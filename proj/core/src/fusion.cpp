#include "metrotwin/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "metrotwin/error.hpp"
#include "metrotwin/numeric.hpp"

namespace metrotwin {

namespace {

void require_homogeneous(std::span<const Measurement> samples, bool same_source) {
  for (const auto& m : samples) {
    if (!(m.unit == samples.front().unit) || m.kind != samples.front().kind) {
      throw Error(Errc::mixed_units, "samples mix " + samples.front().unit.symbol() + " and " + m.unit.symbol());
    }
    if (same_source && m.source_id != samples.front().source_id) {
      throw Error(Errc::mixed_sources, "samples mix sources " + samples.front().source_id + " and " + m.source_id);
    }
  }
}

auto sort_key(const Measurement& m) {
  return std::tie(m.timestamp, m.value, m.u_random, m.u_systematic, m.u_timestamp);
}

}  // namespace

FirFilter::FirFilter(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) {
  if (coefficients_.empty()) throw Error(Errc::invalid_argument, "FIR filter needs at least one coefficient");
  for (double b : coefficients_) {
    if (!std::isfinite(b)) throw Error(Errc::invalid_argument, "FIR coefficients must be finite");
  }
}

double FirFilter::gain() const noexcept { return numeric::pairwise_sum(coefficients_); }

WindowAverageResult window_average(std::span<const Measurement> samples, Duration window) {
  if (window <= Duration::zero()) throw Error(Errc::invalid_argument, "window must be positive");
  WindowAverageResult result;
  if (samples.empty()) return result;
  require_homogeneous(samples, true);

  std::vector<Measurement> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return sort_key(a) < sort_key(b); });

  const Timestamp t0 = sorted.front().timestamp;
  std::vector<double> values, var_random, u_sys, u_time;
  std::size_t i = 0;
  for (std::int64_t w = 0; i < sorted.size(); ++w) {
    const Timestamp begin = t0 + w * window;
    const Timestamp end = begin + window;
    values.clear();
    var_random.clear();
    u_sys.clear();
    u_time.clear();
    for (; i < sorted.size() && sorted[i].timestamp < end; ++i) {
      values.push_back(sorted[i].value);
      var_random.push_back(sorted[i].u_random * sorted[i].u_random);
      u_sys.push_back(sorted[i].u_systematic);
      u_time.push_back(sorted[i].u_timestamp);
    }
    if (values.empty()) {
      result.gaps.push_back({begin, end});
      continue;
    }
    const auto n = static_cast<double>(values.size());
    Measurement out = sorted.front();
    out.value = numeric::pairwise_sum(values) / n;
    out.u_random = std::sqrt(numeric::pairwise_sum(var_random)) / n;
    out.u_systematic = numeric::pairwise_sum(u_sys) / n;
    out.u_timestamp = numeric::pairwise_sum(u_time) / n;
    out.timestamp = begin + window / 2;
    result.averages.push_back(std::move(out));
  }
  return result;
}

std::vector<Measurement> fir_low_pass(std::span<const Measurement> samples, const FirFilter& filter) {
  const std::size_t k = filter.taps();
  if (samples.size() < k) {
    throw Error(Errc::filter_longer_than_stream, std::to_string(k) + " taps but only " +
                                                     std::to_string(samples.size()) + " samples");
  }
  require_homogeneous(samples, true);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].timestamp <= samples[i - 1].timestamp) {
      throw Error(Errc::non_monotonic_timestamp, "FIR input must be strictly time-ordered");
    }
  }
  if (samples.size() >= 2) {
    const double mean_step = seconds_between(samples.front().timestamp, samples.back().timestamp) /
                             static_cast<double>(samples.size() - 1);
    for (std::size_t i = 1; i < samples.size(); ++i) {
      const double step = seconds_between(samples[i - 1].timestamp, samples[i].timestamp);
      if (std::abs(step - mean_step) > 0.01 * mean_step) {
        throw Error(Errc::non_uniform_spacing, "sample spacing deviates more than 1% at index " + std::to_string(i));
      }
    }
  }

  const auto& b = filter.coefficients();
  std::vector<Measurement> out;
  out.reserve(samples.size() - k + 1);
  std::vector<double> v(k), r(k), s(k);
  for (std::size_t n = k - 1; n < samples.size(); ++n) {
    for (std::size_t j = 0; j < k; ++j) {
      const Measurement& x = samples[n - j];
      v[j] = b[j] * x.value;
      r[j] = b[j] * b[j] * x.u_random * x.u_random;
      s[j] = b[j] * x.u_systematic;
    }
    Measurement y = samples[n];
    y.value = numeric::pairwise_sum(v);
    y.u_random = std::sqrt(numeric::pairwise_sum(r));
    y.u_systematic = std::abs(numeric::pairwise_sum(s));
    out.push_back(std::move(y));
  }
  return out;
}

FuseResult virtual_sensor_fuse(std::span<const Measurement> aligned, const std::string& virtual_id) {
  if (aligned.empty()) throw Error(Errc::invalid_argument, "nothing to fuse");
  if (aligned.size() == 1) return {aligned.front(), true};
  require_homogeneous(aligned, false);

  std::vector<const Measurement*> inputs;
  for (const auto& m : aligned) {
    if (m.timestamp != aligned.front().timestamp) {
      throw Error(Errc::misaligned_inputs, "fusion inputs must share one timestamp");
    }
    if (!(m.combined_uncertainty() > 0.0)) {
      throw Error(Errc::zero_uncertainty_input, "source " + m.source_id + " has zero uncertainty");
    }
    inputs.push_back(&m);
  }
  std::sort(inputs.begin(), inputs.end(), [](const Measurement* a, const Measurement* b) {
    return std::tie(a->value, a->u_random, a->u_systematic, a->source_id) <
           std::tie(b->value, b->u_random, b->u_systematic, b->source_id);
  });
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t j = i + 1; j < inputs.size(); ++j) {
      if (inputs[i]->source_id == inputs[j]->source_id) {
        throw Error(Errc::duplicate_source, "source " + inputs[i]->source_id + " appears twice");
      }
    }
  }

  const std::size_t n = inputs.size();
  std::vector<double> w(n), wx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double uc = inputs[i]->combined_uncertainty();
    w[i] = 1.0 / (uc * uc);
    wx[i] = w[i] * inputs[i]->value;
  }
  const double total = numeric::pairwise_sum(w);
  std::vector<double> fr(n), fs(n), ft(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = w[i] / total;
    fr[i] = f * f * inputs[i]->u_random * inputs[i]->u_random;
    fs[i] = f * f * inputs[i]->u_systematic * inputs[i]->u_systematic;
    ft[i] = f * f * inputs[i]->u_timestamp * inputs[i]->u_timestamp;
  }
  const double var_r = numeric::pairwise_sum(fr);
  const double var_s = numeric::pairwise_sum(fs);
  // rescale the split so that u_c is exactly 1/sqrt(sum w)
  const double rescale = (1.0 / total) / (var_r + var_s);

  Measurement out = *inputs.front();
  out.value = numeric::pairwise_sum(wx) / total;
  out.u_random = std::sqrt(var_r * rescale);
  out.u_systematic = std::sqrt(var_s * rescale);
  out.u_timestamp = std::sqrt(numeric::pairwise_sum(ft));
  out.source_id = virtual_id;
  return {std::move(out), false};
}

LabeledValue label_with_uncertainty(const Measurement& m, double threshold) {
  LabeledValue lv;
  lv.source = m;
  lv.threshold = threshold;
  lv.label = m.value >= threshold ? Label::above : Label::below;
  const double uc = m.combined_uncertainty();
  if (uc > 0.0) {
    lv.p_wrong = std::min(0.5, numeric::normal_cdf(-std::abs(m.value - threshold) / uc));
  } else {
    lv.p_wrong = 0.0;
  }
  return lv;
}

}  // namespace metrotwin
