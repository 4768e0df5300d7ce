#include "metrotwin/clock.hpp"

#include <algorithm>
#include <cmath>

#include "metrotwin/error.hpp"
#include "metrotwin/numeric.hpp"
#include "metrotwin/random.hpp"

namespace metrotwin {

void ClockModel::validate() const {
  if (!(jitter_sigma >= 0.0)) throw Error(Errc::validation_error, "clock " + node_id + ": jitter_sigma < 0");
  if (!(std::abs(skew) < 1e-3)) throw Error(Errc::validation_error, "clock " + node_id + ": |skew| >= 1e-3");
  if (!std::isfinite(offset)) throw Error(Errc::validation_error, "clock " + node_id + ": non-finite offset");
}

Timestamp local_time(const ClockModel& clock, Timestamp true_time, std::uint64_t rng_seed) {
  double distortion = clock.offset + clock.skew * seconds_between(clock.epoch, true_time);
  if (clock.jitter_sigma > 0.0) distortion += clock.jitter_sigma * CounterRng(rng_seed).normal(0);
  return true_time + seconds_to_duration(distortion);
}

OffsetEstimate estimate_offset(const SyncExchange& x, const SyncModel& model) {
  const auto out_leg = (x.t2 - x.t1).count();
  const auto back_leg = (x.t4 - x.t3).count();
  OffsetEstimate e;
  e.mean_path_delay = static_cast<double>(out_leg + back_leg) * 0.5e-9;
  if (!(e.mean_path_delay >= 0.0) || x.t4 <= x.t1) {
    throw Error(Errc::negative_delay, "inconsistent exchange, mean path delay " + std::to_string(e.mean_path_delay));
  }
  // t2, t3 carry node jitter and t1, t4 collector jitter, each with weight 1/2
  const double u_jitter_sq = 0.25 * (2.0 * model.jitter_sigma * model.jitter_sigma +
                                     2.0 * model.collector_jitter * model.collector_jitter);
  const double u_asym = model.asymmetry_bound / std::sqrt(3.0);
  e.offset.value = static_cast<double>(out_leg - back_leg) * 0.5e-9;
  e.offset.u_random = std::sqrt(u_jitter_sq);
  e.offset.u_systematic = u_asym;
  e.offset.unit = units::second();
  e.offset.kind = QuantityKind::time;
  e.offset.timestamp = x.t4;
  return e;
}

ClockEstimate ClockEstimate::identity(std::string node_id) {
  ClockEstimate e;
  e.node_id = std::move(node_id);
  return e;
}

ClockModel ClockEstimate::to_clock_model(double jitter_sigma) const {
  ClockModel m;
  m.node_id = node_id;
  m.offset = offset;
  m.skew = skew;
  m.jitter_sigma = jitter_sigma;
  m.epoch = reference;
  return m;
}

double ClockEstimate::offset_at(Timestamp t) const noexcept { return offset + skew * seconds_between(reference, t); }

double ClockEstimate::u_offset_at(Timestamp t) const noexcept {
  const double dt = seconds_between(reference, t);
  const double var = u_offset * u_offset + dt * dt * u_skew * u_skew + 2.0 * dt * cov_offset_skew;
  return std::sqrt(std::max(0.0, var));
}

Timestamp ClockEstimate::to_true_time(Timestamp local) const noexcept {
  // local = t + offset + skew * (t - reference), solved for t
  const double since = seconds_between(reference, local);
  return local - seconds_to_duration((offset + skew * since) / (1.0 + skew));
}

ClockEstimate discipline_clock(std::span<const Measurement> history) {
  if (history.size() < 2) throw Error(Errc::insufficient_history, "need at least two offset estimates");
  const std::size_t n = history.size();
  const Timestamp anchor = history.front().timestamp;

  // without uncertainties on every point the fit degrades to ordinary least
  // squares with residual-based parameter uncertainties
  bool any_zero = false;
  for (const auto& m : history) any_zero = any_zero || !(m.combined_uncertainty() > 0.0);
  std::vector<double> w(n, 1.0), wt(n);
  if (!any_zero) {
    for (std::size_t i = 0; i < n; ++i) {
      const double u = history[i].combined_uncertainty();
      w[i] = 1.0 / (u * u);
    }
  }
  for (std::size_t i = 0; i < n; ++i) wt[i] = w[i] * seconds_between(anchor, history[i].timestamp);

  const double sw = numeric::pairwise_sum(w);
  const Timestamp reference = anchor + seconds_to_duration(numeric::pairwise_sum(wt) / sw);

  std::vector<double> sxx(n), sxy(n), sy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = seconds_between(reference, history[i].timestamp);
    sxx[i] = w[i] * x * x;
    sxy[i] = w[i] * x * history[i].value;
    sy[i] = w[i] * history[i].value;
  }
  // x is centred up to the nanosecond rounding of `reference`; keep the exact normal equations
  std::vector<double> sx(n);
  for (std::size_t i = 0; i < n; ++i) sx[i] = w[i] * seconds_between(reference, history[i].timestamp);
  const double Sx = numeric::pairwise_sum(sx);
  const double Sxx = numeric::pairwise_sum(sxx);
  const double Sxy = numeric::pairwise_sum(sxy);
  const double Sy = numeric::pairwise_sum(sy);
  const double det = sw * Sxx - Sx * Sx;
  if (!(det > 1e-300) || !(Sxx > 0.0)) throw Error(Errc::degenerate_fit, "all offset estimates share one timestamp");

  ClockEstimate e;
  e.node_id = history.front().source_id;
  e.reference = reference;
  e.skew = (sw * Sxy - Sx * Sy) / det;
  e.offset = (Sxx * Sy - Sx * Sxy) / det;
  double scale = 1.0;
  if (any_zero) {
    std::vector<double> r2(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = history[i].value - e.offset - e.skew * seconds_between(reference, history[i].timestamp);
      r2[i] = r * r;
    }
    scale = n > 2 ? numeric::pairwise_sum(r2) / static_cast<double>(n - 2) : 0.0;
  }
  e.u_offset = std::sqrt(scale * Sxx / det);
  e.u_skew = std::sqrt(scale * sw / det);
  e.cov_offset_skew = -scale * Sx / det;
  e.points = n;
  return e;
}

}  // namespace metrotwin
