#include "metrotwin/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "metrotwin/error.hpp"
#include "metrotwin/fusion.hpp"
#include "metrotwin/numeric.hpp"

namespace metrotwin {

Measurement consensus_estimate(std::span<const Measurement> aligned, const std::optional<std::string>& exclude) {
  if (aligned.size() < 3) throw Error(Errc::insufficient_redundancy, "consensus needs at least three sensors");
  std::vector<Measurement> refs;
  for (const auto& m : aligned) {
    if (!exclude || m.source_id != *exclude) refs.push_back(m);
  }
  if (refs.size() < 2) throw Error(Errc::insufficient_redundancy, "fewer than two references after exclusion");
  const std::string id = exclude ? "consensus-without-" + *exclude : "consensus";
  return virtual_sensor_fuse(refs, id).measurement;
}

namespace {

struct WindowMean {
  double mean = 0.0;
  double u = 0.0;
};

WindowMean window_mean(const std::vector<const Measurement*>& xs) {
  const auto n = static_cast<double>(xs.size());
  std::vector<double> v, r, s;
  v.reserve(xs.size());
  r.reserve(xs.size());
  s.reserve(xs.size());
  for (const auto* m : xs) {
    v.push_back(m->value);
    r.push_back(m->u_random * m->u_random);
    s.push_back(m->u_systematic);
  }
  const double mean_sys = numeric::pairwise_sum(s) / n;
  const double var = numeric::pairwise_sum(r) / (n * n) + mean_sys * mean_sys;
  return {numeric::pairwise_sum(v) / n, std::sqrt(var)};
}

// Pairs of (a, b) samples sharing a timestamp inside [from, to).
std::vector<std::pair<const Measurement*, const Measurement*>> pair_up(std::span<const Measurement> a,
                                                                      std::span<const Measurement> b, Timestamp from,
                                                                      Timestamp to) {
  std::unordered_map<std::int64_t, const Measurement*> by_time;
  for (const auto& m : b) {
    if (m.timestamp >= from && m.timestamp < to) by_time.emplace(tai_ns(m.timestamp), &m);
  }
  std::vector<std::pair<const Measurement*, const Measurement*>> out;
  for (const auto& m : a) {
    if (m.timestamp < from || m.timestamp >= to) continue;
    if (auto it = by_time.find(tai_ns(m.timestamp)); it != by_time.end()) out.emplace_back(&m, it->second);
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

}  // namespace

DriftReport drift_score(std::span<const Measurement> sensor, std::span<const Measurement> consensus, Timestamp from,
                        Timestamp to, double threshold_k) {
  if (from > to) throw Error(Errc::inverted_range, "drift window ends before it starts");
  const auto pairs = pair_up(sensor, consensus, from, to);
  if (pairs.size() < 10) {
    throw Error(Errc::window_too_small, "window holds " + std::to_string(pairs.size()) + " aligned points, need 10");
  }
  std::vector<const Measurement*> xs, cs;
  for (const auto& [x, c] : pairs) {
    xs.push_back(x);
    cs.push_back(c);
  }
  const auto mx = window_mean(xs);
  const auto mc = window_mean(cs);
  const double diff = std::abs(mx.mean - mc.mean);
  const double denom = std::hypot(mx.u, mc.u);

  DriftReport r;
  r.sensor_id = pairs.front().first->source_id;
  r.from = from;
  r.to = to;
  r.threshold_k = threshold_k;
  r.normalized_error = denom > 0.0 ? diff / denom : (diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  r.flagged = r.normalized_error > threshold_k;
  r.consensus_trace = pairs.front().second->source_id;
  r.points = pairs.size();
  return r;
}

RecalibrationResult infield_recalibrate(std::span<const Measurement> raw, std::span<const Measurement> consensus,
                                        Timestamp from, Timestamp to, const CalibrationCertificate& current,
                                        const RecalibrationOptions& options) {
  const auto pairs = pair_up(raw, consensus, from, to);
  const std::size_t n = pairs.size();
  if (n < options.min_pairs || n < 3) {
    throw Error(Errc::insufficient_pairs, std::to_string(n) + " pairs, need " + std::to_string(options.min_pairs));
  }

  // raw readings carry the instrument noise; in raw units it is u_noise / |gain|
  const double sx = current.gain != 0.0 ? current.u_noise / std::abs(current.gain) : 0.0;
  const double sx2 = sx * sx;

  std::vector<double> uc(n), us(n), ur2(n);
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [r, c] = pairs[i];
    uc[i] = c->combined_uncertainty();
    if (!(uc[i] > 0.0)) throw Error(Errc::zero_uncertainty_input, "consensus sample without uncertainty");
    us[i] = c->u_systematic;
    ur2[i] = c->u_random * c->u_random;
    xmin = std::min(xmin, r->value);
    xmax = std::max(xmax, r->value);
  }

  struct Fit {
    double Sw = 0, Sw2 = 0, xbar = 0, ybar = 0, Sxx = 0, Sxy = 0, Sxx_true = 0, var_gain_extra = 0;
  };
  std::vector<double> w(n), t1(n), t2(n), t3(n);
  // Weighted moments with weights 1 / (u_c^2 + gain^2 sx^2). The noise in x
  // inflates the centred sum of squares by sx^2 (Sw - Sw2/Sw) on average; that
  // part is removed so the gain is not attenuated.
  auto moments = [&](double g) {
    Fit f;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 1.0 / (uc[i] * uc[i] + g * g * sx2);
      t1[i] = w[i] * w[i];
    }
    f.Sw = numeric::pairwise_sum(w);
    f.Sw2 = numeric::pairwise_sum(t1);
    for (std::size_t i = 0; i < n; ++i) {
      t1[i] = w[i] * pairs[i].first->value;
      t2[i] = w[i] * pairs[i].second->value;
    }
    f.xbar = numeric::pairwise_sum(t1) / f.Sw;
    f.ybar = numeric::pairwise_sum(t2) / f.Sw;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = pairs[i].first->value - f.xbar;
      const double dy = pairs[i].second->value - f.ybar;
      t1[i] = w[i] * dx * dx;
      t2[i] = w[i] * dx * dy;
      t3[i] = w[i] * w[i] * sx2 * (uc[i] * uc[i] + 2.0 * g * g * sx2);
    }
    f.Sxx = numeric::pairwise_sum(t1);
    f.Sxy = numeric::pairwise_sum(t2);
    f.Sxx_true = f.Sxx - sx2 * (f.Sw - f.Sw2 / f.Sw);
    f.var_gain_extra = numeric::pairwise_sum(t3);
    return f;
  };

  Fit f = moments(current.gain);
  bool identifiable = (xmax - xmin) > options.spread_factor * median(uc) && f.Sxx_true > 0.5 * f.Sxx;
  if (identifiable) {
    f = moments(f.Sxy / f.Sxx_true);
    identifiable = f.Sxx_true > 0.5 * f.Sxx;
  }
  if (!identifiable && !options.allow_offset_only) {
    throw Error(Errc::rank_deficient, "raw readings do not span enough range to determine the gain");
  }
  if (!identifiable) f = moments(current.gain);
  const double consensus_sys = numeric::pairwise_sum(us) / static_cast<double>(n);

  double gain = current.gain;
  double offset = 0.0;
  double var_gain = current.u_gain * current.u_gain;
  double var_offset = 0.0;
  double cov = 0.0;
  std::size_t params = 1;
  const double xbar = f.xbar;
  if (identifiable) {
    params = 2;
    gain = f.Sxy / f.Sxx_true;
    offset = f.ybar - gain * xbar;
    // y = gain * x + offset: var(gain) from the corrected moments,
    // var(offset) = 1/Sw + xbar^2 var(gain), cov = -xbar var(gain)
    var_gain = (f.Sxx_true + f.var_gain_extra) / (f.Sxx_true * f.Sxx_true);
    var_offset = 1.0 / f.Sw + xbar * xbar * var_gain;
    cov = -xbar * var_gain;
  } else {
    offset = f.ybar - gain * xbar;
    var_offset = 1.0 / f.Sw + xbar * xbar * var_gain;
    cov = -xbar * var_gain;
  }

  std::vector<double> chi(n), res2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = pairs[i].second->value - (gain * pairs[i].first->value + offset);
    res2[i] = r * r;
    chi[i] = w[i] * r * r;
  }
  const double dof = static_cast<double>(n - params);
  const double reduced_chi2 = numeric::pairwise_sum(chi) / dof;
  if (reduced_chi2 > 1.0) {
    var_offset *= reduced_chi2;
    if (identifiable) {
      var_gain *= reduced_chi2;
      cov *= reduced_chi2;
    }
  }
  var_offset += consensus_sys * consensus_sys;

  const double residual_var = numeric::pairwise_sum(res2) / dof;
  const double noise_var = residual_var - numeric::pairwise_sum(ur2) / static_cast<double>(n);

  RecalibrationResult result;
  auto& c = result.new_certificate;
  c = current;
  c.certificate_id = options.certificate_id.empty()
                         ? current.certificate_id + "-infield-" + std::to_string(tai_ns(options.recalibrated_at))
                         : options.certificate_id;
  c.provenance = Provenance::in_field;
  c.gain = gain;
  c.offset = offset;
  c.u_gain = std::sqrt(var_gain);
  c.u_offset = std::sqrt(var_offset);
  c.cov_gain_offset = std::clamp(cov, -c.u_gain * c.u_offset, c.u_gain * c.u_offset);
  c.u_noise = noise_var > 0.0 ? std::sqrt(noise_var) : current.u_noise;
  c.drift_rate = options.drift_rate;
  c.u_drift = options.u_drift;
  c.calibrated_at = options.recalibrated_at;
  c.valid_until = options.recalibrated_at + options.validity;
  c.offset_only = !identifiable;

  result.fit_residual_rms = std::sqrt(numeric::pairwise_sum(res2) / static_cast<double>(n));
  result.n_points = n;
  result.reduced_chi2 = reduced_chi2;
  if (identifiable) {
    // Jacobi-scaled normal matrix [[sum w x^2, sum w x], [sum w x, sum w]] (uncentred)
    const double a11 = f.Sxx_true + f.Sw * xbar * xbar;
    const double a12 = f.Sw * xbar;
    const double d = a12 / std::sqrt(a11 * f.Sw);
    result.condition_number = (1.0 + std::abs(d)) / std::max(1.0 - std::abs(d), 1e-300);
  } else {
    result.condition_number = std::numeric_limits<double>::infinity();
  }
  return result;
}

namespace {

// Consensus stream over `members` for each timestamp shared by all of them.
std::vector<Measurement> consensus_stream(const NetworkWindow& window, const std::vector<std::size_t>& members,
                                          const std::string& id) {
  std::vector<Measurement> out;
  if (members.empty()) return out;
  std::vector<std::unordered_map<std::int64_t, const Measurement*>> index(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    for (const auto& m : window.sensors[members[k]].calibrated) index[k].emplace(tai_ns(m.timestamp), &m);
  }
  std::vector<Measurement> at;
  for (const auto& m : window.sensors[members.front()].calibrated) {
    at.clear();
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto it = index[k].find(tai_ns(m.timestamp));
      if (it == index[k].end()) break;
      at.push_back(*it->second);
    }
    if (at.size() != members.size()) continue;
    out.push_back(virtual_sensor_fuse(at, id).measurement);
  }
  return out;
}

std::string consensus_id(const NetworkWindow& window, const std::vector<std::size_t>& members) {
  std::string id = "consensus(";
  for (std::size_t k = 0; k < members.size(); ++k) id += (k ? "+" : "") + window.sensors[members[k]].sensor_id;
  return id + ")";
}

}  // namespace

RecalibrationWorkflow::RecalibrationWorkflow(RecalibrationPolicy policy, unsigned threads)
    : policy_(std::move(policy)), threads_(std::max(1u, threads)) {}

std::vector<WorkflowEvent> RecalibrationWorkflow::step(const NetworkWindow& window,
                                                       std::map<std::string, TwinState>& twins) {
  std::vector<WorkflowEvent> events;
  const std::size_t n = window.sensors.size();
  std::vector<std::optional<DriftReport>> final_report(n);
  std::vector<bool> flagged(n, false);
  std::vector<std::string> errors(n);

  // Iterative leave-one-out scoring.
  while (true) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < n; ++i) {
      if (!flagged[i]) pool.push_back(i);
    }
    if (pool.size() < 3) break;

    std::vector<std::optional<DriftReport>> round(n);
    std::vector<std::string> round_errors(n);
    auto score = [&](std::size_t i) {
      std::vector<std::size_t> refs;
      for (auto j : pool) {
        if (j != i) refs.push_back(j);
      }
      try {
        const auto cons = consensus_stream(window, refs, consensus_id(window, refs));
        round[i] = drift_score(window.sensors[i].calibrated, cons, window.from, window.to, policy_.threshold_k);
      } catch (const Error& e) {
        round_errors[i] = e.what();
      }
    };
    if (threads_ > 1 && pool.size() > 1) {
      std::vector<std::future<void>> jobs;
      for (auto i : pool) jobs.push_back(std::async(std::launch::async, score, i));
      for (auto& j : jobs) j.get();
    } else {
      for (auto i : pool) score(i);
    }

    std::optional<std::size_t> worst;
    for (auto i : pool) {
      final_report[i] = round[i];
      errors[i] = round_errors[i];
      if (round[i] && round[i]->flagged && (!worst || round[i]->normalized_error > round[*worst]->normalized_error)) {
        worst = i;
      }
    }
    if (!worst) break;
    flagged[*worst] = true;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = window.sensors[i].sensor_id;
    if (final_report[i]) {
      WorkflowEvent e;
      e.kind = WorkflowEvent::Kind::drift_report;
      e.at = window.to;
      e.sensor_id = id;
      e.report = final_report[i];
      events.push_back(std::move(e));
    } else if (!errors[i].empty()) {
      events.push_back({WorkflowEvent::Kind::error, window.to, id, {}, {}, {}, {}, errors[i]});
    }
  }

  std::vector<std::size_t> clean;
  for (std::size_t i = 0; i < n; ++i) {
    if (!flagged[i]) clean.push_back(i);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = window.sensors[i].sensor_id;
    auto& track = tracks_[id];
    auto twin_it = twins.find(id);
    if (!flagged[i]) {
      track.consecutive_flags = 0;
      continue;
    }
    ++track.consecutive_flags;
    if (twin_it == twins.end()) continue;
    auto& twin = twin_it->second;
    twin.flags.insert(TwinFlag::drift_suspected);

    std::set<TwinDirective> directives{TwinDirective::drift_reported};
    const bool cooling = track.cooldown_until && window.to < *track.cooldown_until;
    if (cooling || track.consecutive_flags < policy_.confirm_windows) directives.insert(TwinDirective::cooldown_active);
    if (!twin_control(twin, directives).contains(TwinAction::request_recalibration)) continue;

    if (clean.size() < 2) {
      events.push_back({WorkflowEvent::Kind::error, window.to, id, {}, {}, {}, {},
                        "InsufficientRedundancy: fewer than two unflagged references"});
      continue;
    }
    try {
      const auto cons = consensus_stream(window, clean, consensus_id(window, clean));
      RecalibrationOptions opts = policy_.fit;
      opts.recalibrated_at = window.to;
      opts.certificate_id = id + "-infield-" + std::to_string(track.swaps + 1);
      auto result = infield_recalibrate(window.sensors[i].raw, cons, window.from, window.to, twin.certificate, opts);

      WorkflowEvent rec;
      rec.kind = WorkflowEvent::Kind::recalibration;
      rec.at = window.to;
      rec.sensor_id = id;
      rec.recalibration = result;
      rec.message = consensus_id(window, clean);
      events.push_back(rec);

      WorkflowEvent swap;
      swap.kind = WorkflowEvent::Kind::certificate_swap;
      swap.at = window.to;
      swap.sensor_id = id;
      swap.old_certificate_id = twin.certificate.certificate_id;
      swap.new_certificate_id = result.new_certificate.certificate_id;
      events.push_back(swap);

      twin = install_certificate(std::move(twin), result.new_certificate);
      track.cooldown_until = window.to + policy_.cooldown;
      track.consecutive_flags = 0;
      ++track.swaps;
    } catch (const Error& e) {
      events.push_back({WorkflowEvent::Kind::error, window.to, id, {}, {}, {}, {}, e.what()});
    }
  }
  return events;
}

std::string audit_json_line(const WorkflowEvent& e) {
  nlohmann::ordered_json j;
  j["at_tai_ns"] = tai_ns(e.at);
  j["at"] = format_rfc3339_utc(e.at);
  j["sensor_id"] = e.sensor_id;
  switch (e.kind) {
    case WorkflowEvent::Kind::drift_report: {
      const auto& r = *e.report;
      j["type"] = "drift_report";
      j["window_from_tai_ns"] = tai_ns(r.from);
      j["window_to_tai_ns"] = tai_ns(r.to);
      j["normalized_error"] = r.normalized_error;
      j["threshold_k"] = r.threshold_k;
      j["flagged"] = r.flagged;
      j["points"] = r.points;
      j["consensus_trace"] = r.consensus_trace;
      break;
    }
    case WorkflowEvent::Kind::recalibration: {
      const auto& r = *e.recalibration;
      const auto& c = r.new_certificate;
      j["type"] = "recalibration";
      j["certificate_id"] = c.certificate_id;
      j["gain"] = c.gain;
      j["u_gain"] = c.u_gain;
      j["offset"] = c.offset;
      j["u_offset"] = c.u_offset;
      j["cov_gain_offset"] = c.cov_gain_offset;
      j["u_noise"] = c.u_noise;
      j["offset_only"] = c.offset_only;
      j["fit_residual_rms"] = r.fit_residual_rms;
      j["n_points"] = r.n_points;
      j["condition_number"] = std::isfinite(r.condition_number) ? nlohmann::ordered_json(r.condition_number)
                                                                 : nlohmann::ordered_json(nullptr);
      j["reduced_chi2"] = r.reduced_chi2;
      j["consensus_trace"] = e.message;
      break;
    }
    case WorkflowEvent::Kind::certificate_swap:
      j["type"] = "certificate_swap";
      j["old_certificate_id"] = e.old_certificate_id;
      j["new_certificate_id"] = e.new_certificate_id;
      break;
    case WorkflowEvent::Kind::error:
      j["type"] = "error";
      j["message"] = e.message;
      break;
  }
  return j.dump();
}

}  // namespace metrotwin
