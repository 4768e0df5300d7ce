#include <gtest/gtest.h>

#include <random>

#include "metrotwin/clock.hpp"
#include "metrotwin/error.hpp"
#include "oracle.hpp"

using namespace metrotwin;

namespace {

Timestamp at(double s) { return from_tai_ns(static_cast<std::int64_t>(std::llround(s * 1e9))); }

/// Exchange with node offset theta, forward delay fwd and reverse delay rev.
SyncExchange exchange(double t1, double theta, double fwd, double rev, double turnaround = 1e-4) {
  SyncExchange x;
  x.t1 = at(t1);
  x.t2 = at(t1 + fwd + theta);
  x.t3 = at(t1 + fwd + turnaround + theta);
  x.t4 = at(t1 + fwd + turnaround + rev);
  x.path_delay_fwd = fwd;
  x.path_delay_rev = rev;
  return x;
}

Measurement offset_point(double t, double value, double u) {
  Measurement m;
  m.timestamp = at(t);
  m.value = value;
  m.u_random = u;
  m.unit = units::second();
  m.kind = QuantityKind::time;
  m.source_id = "n1";
  return m;
}

}  // namespace

TEST(Sync, SymmetricExchangeIsExact) {
  const auto e = estimate_offset(exchange(100.0, 0.25, 1e-3, 1e-3), SyncModel{});
  EXPECT_NEAR(e.offset.value, 0.25, 1e-9);
  EXPECT_NEAR(e.mean_path_delay, 1e-3, 1e-9);
  EXPECT_EQ(e.offset.timestamp, at(100.0 + 2e-3 + 1e-4));
}

TEST(Sync, AsymmetryBiasIsHalfTheDifference) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> theta(-0.5, 0.5), delay(1e-4, 5e-3);
  for (int i = 0; i < 100; ++i) {
    const double th = theta(gen), f = delay(gen), r = delay(gen);
    const auto e = estimate_offset(exchange(10.0 * i, th, f, r), SyncModel{});
    EXPECT_NEAR(e.offset.value, th + 0.5 * (f - r), 2e-9);
    EXPECT_NEAR(e.mean_path_delay, 0.5 * (f + r), 2e-9);
  }
}

TEST(Sync, UncertaintyBudget) {
  const SyncModel model{.jitter_sigma = 1e-6, .collector_jitter = 2e-6, .asymmetry_bound = 3e-6};
  const auto e = estimate_offset(exchange(1.0, 0.0, 1e-3, 1e-3), model);
  EXPECT_NEAR(e.offset.u_random, std::sqrt(0.5 * (1e-12 + 4e-12)), 1e-18);
  EXPECT_NEAR(e.offset.u_systematic, 3e-6 / std::sqrt(3.0), 1e-18);
  EXPECT_EQ(e.offset.unit, units::second());
}

TEST(Sync, JitterUncertaintyMatchesMonteCarlo) {
  const double sn = 2e-6, sc = 1e-6;
  std::mt19937_64 gen(21);
  std::normal_distribution<double> node(0, sn), coll(0, sc);
  std::vector<double> est;
  for (int i = 0; i < 100'000; ++i) {
    const double t1 = 1.0 + coll(gen), t2 = 1.001 + node(gen), t3 = 1.0011 + node(gen), t4 = 1.0021 + coll(gen);
    est.push_back(0.5 * ((t2 - t1) - (t4 - t3)));
  }
  const auto mc = oracle::moments(est);
  const auto e = estimate_offset(exchange(1.0, 0.0, 1e-3, 1e-3), {.jitter_sigma = sn, .collector_jitter = sc});
  EXPECT_NEAR(e.offset.u_random, mc.stddev, 4 * oracle::stddev_standard_error(mc.stddev, est.size()));
}

TEST(Sync, NegativeDelayRejected) {
  try {
    estimate_offset(exchange(1.0, 0.0, -2e-3, -2e-3), SyncModel{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::negative_delay);
  }
}

TEST(Discipline, RecoversExactLine) {
  std::vector<Measurement> h;
  for (int i = 0; i < 10; ++i) h.push_back(offset_point(100.0 + 10 * i, 0.02 + 5e-5 * (10 * i), 1e-6));
  const auto e = discipline_clock(h);
  EXPECT_EQ(e.node_id, "n1");
  EXPECT_EQ(e.points, 10u);
  EXPECT_EQ(e.reference, at(145.0));
  EXPECT_NEAR(e.skew, 5e-5, 1e-12);
  EXPECT_NEAR(e.offset_at(at(100.0)), 0.02, 1e-10);
  EXPECT_NEAR(e.u_offset, 1e-6 / std::sqrt(10.0), 1e-15);
  EXPECT_NEAR(e.cov_offset_skew, 0.0, 1e-20);
}

TEST(Discipline, EqualWeightsAgreeWithOrdinaryLeastSquares) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> z(0, 1e-5);
  std::vector<Measurement> h;
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(7.0 * i);
    y.push_back(-0.3 + 2e-5 * x.back() + z(gen));
    h.push_back(offset_point(x.back(), y.back(), 1e-5));
  }
  const auto ols = oracle::least_squares(x, y);
  const auto e = discipline_clock(h);
  EXPECT_NEAR(e.skew, ols.a, 1e-12);
  EXPECT_NEAR(e.offset_at(at(0.0)), ols.b, 1e-11);
}

TEST(Discipline, ParameterUncertaintyMatchesMonteCarlo) {
  std::mt19937_64 gen(33);
  std::vector<double> u;
  for (int i = 0; i < 12; ++i) u.push_back(1e-6 * (1 + i % 3));
  std::vector<double> skews, extrapolated;
  ClockEstimate last;
  for (int rep = 0; rep < 4000; ++rep) {
    std::vector<Measurement> h;
    for (int i = 0; i < 12; ++i) {
      h.push_back(offset_point(5.0 * i, 0.1 + 1e-5 * 5.0 * i + std::normal_distribution<double>(0, u[i])(gen), u[i]));
    }
    last = discipline_clock(h);
    skews.push_back(last.skew);
    extrapolated.push_back(last.offset_at(at(120.0)));
  }
  const auto ms = oracle::moments(skews);
  const auto me = oracle::moments(extrapolated);
  EXPECT_NEAR(last.u_skew, ms.stddev, 4 * oracle::stddev_standard_error(ms.stddev, skews.size()));
  EXPECT_NEAR(last.u_offset_at(at(120.0)), me.stddev, 4 * oracle::stddev_standard_error(me.stddev, 4000));
}

TEST(Discipline, UnweightedFallbackUsesResiduals) {
  std::vector<Measurement> h;
  for (int i = 0; i < 6; ++i) h.push_back(offset_point(i, (i % 2 ? 1e-6 : -1e-6), 0.0));
  const auto e = discipline_clock(h);
  EXPECT_GT(e.u_offset, 0.0);
  EXPECT_GT(e.u_skew, 0.0);
}

TEST(Discipline, Errors) {
  const std::vector<Measurement> one{offset_point(1, 0, 1e-6)};
  EXPECT_THROW(discipline_clock(one), Error);
  const std::vector<Measurement> same{offset_point(1, 0, 1e-6), offset_point(1, 1e-6, 1e-6)};
  try {
    discipline_clock(same);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_fit);
  }
}

TEST(ClockEstimate, ToTrueTimeInvertsModel) {
  ClockEstimate e = ClockEstimate::identity("n1");
  e.offset = 0.35;
  e.skew = 8e-4;
  e.reference = at(1000.0);
  const auto model = e.to_clock_model();
  for (double t : {0.0, 999.0, 5000.0, 86400.0}) {
    const auto local = local_time(model, at(t), 0);
    EXPECT_LE(std::abs(tai_ns(e.to_true_time(local)) - tai_ns(at(t))), 2) << t;
  }
}

TEST(ClockEstimate, IdentityIsExact) {
  const auto e = ClockEstimate::identity("n");
  EXPECT_EQ(e.to_true_time(at(12.5)), at(12.5));
  EXPECT_EQ(e.u_offset_at(at(1e6)), 0.0);
}

TEST(ClockModel, Validation) {
  ClockModel m{"n", 0.0, 2e-3};
  EXPECT_THROW(m.validate(), Error);
  m.skew = 0.0;
  m.jitter_sigma = -1;
  EXPECT_THROW(m.validate(), Error);
}
