#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mmfe/errors.hpp"
#include "mmfe/mmfe_core.hpp"
#include "mmfe/random.hpp"
#include "oracles.hpp"

using namespace mmfe;

namespace {

MmfeModel scalar_model(double g = 0.6, double sigma2 = 1.0, double gamma = 0.95, double mean_z = 32.0, int lag = 0) {
  DisturbanceSchedule s = DisturbanceSchedule::with_default_lag(sigma2, gamma, mean_z);
  if (lag > 0) s.trunc_lag = lag;
  return MmfeModel::scalar(g, s);
}

double oracle_forecast(const MmfeModel& m, const EpsilonArray& eps, double w_k, long k, long n) {
  return oracle::forecast(m.g()(0, 0), m.mean_z()(0), m.trunc_lag(), w_k, k, n,
                          [&](long t, long j) { return eps.at(t, j, 0); });
}

}  // namespace

TEST(Schedule, DefaultTruncationLag) {
  EXPECT_EQ(DisturbanceSchedule::default_trunc_lag(0.95), 270);
  EXPECT_EQ(DisturbanceSchedule::default_trunc_lag(0.0), 1);
  const auto s = DisturbanceSchedule::with_default_lag(2.0, 0.5, 0.0);
  EXPECT_DOUBLE_EQ(s.lag_variance(0), 2.0);
  EXPECT_DOUBLE_EQ(s.lag_variance(2), 2.0 * std::pow(0.5, 4));
  EXPECT_EQ(s.lag_variance(s.trunc_lag + 1), 0.0);
}

TEST(Model, RejectsExplosiveG) {
  const auto s = DisturbanceSchedule::with_default_lag(1.0, 0.5, 0.0);
  EXPECT_THROW(MmfeModel::scalar(1.0, s), ParameterError);
  EXPECT_THROW(MmfeModel(Eigen::MatrixXd::Identity(2, 3) * 0.5, {s, s}), ShapeError);
}

TEST(Model, MeanStructure) {
  const MmfeModel m = scalar_model();
  EXPECT_NEAR(m.mean_w()(0), 80.0, 1e-12);
}

TEST(Forecast, SameTimeReturnsCurrentWeather) {
  const MmfeModel m = scalar_model();
  const EpsilonArray eps = sample_epsilon_array(m, {1, 20, std::nullopt}, 7);
  EXPECT_DOUBLE_EQ(forecast(m, eps, vec1(81.5), 5, 5)(0), 81.5);
}

TEST(Forecast, ZeroNoiseIsArConditionalMean) {
  const MmfeModel m = scalar_model(0.6, 1.0, 0.95, 0.0, 5);
  EpsilonArray eps(1, 5, {0, 10, std::nullopt});
  EXPECT_NEAR(forecast(m, eps, vec1(10.0), 3, 5)(0), 3.6, 1e-14);
}

TEST(Forecast, MatchesClosedFormOracle) {
  const MmfeModel m = scalar_model(0.7, 1.3, 0.8, 5.0);
  const EpsilonArray eps = sample_epsilon_array(m, {1, 40, std::nullopt}, 11);
  for (long k : {1L, 4L, 9L}) {
    for (long n = k; n <= k + 25; ++n) {
      const double w_k = 20.0 + static_cast<double>(k);
      EXPECT_NEAR(forecast(m, eps, vec1(w_k), k, n)(0), oracle_forecast(m, eps, w_k, k, n), 1e-12);
    }
  }
}

TEST(Forecast, RejectsRevealAfterTarget) {
  const MmfeModel m = scalar_model();
  const EpsilonArray eps = sample_epsilon_array(m, {1, 5, std::nullopt}, 1);
  EXPECT_THROW(forecast(m, eps, vec1(0.0), 4, 3), InvalidHorizonError);
  EXPECT_THROW(martingale_difference(m, eps, 3, 4), InvalidHorizonError);
}

TEST(Forecast, MissingEntriesAreReported) {
  const MmfeModel m = scalar_model();
  const EpsilonArray eps = sample_epsilon_array(m, {1, 5, std::nullopt}, 1);
  EXPECT_THROW(forecast(m, eps, vec1(0.0), 1, 9), IncompleteArrayError);
}

TEST(MartingaleDifference, Identities) {
  const MmfeModel m = scalar_model();
  const EpsilonArray eps = sample_epsilon_array(m, {1, 30, std::nullopt}, 3);
  EXPECT_DOUBLE_EQ(martingale_difference(m, eps, 7, 7)(0), eps.at(7, 7, 0));
  const double w0 = 79.0;
  for (long n = 1; n <= 30; ++n) {
    for (long k = 1; k <= n; ++k) {
      const double fk = forecast(m, eps, realized_weather(m, eps, vec1(w0), 0, k), k, n)(0);
      const double fk1 = forecast(m, eps, realized_weather(m, eps, vec1(w0), 0, k - 1), k - 1, n)(0);
      EXPECT_NEAR(fk - fk1, martingale_difference(m, eps, n, k)(0), 1e-12);
    }
    double telescoped = forecast(m, eps, vec1(w0), 0, n)(0);
    for (long k = 1; k <= n; ++k) telescoped += martingale_difference(m, eps, n, k)(0);
    EXPECT_NEAR(telescoped, realized_weather(m, eps, vec1(w0), 0, n)(0), 1e-12);
  }
}

TEST(Roll, ZeroNoiseShift) {
  const MmfeModel m = scalar_model(0.6, 1.0, 0.95, 0.0, 4);
  ForecastVector f{0, {vec1(2.0), vec1(1.2)}};
  FreshNoise fresh{{vec1(0.0), vec1(0.0), vec1(0.0)}, vec1(0.0)};
  const RollResult r = roll_forecast_vector(m, f, fresh);
  EXPECT_DOUBLE_EQ(r.w_next(0), 2.0);
  EXPECT_NEAR(r.next.entry(1)(0), 1.2, 1e-15);
  EXPECT_NEAR(r.next.entry(2)(0), 0.72, 1e-15);
  EXPECT_EQ(r.next.base_time, 1);
}

TEST(Roll, ArbitraryStartValues) {
  const MmfeModel m = scalar_model();
  ForecastVector f{0, {vec1(100.0), vec1(-7.0)}};
  FreshNoise fresh{{vec1(0.3), vec1(-0.2), vec1(0.1)}, vec1(0.5)};
  const RollResult r = roll_forecast_vector(m, f, fresh);
  EXPECT_TRUE(std::isfinite(r.w_next(0)));
  EXPECT_EQ(r.next.horizon(), 2);
  EXPECT_DOUBLE_EQ(r.w_next(0), 100.3);
}

TEST(Roll, AgreesWithDirectForecasts) {
  for (int r : {1, 2, 4}) {
    const MmfeModel m = scalar_model(0.6, 1.0, 0.9);
    const EpsilonArray eps = sample_epsilon_array(m, {1, 60, std::nullopt}, 5 + r);
    const double w0 = 83.0;
    ForecastVector fv = forecast_vector(m, eps, vec1(w0), 0, r);
    for (TimeIndex n = 0; n < 40; ++n) {
      const RollResult step = roll_forecast_vector(m, fv, fresh_noise_from_array(m, eps, n, r));
      const Eigen::VectorXd w_next = realized_weather(m, eps, vec1(w0), 0, n + 1);
      EXPECT_NEAR(step.w_next(0), w_next(0), 1e-12);
      for (int j = 1; j <= r; ++j) {
        EXPECT_NEAR(step.next.entry(j)(0), oracle_forecast(m, eps, w_next(0), n + 1, n + 1 + j), 1e-11);
      }
      std::vector<double> scalar(fv.values.size());
      for (int j = 0; j < r; ++j) scalar[j] = fv.values[j](0);
      const FreshNoise fresh = fresh_noise_from_array(m, eps, n, r);
      std::vector<double> reveal;
      for (const auto& e : fresh.reveal) reveal.push_back(e(0));
      const double ws = roll_forecast_scalar(0.6, m.mean_z()(0), scalar, reveal, fresh.aggregate(0));
      EXPECT_NEAR(ws, step.w_next(0), 1e-12);
      for (int j = 0; j < r; ++j) EXPECT_NEAR(scalar[j], step.next.values[j](0), 1e-12);
      fv = step.next;
    }
  }
}

TEST(ConditionalStep, NoNewInformation) {
  const MmfeModel m = scalar_model();
  const Eigen::VectorXd f_cur = vec1(81.0), f_next = vec1(80.4);
  const Eigen::VectorXd w = conditional_weather_step(m, f_cur, f_next, f_cur, {});
  EXPECT_NEAR(w(0), 80.4, 1e-12);
}

TEST(ConditionalStep, VarianceIsGeometricPartialSum) {
  const MmfeModel m = scalar_model(0.6, 1.5, 0.9);
  double prev = 0.0;
  for (TimeIndex n = 3; n < 30; ++n) {
    double expect = 0.0;
    for (TimeIndex j = 0; j <= n - 3; ++j) expect += 1.5 * std::pow(0.9, 2.0 * static_cast<double>(j));
    const double v = conditional_noise_variance(m, n, 3)(0);
    EXPECT_NEAR(v, expect, 1e-12);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(ConditionalStep, MonteCarloMatchesResimulation) {
  // W_n given the frozen time-0 array: chain of conditional steps versus the
  // closed-form sum with fresh post-0 entries.
  const MmfeModel m = scalar_model(0.6, 1.0, 0.9, 32.0, 40);
  const EpsilonArray frozen = sample_epsilon_array(m, {1, 6, 0}, 99);
  const double w0 = 82.0;
  const int n_target = 5;
  const long reps = 100'000;
  std::vector<double> chain(reps), direct(reps);
  std::vector<double> f0(n_target + 1);
  for (int n = 0; n <= n_target; ++n) f0[n] = forecast(m, frozen, vec1(w0), 0, n)(0);
  for (long rep = 0; rep < reps; ++rep) {
    EpsilonArray full(1, m.trunc_lag(), {1, n_target, std::nullopt});
    for (TimeIndex t = 1; t <= n_target; ++t) {
      for (TimeIndex r = t - m.trunc_lag(); r <= t; ++r) {
        const double v = r <= 0 ? frozen.at(t, r, 0) : epsilon_draw(m, hash_words({7, static_cast<std::uint64_t>(rep)}), t, r, 0);
        full.set(t, r, 0, v);
      }
    }
    Eigen::VectorXd w = vec1(w0);
    for (int n = 0; n < n_target; ++n) {
      std::vector<Eigen::VectorXd> post;
      for (TimeIndex r = 1; r <= n + 1; ++r) post.push_back(full.at(n + 1, r));
      w = conditional_weather_step(m, w, vec1(f0[n + 1]), vec1(f0[n]), post);
    }
    chain[rep] = w(0);
    direct[rep] = oracle::forecast(0.6, 32.0, m.trunc_lag(), w0, 0, n_target,
                                   [&](long t, long j) { return j <= 0 ? frozen.at(t, j, 0) : full.at(t, j, 0); });
    // The oracle drops reveals after k = 0, so add them back for the realized value.
    for (TimeIndex t = 1; t <= n_target; ++t) {
      for (TimeIndex r = 1; r <= t; ++r) direct[rep] += std::pow(0.6, n_target - t) * full.at(t, r, 0);
    }
  }
  auto mean_var = [](const std::vector<double>& x) {
    double mu = 0.0, v = 0.0;
    for (double a : x) mu += a;
    mu /= static_cast<double>(x.size());
    for (double a : x) v += (a - mu) * (a - mu);
    return std::pair{mu, v / static_cast<double>(x.size() - 1)};
  };
  const auto [m1, v1] = mean_var(chain);
  const auto [m2, v2] = mean_var(direct);
  const double se = std::sqrt((v1 + v2) / static_cast<double>(reps));
  EXPECT_LT(std::abs(m1 - m2), 3.0 * se);
  // Variance agreement: se of a sample variance is about v sqrt(2/N).
  EXPECT_LT(std::abs(v1 - v2), 3.0 * v1 * std::sqrt(4.0 / static_cast<double>(reps)));
  EXPECT_NEAR(m1, f0[n_target], 4.0 * std::sqrt(v1 / static_cast<double>(reps)));
}

TEST(ConditionalRoll, ExhaustedInformationMatchesPlainRoll) {
  const MmfeModel m = scalar_model(0.6, 1.0, 0.9, 32.0, 6);
  const EpsilonArray frozen = sample_epsilon_array(m, {1, 30, 0}, 4);
  const int r = 2;
  // With n + 1 + r - 6 > 0 every frozen entry lies beyond the lag.
  EXPECT_EQ(g0_aggregate(m, frozen, 10, r)(0), 0.0);
  ForecastVector fv{10, {vec1(80.5), vec1(79.0)}};
  FreshNoise fresh{{vec1(0.1), vec1(0.2), vec1(-0.3)}, vec1(0.4)};
  const RollResult a = conditional_forecast_roll(m, fv, g0_aggregate(m, frozen, 10, r), fresh);
  const RollResult b = roll_forecast_vector(m, fv, fresh);
  EXPECT_EQ(a.w_next(0), b.w_next(0));
  for (int j = 1; j <= r; ++j) EXPECT_EQ(a.next.entry(j)(0), b.next.entry(j)(0));
}

TEST(ConditionalRoll, ZeroNoiseMeanIsDeterministicPart) {
  const MmfeModel m = scalar_model(0.6, 1.0, 0.9, 32.0);
  const EpsilonArray frozen = sample_epsilon_array(m, {1, 20, 0}, 12);
  ForecastVector fv{2, {vec1(81.0), vec1(80.2)}};
  const Eigen::VectorXd agg = g0_aggregate(m, frozen, 2, 2);
  FreshNoise zero{{vec1(0.0), vec1(0.0), vec1(0.0)}, vec1(0.0)};
  const RollResult res = conditional_forecast_roll(m, fv, agg, zero);
  EXPECT_NEAR(res.w_next(0), 81.0, 1e-12);
  EXPECT_NEAR(res.next.entry(1)(0), 80.2, 1e-12);
  EXPECT_NEAR(res.next.entry(2)(0), 0.6 * 80.2 + 32.0 + agg(0), 1e-12);
}

TEST(ConditionalRoll, PlumeGrowsWithTime) {
  const MmfeModel m = scalar_model(0.6, 1.0, 0.95);
  double prev = -1.0;
  for (TimeIndex n = 0; n < 50; ++n) {
    const double v = roll_increment_covariances(m, 2, n).back()(0, 0);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_LE(prev, roll_increment_covariances(m, 2).back()(0, 0) + 1e-12);
}

TEST(Sampling, DeterministicAndDegenerate) {
  const MmfeModel m = scalar_model();
  const EpsilonArray a = sample_epsilon_array(m, {1, 10, std::nullopt}, 42);
  const EpsilonArray b = sample_epsilon_array(m, {1, 10, std::nullopt}, 42);
  const EpsilonArray wide = sample_epsilon_array(m, {-5, 20, std::nullopt}, 42);
  for (TimeIndex t = 1; t <= 10; ++t) {
    for (TimeIndex r = t - 5; r <= t; ++r) {
      EXPECT_EQ(a.at(t, r, 0), b.at(t, r, 0));
      EXPECT_EQ(a.at(t, r, 0), wide.at(t, r, 0));
    }
  }
  const MmfeModel zero = scalar_model(0.6, 0.0, 0.9);
  const EpsilonArray z = sample_epsilon_array(zero, {1, 10, std::nullopt}, 42);
  for (TimeIndex t = 1; t <= 10; ++t) EXPECT_EQ(z.at(t, t - 1, 0), 0.0);
}

TEST(Sampling, LagOneVariance) {
  const MmfeModel m = scalar_model(0.6, 1.0, 0.95);
  const long n = 1'000'000;
  double ss = 0.0, s = 0.0;
  for (long i = 0; i < n; ++i) {
    const double e = epsilon_draw(m, 17, i + 1, i, 0);
    s += e;
    ss += e * e;
  }
  const double var = ss / n - (s / n) * (s / n);
  EXPECT_NEAR(var / (0.95 * 0.95), 1.0, 0.01);
}

TEST(JointPath, CsvHeader) {
  std::vector<PathRecord> path{{0, vec1(80.0), ForecastVector{0, {vec1(79.5), vec1(79.9)}}}};
  std::ostringstream os;
  write_path_csv(os, path);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "n,W_n,F_{n+1|n},F_{n+2|n}");
}
