#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mmfe/energy_example.hpp"
#include "mmfe/errors.hpp"
#include "mmfe/parallel.hpp"
#include "mmfe/sim_harness.hpp"

using namespace mmfe;
using namespace mmfe::sim;

TEST(Simulate, QuietSystemCostsNothing) {
  lqg::DiscountedLqr p;
  p.a = Eigen::MatrixXd::Identity(2, 2) * 0.9;
  p.b = Eigen::MatrixXd::Ones(2, 1);
  p.q = Eigen::MatrixXd::Identity(2, 2);
  p.r = Eigen::MatrixXd::Identity(1, 1);
  p.noise_cov = Eigen::MatrixXd::Zero(2, 2);
  InitialDistribution init{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)};
  SimConfig cfg;
  cfg.replications = 100;
  const CostEstimate e = simulate_discounted_cost(p, init, Eigen::MatrixXd::Zero(1, 2), cfg);
  EXPECT_EQ(e.mean, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(Simulate, DefaultHorizonAndValidation) {
  EXPECT_EQ(SimConfig::default_horizon(0.5, 1e-8), 27);
  SimConfig cfg;
  cfg.replications = 1;
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(Simulate, DivergenceDetected) {
  lqg::DiscountedLqr p;
  p.a = Eigen::MatrixXd::Constant(1, 1, 3.0);
  p.b = Eigen::MatrixXd::Ones(1, 1);
  p.q = Eigen::MatrixXd::Ones(1, 1);
  p.r = Eigen::MatrixXd::Ones(1, 1);
  p.alpha = 0.99;
  p.noise_cov = Eigen::MatrixXd::Ones(1, 1);
  InitialDistribution init{Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1)};
  SimConfig cfg;
  cfg.replications = 10;
  cfg.discount = 0.99;
  EXPECT_THROW(simulate_discounted_cost(p, init, Eigen::MatrixXd::Zero(1, 1), cfg), InstabilityError);
}

TEST(Simulate, ScalarClosedForm) {
  // Uncontrolled scalar chain from a stationary start: E cost = var / (1 - alpha).
  lqg::DiscountedLqr p;
  p.a = Eigen::MatrixXd::Constant(1, 1, 0.5);
  p.b = Eigen::MatrixXd::Ones(1, 1);
  p.q = Eigen::MatrixXd::Ones(1, 1);
  p.r = Eigen::MatrixXd::Ones(1, 1);
  p.alpha = 0.8;
  p.noise_cov = Eigen::MatrixXd::Ones(1, 1);
  const double var = 1.0 / (1.0 - 0.25);
  InitialDistribution init{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, var)};
  SimConfig cfg;
  cfg.replications = 50'000;
  cfg.discount = 0.8;
  const CostEstimate e = simulate_discounted_cost(p, init, Eigen::MatrixXd::Zero(1, 1), cfg);
  EXPECT_LT(std::abs(e.mean - var / 0.2), 3.0 * e.std_error + e.truncation_bias_bound);
}

TEST(Simulate, SerialParallelBitwise) {
  const energy::EnergyParams params;
  const auto nf = energy::build_no_forecast(params);
  const auto sol = lqg::riccati_solve(nf.lqr);
  const auto init = InitialDistribution::from_second_moment(nf.initial_second_moment, 2, params.tau - params.tau0());
  SimConfig cfg;
  cfg.replications = 2000;
  const CostEstimate a = simulate_discounted_cost(nf.lqr, init, sol.gain, cfg, Execution::serial);
  const CostEstimate b = simulate_discounted_cost(nf.lqr, init, sol.gain, cfg, Execution::parallel);
  EXPECT_EQ(format_estimate("x", a), format_estimate("x", b));
  const PairEstimate pa = simulate_energy_pair(params, cfg, Execution::serial);
  const PairEstimate pb = simulate_energy_pair(params, cfg, Execution::parallel);
  EXPECT_EQ(format_estimate("f", pa.forecast), format_estimate("f", pb.forecast));
}

TEST(Simulate, InitialDistributionSplit) {
  Eigen::MatrixXd m(3, 3);
  m << 2.0, 0.5, 1.0, 0.5, 3.0, 0.0, 1.0, 0.0, 4.0;
  const auto init = InitialDistribution::from_second_moment(m, 2, 2.0);
  EXPECT_DOUBLE_EQ(init.mean(2), 2.0);
  EXPECT_DOUBLE_EQ(init.cov(2, 2), 0.0);
  EXPECT_DOUBLE_EQ(init.mean(0), 0.5);
  EXPECT_DOUBLE_EQ(init.cov(0, 0), 2.0 - 0.25);
}

TEST(JointPath, SurpriseIdentityAndCorrelation) {
  const MmfeModel m = MmfeModel::scalar(0.6, DisturbanceSchedule::with_default_lag(1.0, 0.95, 32.0));
  const long len = 100'000;
  const auto path = simulate_mmfe_joint_path(m, 2, len, 5);
  ASSERT_EQ(static_cast<long>(path.size()), len);
  // W_{n+1} - F_{n+1|n} is the period's weather surprise, with variance sigma2.
  double ss = 0.0;
  for (long n = 0; n + 1 < len; ++n) {
    const double s = path[n + 1].w(0) - path[n].forecasts.entry(1)(0);
    ss += s * s;
  }
  EXPECT_NEAR(ss / (len - 1), 1.0, 0.02);
  for (int lag : {1, 2, 4}) {
    double mx = 0.0, my = 0.0;
    const long k = len - lag;
    for (long n = 0; n < k; ++n) {
      mx += path[n].w(0);
      my += path[n + lag].w(0);
    }
    mx /= k;
    my /= k;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (long n = 0; n < k; ++n) {
      const double x = path[n].w(0) - mx, y = path[n + lag].w(0) - my;
      sxy += x * y;
      sxx += x * x;
      syy += y * y;
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    // Autocorrelated series: allow for the effective sample size.
    const double neff = k * (1 - 0.36) / (1 + 0.36);
    EXPECT_NEAR(corr, std::pow(0.6, lag), 3.0 * (1 - corr * corr) / std::sqrt(neff)) << lag;
  }
}

TEST(Trace, CsvShape) {
  const energy::EnergyParams params;
  const auto nf = energy::build_no_forecast(params);
  const auto sol = lqg::riccati_solve(nf.lqr);
  const auto init = InitialDistribution::from_second_moment(nf.initial_second_moment, 2, -8.0);
  SimConfig cfg;
  cfg.replications = 10;
  cfg.horizon_periods = 5;
  std::ostringstream os;
  write_trace_csv(os, nf.lqr, init, sol.gain, cfg, 3);
  std::istringstream in(os.str());
  std::string line;
  int rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "j,chi0,chi1,chi2,a0,discounted_cost");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
}
