#pragma once

// Building-temperature control example. The outdoor temperature W is AR(1)
// with coefficient g and forecast noise schedule sigma2 * gamma^(2j); the
// indoor-outdoor gap X - W reverts with coefficient rho. Two controllers are
// compared: one that sees (W, X) only, and one that also sees the rolling
// two-period forecast (F_{n+1|n}, F_{n+2|n}).

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmfe/lqg.hpp"
#include "mmfe/mmfe_core.hpp"

namespace mmfe::energy {

struct EnergyParams {
  double g = 0.6;
  double rho = 0.3;
  double kappa = 1.0;
  double alpha = 0.9;
  double tau = 74.0;
  double mean_w = 80.0;
  double mean_v = 2.0;
  double sigma2 = 1.0;
  double sigma2_v = 1.0;
  double gamma = 0.95;
  /// Forecast truncation lag; the default follows DisturbanceSchedule::default_trunc_lag(gamma).
  std::optional<int> trunc_lag;

  void validate() const;

  double mean_z() const { return (1.0 - g) * mean_w; }
  /// Uncontrolled equilibrium indoor temperature.
  double tau0() const { return mean_w + mean_v / (1.0 - rho); }
  int effective_trunc_lag() const;
  DisturbanceSchedule schedule() const;
  MmfeModel weather_model() const;
  /// var Z_0 as the truncated geometric sum of the schedule.
  double var_z() const;
};

/// A controlled linear system together with the second moment of its
/// (stationary, uncontrolled) initial state.
struct SystemBundle {
  lqg::DiscountedLqr lqr;
  Eigen::MatrixXd initial_second_moment;
  std::vector<std::string> labels;
};

/// State (W~, X~, Y).
SystemBundle build_no_forecast(const EnergyParams& params);

/// State (W~, F~_{n+1|n}, F~_{n+2|n}, X~, Y), initial moments from the closed forms.
SystemBundle build_dynamic_forecast(const EnergyParams& params);

/// Covariance C of the forecast-system noise vector.
Eigen::MatrixXd forecast_noise_cov(const EnergyParams& params);

/// Closed-form E[chi_0 chi_0'] for the forecast system.
Eigen::MatrixXd forecast_second_moment_closed_form(const EnergyParams& params);

/// The same second moment from the Lyapunov fixed point of the 4x4 stochastic
/// block, with the constant coordinate appended analytically.
Eigen::MatrixXd forecast_second_moment_lyapunov(const EnergyParams& params);

struct CostBreakdown {
  lqg::RiccatiSolution no_forecast;
  lqg::RiccatiSolution forecast;
  double cost_no_forecast = 0.0;
  double cost_forecast = 0.0;
  double d_percent = 0.0;
};

/// Expanded closed form of the no-forecast expected optimal cost.
double expected_cost_no_forecast(const EnergyParams& params);
double expected_cost_no_forecast(const EnergyParams& params, const lqg::RiccatiSolution& sol);

/// Sum over K(i,j) * E chi_0(i) chi_0(j) plus alpha/(1-alpha) tr(K C).
double expected_cost_forecast(const EnergyParams& params);
double expected_cost_forecast(const EnergyParams& params, const lqg::RiccatiSolution& sol);

/// Percentage cost reduction from using the forecasts. Throws
/// UndefinedMetricError when the no-forecast cost is zero.
double improvement_d(double cost_no_forecast, double cost_forecast);
double improvement_d(const EnergyParams& params);

/// Solves both systems once and returns costs and D.
CostBreakdown evaluate(const EnergyParams& params, const lqg::RiccatiOptions& options = {});

/// Coefficients (c_w, c_x, c_y) with optimal no-forecast action
/// c_w W~ + c_x X~ + c_y Y, expanded entrywise from K.
Eigen::Vector3d no_forecast_action_coefficients(const EnergyParams& params, const Eigen::MatrixXd& k);

}  // namespace mmfe::energy
