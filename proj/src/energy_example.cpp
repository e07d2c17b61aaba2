#include "mmfe/energy_example.hpp"

#include <cmath>

#include "mmfe/errors.hpp"

namespace mmfe::energy {

void EnergyParams::validate() const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!(g > 0.0 && g < 1.0)) throw ParameterError("g must lie in (0, 1)");
  if (!(rho > 0.0 && rho < g)) throw ParameterError("rho must lie in (0, g)");
  if (!(kappa > 0.0) || !finite(kappa)) throw ParameterError("kappa must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in [0, 1)");
  if (!(sigma2 >= 0.0) || !finite(sigma2)) throw ParameterError("sigma2 must be >= 0");
  if (!(sigma2_v >= 0.0) || !finite(sigma2_v)) throw ParameterError("sigma2_v must be >= 0");
  if (!finite(tau) || !finite(mean_w) || !finite(mean_v)) throw ParameterError("tau, mean_w and mean_v must be finite");
  if (trunc_lag && *trunc_lag < 1) throw ParameterError("trunc_lag must be >= 1");
}

int EnergyParams::effective_trunc_lag() const {
  return trunc_lag ? *trunc_lag : DisturbanceSchedule::default_trunc_lag(gamma);
}

DisturbanceSchedule EnergyParams::schedule() const {
  return DisturbanceSchedule{sigma2, gamma, mean_z(), effective_trunc_lag()};
}

MmfeModel EnergyParams::weather_model() const { return MmfeModel::scalar(g, schedule()); }

double EnergyParams::var_z() const { return schedule().total_variance(); }

SystemBundle build_no_forecast(const EnergyParams& p) {
  p.validate();
  const double g = p.g, rho = p.rho;
  SystemBundle out;
  auto& lqr = out.lqr;
  lqr.a.resize(3, 3);
  lqr.a << g, 0, 0,
           g - rho, rho, 0,
           0, 0, 1;
  lqr.b = Eigen::Vector3d(0, 1, 0);
  lqr.q.resize(3, 3);
  lqr.q << 0, 0, 0,
           0, 1, -1,
           0, -1, 1;
  lqr.r = Eigen::MatrixXd::Constant(1, 1, p.kappa);
  lqr.alpha = p.alpha;

  const double sz = p.var_z();
  lqr.noise_cov.resize(3, 3);
  lqr.noise_cov << sz, sz, 0,
                   sz, sz + p.sigma2_v, 0,
                   0, 0, 0;

  const double var_w = sz / (1.0 - g * g);
  const double var_x = var_w + p.sigma2_v / (1.0 - rho * rho);
  const double y = p.tau - p.tau0();
  out.initial_second_moment.resize(3, 3);
  out.initial_second_moment << var_w, var_w, 0,
                               var_w, var_x, 0,
                               0, 0, y * y;
  out.labels = {"W~", "X~", "Y"};
  return out;
}

Eigen::MatrixXd forecast_noise_cov(const EnergyParams& p) {
  p.validate();
  const DisturbanceSchedule s = p.schedule();
  const double g = p.g;
  const double v0 = s.lag_variance(0), v1 = s.lag_variance(1), v2 = s.lag_variance(2);
  // Long-horizon aggregate: every lag beyond 2 up to the truncation lag.
  const double tail = s.lag_variance_sum(3, s.trunc_lag);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(5, 5);
  c(0, 0) = v0;
  c(0, 1) = g * v0;
  c(0, 2) = g * g * v0;
  c(0, 3) = v0;
  c(1, 1) = v1 + g * g * v0;
  c(1, 2) = g * v1 + g * g * g * v0;
  c(1, 3) = g * v0;
  c(2, 2) = v2 + g * g * v1 + std::pow(g, 4) * v0 + tail;
  c(2, 3) = g * g * v0;
  c(3, 3) = v0 + p.sigma2_v;
  return c.selfadjointView<Eigen::Upper>();
}

Eigen::MatrixXd forecast_second_moment_closed_form(const EnergyParams& p) {
  const Eigen::MatrixXd c = forecast_noise_cov(p);
  const double g = p.g;
  const double f2 = c(2, 2) / (1.0 - g * g);  // var F~_{2|0}
  const double var_w = p.var_z() / (1.0 - g * g);
  const double y = p.tau - p.tau0();

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
  m(0, 0) = var_w;
  m(1, 1) = f2 + c(1, 1);
  m(2, 2) = f2;
  m(0, 1) = g * f2 + c(1, 2) + c(0, 1);
  m(0, 2) = g * g * f2 + g * c(1, 2) + c(0, 2);
  m(1, 2) = g * f2 + c(1, 2);
  m(0, 3) = m(0, 0);
  m(1, 3) = m(0, 1);
  m(2, 3) = m(0, 2);
  m(3, 3) = var_w + p.sigma2_v / (1.0 - p.rho * p.rho);
  m(4, 4) = y * y;
  return m.selfadjointView<Eigen::Upper>();
}

Eigen::MatrixXd forecast_second_moment_lyapunov(const EnergyParams& p) {
  const SystemBundle sys = build_dynamic_forecast(p);
  const Eigen::MatrixXd block =
      lqg::lyapunov_stationary_cov(sys.lqr.a.topLeftCorner(4, 4), sys.lqr.noise_cov.topLeftCorner(4, 4));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(5, 5);
  m.topLeftCorner(4, 4) = block;
  const double y = p.tau - p.tau0();
  m(4, 4) = y * y;
  return m;
}

SystemBundle build_dynamic_forecast(const EnergyParams& p) {
  p.validate();
  const double g = p.g, rho = p.rho;
  SystemBundle out;
  auto& lqr = out.lqr;
  lqr.a.resize(5, 5);
  lqr.a << 0, 1, 0, 0, 0,
           0, 0, 1, 0, 0,
           0, 0, g, 0, 0,
           -rho, 1, 0, rho, 0,
           0, 0, 0, 0, 1;
  lqr.b = Eigen::VectorXd::Unit(5, 3);
  lqr.q = Eigen::MatrixXd::Zero(5, 5);
  lqr.q(3, 3) = lqr.q(4, 4) = 1.0;
  lqr.q(3, 4) = lqr.q(4, 3) = -1.0;
  lqr.r = Eigen::MatrixXd::Constant(1, 1, p.kappa);
  lqr.alpha = p.alpha;
  lqr.noise_cov = forecast_noise_cov(p);
  out.initial_second_moment = forecast_second_moment_closed_form(p);
  out.labels = {"W~", "F~_{n+1|n}", "F~_{n+2|n}", "X~", "Y"};
  return out;
}

double expected_cost_no_forecast(const EnergyParams& p, const lqg::RiccatiSolution& sol) {
  const Eigen::MatrixXd& k = sol.k;
  const double sz = p.var_z();
  const double var_w = sz / (1.0 - p.g * p.g);
  const double var_x = var_w + p.sigma2_v / (1.0 - p.rho * p.rho);
  const double y = p.tau - p.tau0();
  const double start = k(0, 0) * var_w + 2.0 * k(0, 1) * var_w + k(1, 1) * var_x + k(2, 2) * y * y;
  const double noise = k(0, 0) * sz + 2.0 * k(0, 1) * sz + k(1, 1) * (sz + p.sigma2_v);
  return start + p.alpha / (1.0 - p.alpha) * noise;
}

double expected_cost_no_forecast(const EnergyParams& p) {
  const SystemBundle sys = build_no_forecast(p);
  return expected_cost_no_forecast(p, lqg::riccati_solve(sys.lqr));
}

double expected_cost_forecast(const EnergyParams& p, const lqg::RiccatiSolution& sol) {
  const Eigen::MatrixXd m = forecast_second_moment_closed_form(p);
  const Eigen::MatrixXd c = forecast_noise_cov(p);
  double start = 0.0, noise = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      start += sol.k(i, j) * m(i, j);
      noise += sol.k(i, j) * c(i, j);
    }
  }
  return start + p.alpha / (1.0 - p.alpha) * noise;
}

double expected_cost_forecast(const EnergyParams& p) {
  const SystemBundle sys = build_dynamic_forecast(p);
  return expected_cost_forecast(p, lqg::riccati_solve(sys.lqr));
}

double improvement_d(double cost_no_forecast, double cost_forecast) {
  if (cost_no_forecast == 0.0) throw UndefinedMetricError("D is undefined when the no-forecast cost is zero");
  return 100.0 * (cost_no_forecast - cost_forecast) / cost_no_forecast;
}

double improvement_d(const EnergyParams& p) { return evaluate(p).d_percent; }

CostBreakdown evaluate(const EnergyParams& p, const lqg::RiccatiOptions& options) {
  CostBreakdown out;
  out.no_forecast = lqg::riccati_solve(build_no_forecast(p).lqr, options);
  out.forecast = lqg::riccati_solve(build_dynamic_forecast(p).lqr, options);
  out.cost_no_forecast = expected_cost_no_forecast(p, out.no_forecast);
  out.cost_forecast = expected_cost_forecast(p, out.forecast);
  out.d_percent = improvement_d(out.cost_no_forecast, out.cost_forecast);
  return out;
}

Eigen::Vector3d no_forecast_action_coefficients(const EnergyParams& p, const Eigen::MatrixXd& k) {
  if (k.rows() != 3 || k.cols() != 3) throw ShapeError("no-forecast K must be 3x3");
  const double scale = -p.alpha / (p.alpha * k(1, 1) + p.kappa);
  return scale * Eigen::Vector3d(k(1, 0) * p.g + k(1, 1) * (p.g - p.rho), k(1, 1) * p.rho, k(1, 2));
}

}  // namespace mmfe::energy
