#include "mmfe/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>

#include "mmfe/errors.hpp"
#include "mmfe/linalg.hpp"
#include "mmfe/random.hpp"

namespace mmfe::sim {

int SimConfig::default_horizon(double discount, double tolerance) {
  if (!(discount > 0.0 && discount < 1.0)) throw ParameterError("discount must lie in (0, 1)");
  return static_cast<int>(std::ceil(std::log(tolerance) / std::log(discount)));
}

int SimConfig::effective_horizon() const {
  return horizon_periods > 0 ? horizon_periods : default_horizon(discount);
}

void SimConfig::validate() const {
  if (replications < 2) throw ParameterError("at least two replications are required");
  if (horizon_periods < 0) throw ParameterError("horizon_periods must be >= 0");
  if (!(discount > 0.0 && discount < 1.0)) throw ParameterError("discount must lie in (0, 1)");
}

InitialDistribution InitialDistribution::from_second_moment(const Eigen::MatrixXd& second_moment, int constant_index,
                                                            double value) {
  const auto m = second_moment.rows();
  if (constant_index < 0 || constant_index >= m) throw ShapeError("constant coordinate out of range");
  InitialDistribution d;
  d.mean = Eigen::VectorXd::Zero(m);
  d.mean(constant_index) = value;
  if (value == 0.0) {
    if (second_moment.col(constant_index).cwiseAbs().maxCoeff() > 0.0) {
      throw ParameterError("a zero constant coordinate needs a zero row in the second moment");
    }
  } else {
    d.mean = second_moment.col(constant_index) / value;
  }
  d.mean(constant_index) = value;
  d.cov = second_moment - d.mean * d.mean.transpose();
  d.cov.row(constant_index).setZero();
  d.cov.col(constant_index).setZero();
  return d;
}

namespace {

// Records every replication's discounted partial sum at the doubling
// checkpoints 8, 16, 32, ... and, after the run, flags an unstable closed loop
// when the mean over replications grows tenfold from one checkpoint to the
// next. Non-finite partial sums are reported at once.
class DivergenceMonitor {
 public:
  DivergenceMonitor(long replications, int horizon) : reps_(replications) {
    for (int c = 8; c <= horizon; c *= 2) checkpoints_.push_back(c);
    sums_.resize(static_cast<std::size_t>(reps_) * checkpoints_.size());
  }

  void record(long rep, int j, double partial) {
    if (!std::isfinite(partial)) {
      throw InstabilityError("closed-loop cost is not finite (replication " + std::to_string(rep) + ", period " +
                             std::to_string(j) + ")");
    }
    const int period = j + 1;
    if (period < 8 || (period & (period - 1)) != 0) return;
    const auto idx = static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(period)) - 3);
    if (idx < checkpoints_.size()) sums_[static_cast<std::size_t>(rep) * checkpoints_.size() + idx] = partial;
  }

  void check() const {
    const std::size_t k = checkpoints_.size();
    std::vector<double> column(static_cast<std::size_t>(reps_));
    double prev = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      for (long r = 0; r < reps_; ++r) column[static_cast<std::size_t>(r)] = sums_[static_cast<std::size_t>(r) * k + c];
      const double mean = pairwise_sum(column) / static_cast<double>(reps_);
      if (!std::isfinite(mean) || (c > 0 && prev > 0.0 && mean > 10.0 * prev)) {
        throw InstabilityError("closed-loop cost diverges: mean discounted cost grows from " + std::to_string(prev) +
                               " to " + std::to_string(mean) + " by period " + std::to_string(checkpoints_[c]));
      }
      prev = mean;
    }
  }

 private:
  long reps_;
  std::vector<int> checkpoints_;
  std::vector<double> sums_;
};

CostEstimate summarize(const std::vector<double>& costs, const std::vector<double>& last, double discount,
                       int horizon) {
  const auto n = static_cast<double>(costs.size());
  CostEstimate est;
  est.replications = static_cast<long>(costs.size());
  est.horizon = horizon;
  est.mean = pairwise_sum(costs) / n;
  std::vector<double> sq(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) sq[i] = (costs[i] - est.mean) * (costs[i] - est.mean);
  est.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  const double c_max = last.empty() ? 0.0 : *std::max_element(last.begin(), last.end());
  est.truncation_bias_bound = std::pow(discount, horizon) / (1.0 - discount) * c_max;
  return est;
}

// Runs body(rep) for every replication; exceptions are captured and rethrown
// after the parallel loop.
template <class Body>
void for_each_replication(long reps, Execution exec, Body&& body) {
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (long rep = 0; rep < reps; ++rep) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        body(rep);
      } catch (...) {
#pragma omp critical(mmfe_sim_failure)
        {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    }
  } else {
    for (long rep = 0; rep < reps; ++rep) body(rep);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

CostEstimate simulate_discounted_cost(const lqg::DiscountedLqr& system, const InitialDistribution& init,
                                      const Eigen::MatrixXd& gain, const SimConfig& cfg, Execution exec) {
  system.validate();
  cfg.validate();
  const int m = system.state_dim(), p = system.action_dim();
  if (gain.rows() != p || gain.cols() != m) throw ShapeError("gain must be action_dim x state_dim");
  if (init.mean.size() != m || init.cov.rows() != m || init.cov.cols() != m) {
    throw ShapeError("initial distribution has the wrong dimension");
  }
  if (std::abs(cfg.discount - system.alpha) > 0.0) throw ParameterError("simulation discount must equal alpha");

  const int horizon = cfg.effective_horizon();
  const Eigen::MatrixXd init_factor = psd_factor(init.cov);
  const Eigen::MatrixXd noise_factor = psd_factor(system.noise_cov);
  std::vector<double> costs(static_cast<std::size_t>(cfg.replications));
  std::vector<double> last(costs.size());
  DivergenceMonitor monitor(cfg.replications, horizon);

  for_each_replication(cfg.replications, exec, [&](long rep) {
    RandomStream rng(cfg.seed, static_cast<std::uint64_t>(rep));
    Eigen::VectorXd z(m), chi(m), next(m), act(p), q_chi(m), r_act(p);
    for (int i = 0; i < m; ++i) z(i) = rng.normal();
    chi.noalias() = init.mean + init_factor * z;
    double total = 0.0, weight = 1.0, period = 0.0;
    for (int j = 0; j < horizon; ++j) {
      act.noalias() = -gain * chi;
      q_chi.noalias() = system.q * chi;
      r_act.noalias() = system.r * act;
      period = chi.dot(q_chi) + act.dot(r_act);
      total += weight * period;
      monitor.record(rep, j, total);
      for (int i = 0; i < m; ++i) z(i) = rng.normal();
      next.noalias() = system.a * chi;
      next.noalias() += system.b * act;
      next.noalias() += noise_factor * z;
      chi.swap(next);
      weight *= cfg.discount;
    }
    costs[rep] = total;
    last[rep] = period;
  });
  monitor.check();
  return summarize(costs, last, cfg.discount, horizon);
}

PairEstimate simulate_energy_pair(const energy::EnergyParams& params, const SimConfig& cfg, Execution exec) {
  const auto nf = lqg::riccati_solve(energy::build_no_forecast(params).lqr);
  const auto f = lqg::riccati_solve(energy::build_dynamic_forecast(params).lqr);
  return simulate_energy_pair(params, nf.gain, f.gain, cfg, exec);
}

PairEstimate simulate_energy_pair(const energy::EnergyParams& params, const Eigen::MatrixXd& gain_no_forecast,
                                  const Eigen::MatrixXd& gain_forecast, const SimConfig& cfg, Execution exec) {
  params.validate();
  cfg.validate();
  if (gain_no_forecast.rows() != 1 || gain_no_forecast.cols() != 3) throw ShapeError("no-forecast gain must be 1x3");
  if (gain_forecast.rows() != 1 || gain_forecast.cols() != 5) throw ShapeError("forecast gain must be 1x5");
  if (std::abs(cfg.discount - params.alpha) > 0.0) throw ParameterError("simulation discount must equal alpha");

  const int horizon = cfg.effective_horizon();
  const DisturbanceSchedule sched = params.schedule();
  const double g = params.g, rho = params.rho, kappa = params.kappa;
  const double ez = params.mean_z(), ew = params.mean_w, y = params.tau - params.tau0();
  const double sd0 = std::sqrt(sched.lag_variance(0));
  const double sd1 = std::sqrt(sched.lag_variance(1));
  const double sd2 = std::sqrt(sched.lag_variance(2));
  const double sd_agg = std::sqrt(sched.lag_variance_sum(3, sched.trunc_lag));
  const double sd_v = std::sqrt(params.sigma2_v);
  const Eigen::MatrixXd block =
      psd_factor(energy::forecast_second_moment_closed_form(params).topLeftCorner(4, 4));
  const Eigen::RowVectorXd k3 = gain_no_forecast.row(0);
  const Eigen::RowVectorXd k5 = gain_forecast.row(0);

  const auto reps = static_cast<std::size_t>(cfg.replications);
  std::vector<double> c_nf(reps), c_f(reps), c_diff(reps), last_nf(reps), last_f(reps), last_diff(reps);
  DivergenceMonitor mon_nf(cfg.replications, horizon), mon_f(cfg.replications, horizon);

  for_each_replication(cfg.replications, exec, [&](long rep) {
    RandomStream rng(cfg.seed, static_cast<std::uint64_t>(rep));
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i) z(i) = rng.normal();
    const Eigen::Vector4d b = block * z;
    double fc[2] = {ew + b(1), ew + b(2)};
    double w = ew + b(0);
    double x_f = b(3), x_nf = b(3);
    double tot_nf = 0.0, tot_f = 0.0, weight = 1.0, per_nf = 0.0, per_f = 0.0;
    for (int j = 0; j < horizon; ++j) {
      const double wt = w - ew;
      const double a_f =
          -(k5(0) * wt + k5(1) * (fc[0] - ew) + k5(2) * (fc[1] - ew) + k5(3) * x_f + k5(4) * y);
      const double a_nf = -(k3(0) * wt + k3(1) * x_nf + k3(2) * y);
      per_f = (x_f - y) * (x_f - y) + kappa * a_f * a_f;
      per_nf = (x_nf - y) * (x_nf - y) + kappa * a_nf * a_nf;
      tot_f += weight * per_f;
      tot_nf += weight * per_nf;
      mon_f.record(rep, j, tot_f);
      mon_nf.record(rep, j, tot_nf);
      const double reveal[3] = {sd0 * rng.normal(), sd1 * rng.normal(), sd2 * rng.normal()};
      const double aggregate = sd_agg * rng.normal();
      const double v = sd_v * rng.normal();
      const double w_next = roll_forecast_scalar(g, ez, fc, reveal, aggregate);
      const double z_tilde = (w_next - ew) - g * wt;
      x_f = (g - rho) * wt + rho * x_f + z_tilde + v + a_f;
      x_nf = (g - rho) * wt + rho * x_nf + z_tilde + v + a_nf;
      w = w_next;
      weight *= cfg.discount;
    }
    c_nf[rep] = tot_nf;
    c_f[rep] = tot_f;
    c_diff[rep] = tot_nf - tot_f;
    last_nf[rep] = per_nf;
    last_f[rep] = per_f;
    last_diff[rep] = std::max(per_nf, per_f);
  });
  mon_nf.check();
  mon_f.check();
  return {summarize(c_nf, last_nf, cfg.discount, horizon), summarize(c_f, last_f, cfg.discount, horizon),
          summarize(c_diff, last_diff, cfg.discount, horizon)};
}

std::vector<PathRecord> simulate_mmfe_joint_path(const MmfeModel& model, int r, long length, std::uint64_t seed) {
  if (r < 1) throw ShapeError("forecast horizon r must be >= 1");
  if (length < 1) throw InvalidHorizonError("path length must be >= 1");
  const int d = model.dim();
  const int lag = model.trunc_lag();
  const TimeIndex start = -10 * static_cast<TimeIndex>(lag);

  auto draw = [&](TimeIndex target, TimeIndex reveal) {
    Eigen::VectorXd e(d);
    for (int c = 0; c < d; ++c) e(c) = epsilon_draw(model, seed, target, reveal, c);
    return e;
  };

  // Arbitrary start at the stationary mean; the burn-in washes it out.
  ForecastVector fvec{start, std::vector<Eigen::VectorXd>(static_cast<std::size_t>(r), model.mean_w())};
  Eigen::VectorXd w = model.mean_w();
  std::vector<PathRecord> path;
  path.reserve(static_cast<std::size_t>(length));
  for (TimeIndex n = start;; ++n) {
    if (n >= 0) path.push_back({n, w, fvec});
    if (static_cast<long>(path.size()) == length) break;
    FreshNoise fresh;
    for (int i = 0; i <= r; ++i) fresh.reveal.push_back(draw(n + 1 + i, n + 1));
    const TimeIndex target = n + 1 + r;
    fresh.aggregate = Eigen::VectorXd::Zero(d);
    for (TimeIndex k = target - lag; k <= n; ++k) fresh.aggregate += draw(target, k);
    RollResult next = roll_forecast_vector(model, fvec, fresh);
    w = std::move(next.w_next);
    fvec = std::move(next.next);
  }
  return path;
}

void write_trace_csv(std::ostream& out, const lqg::DiscountedLqr& system, const InitialDistribution& init,
                     const Eigen::MatrixXd& gain, const SimConfig& cfg, long replication) {
  system.validate();
  const int m = system.state_dim(), p = system.action_dim();
  const int horizon = cfg.effective_horizon();
  const Eigen::MatrixXd init_factor = psd_factor(init.cov);
  const Eigen::MatrixXd noise_factor = psd_factor(system.noise_cov);
  RandomStream rng(cfg.seed, static_cast<std::uint64_t>(replication));
  Eigen::VectorXd z(m);
  for (int i = 0; i < m; ++i) z(i) = rng.normal();
  Eigen::VectorXd chi = init.mean + init_factor * z;

  out << 'j';
  for (int i = 0; i < m; ++i) out << ",chi" << i;
  for (int i = 0; i < p; ++i) out << ",a" << i;
  out << ",discounted_cost\n";
  char buf[32];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17e", x);
    out << ',' << buf;
  };
  double weight = 1.0, total = 0.0;
  for (int j = 0; j < horizon; ++j) {
    const Eigen::VectorXd act = -gain * chi;
    total += weight * (chi.dot(system.q * chi) + act.dot(system.r * act));
    out << j;
    for (int i = 0; i < m; ++i) put(chi(i));
    for (int i = 0; i < p; ++i) put(act(i));
    put(total);
    out << '\n';
    for (int i = 0; i < m; ++i) z(i) = rng.normal();
    chi = system.a * chi + system.b * act + noise_factor * z;
    weight *= cfg.discount;
  }
}

std::string format_estimate(const std::string& name, const CostEstimate& est) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%s.mean=%.17e\n%s.std_error=%.17e\n%s.replications=%ld\n%s.horizon=%d\n"
                "%s.truncation_bias_bound=%.17e\n",
                name.c_str(), est.mean, name.c_str(), est.std_error, name.c_str(), est.replications, name.c_str(),
                est.horizon, name.c_str(), est.truncation_bias_bound);
  return buf;
}

}  // namespace mmfe::sim
