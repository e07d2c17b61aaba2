#include "mmfe/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mmfe/errors.hpp"
#include "mmfe/lqg.hpp"
#include "mmfe/mmfe_core.hpp"
#include "mmfe/random.hpp"
#include "mmfe/scenario_tree.hpp"
#include "mmfe/sim_harness.hpp"
#include "mmfe/sweep.hpp"
#include "mmfe/tabular_dp.hpp"

namespace mmfe::validation {

namespace {

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

Moments moments(const std::vector<double>& x) {
  const auto n = static_cast<double>(x.size());
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - m.mean) * (v - m.mean);
  m.std_error = std::sqrt(ss / (n - 1.0) / n);
  return m;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const Moments mx = moments(x), my = moments(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx.mean) * (y[i] - my.mean);
    sxx += (x[i] - mx.mean) * (x[i] - mx.mean);
    syy += (y[i] - my.mean) * (y[i] - my.mean);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

bool CheckResult::passed() const {
  return std::all_of(subchecks.begin(), subchecks.end(), [](const SubCheck& s) { return s.passed; });
}

void CheckResult::add(std::string sub, bool ok, std::string detail) {
  subchecks.push_back({std::move(sub), ok, std::move(detail)});
}

CheckResult martingale_suite(const energy::EnergyParams& params, long replications, std::uint64_t seed) {
  Timer timer;
  CheckResult out{"mmfe-martingale-suite", {}, 0.0};
  const MmfeModel model = params.weather_model();
  const double w0 = params.mean_w + 3.0;

  // E[F_{n|1} | time-0 array] = F_{n|0}: redraw the reveal-time-1 entries.
  {
    const std::vector<TimeIndex> targets = {1, 3, 10};
    const TimeIndex n_max = targets.back();
    EpsilonArray eps = sample_epsilon_array(model, {1, n_max, std::nullopt}, seed);
    std::vector<double> f0(targets.size());
    for (std::size_t t = 0; t < targets.size(); ++t) f0[t] = forecast(model, eps, vec1(w0), 0, targets[t])(0);
    std::vector<std::vector<double>> samples(targets.size(), std::vector<double>(replications));
    for (long rep = 0; rep < replications; ++rep) {
      const std::uint64_t key = hash_words({seed, 0x6d61727467ULL, static_cast<std::uint64_t>(rep)});
      for (TimeIndex m = 1; m <= n_max; ++m) eps.set(m, 1, 0, epsilon_draw(model, key, m, 1, 0));
      const Eigen::VectorXd w1 = realized_weather(model, eps, vec1(w0), 0, 1);
      for (std::size_t t = 0; t < targets.size(); ++t) samples[t][rep] = forecast(model, eps, w1, 1, targets[t])(0);
    }
    bool ok = true;
    std::string detail;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const Moments m = moments(samples[t]);
      const double z = std::abs(m.mean - f0[t]) / m.std_error;
      ok = ok && z <= 4.0;
      detail += fmt("n=%lld: |mean-F|/se=%.2f; ", static_cast<long long>(targets[t]), z);
    }
    out.add("conditional mean E[F_{n|1}] = F_{n|0} within 4 se", ok, detail);
  }

  // Orthogonality of martingale differences with distinct reveal times.
  {
    struct Pair {
      TimeIndex n, k, m, j;
    };
    const std::vector<Pair> pairs = {{3, 1, 3, 2}, {5, 2, 4, 4}, {6, 3, 6, 1}, {2, 2, 5, 1}};
    std::vector<std::vector<double>> x(pairs.size(), std::vector<double>(replications));
    std::vector<std::vector<double>> y(pairs.size(), std::vector<double>(replications));
    EpsilonArray eps(1, model.trunc_lag(), {0, 6, std::nullopt});
    for (long rep = 0; rep < replications; ++rep) {
      const std::uint64_t key = hash_words({seed, 0x6f7274686fULL, static_cast<std::uint64_t>(rep)});
      for (TimeIndex t = 0; t <= 6; ++t) {
        for (TimeIndex r = 0; r <= t; ++r) eps.set(t, r, 0, epsilon_draw(model, key, t, r, 0));
      }
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        x[p][rep] = martingale_difference(model, eps, pairs[p].n, pairs[p].k)(0);
        y[p][rep] = martingale_difference(model, eps, pairs[p].m, pairs[p].j)(0);
      }
    }
    bool ok = true;
    std::string detail;
    const double se = 1.0 / std::sqrt(static_cast<double>(replications));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double r = correlation(x[p], y[p]);
      ok = ok && std::abs(r) <= 4.0 * se;
      detail += fmt("corr(D_%lld|%lld,D_%lld|%lld)=%.2fse; ", static_cast<long long>(pairs[p].n),
                    static_cast<long long>(pairs[p].k), static_cast<long long>(pairs[p].m),
                    static_cast<long long>(pairs[p].j), r / se);
    }
    out.add("orthogonality of D_{n|k}, D_{m|j} within 4 se", ok, detail);
  }

  // Per-path identities.
  {
    const TimeIndex n_max = 30;
    const long paths = std::max<long>(100, std::min<long>(replications / 100, 1000));
    double worst_consistency = 0.0, worst_telescope = 0.0;
    for (long path = 0; path < paths; ++path) {
      const EpsilonArray eps = sample_epsilon_array(
          model, {1, n_max, std::nullopt}, hash_words({seed, 0x74656cULL, static_cast<std::uint64_t>(path)}));
      Eigen::VectorXd w_prev = vec1(w0);
      for (TimeIndex n = 1; n <= n_max; ++n) {
        const Eigen::VectorXd w_n = realized_weather(model, eps, vec1(w0), 0, n);
        const Eigen::VectorXd f_nn = forecast(model, eps, w_prev, n - 1, n) + martingale_difference(model, eps, n, n);
        worst_consistency = std::max(worst_consistency, std::abs(f_nn(0) - w_n(0)));
        double sum_d = 0.0;
        for (TimeIndex k = 1; k <= n; ++k) sum_d += martingale_difference(model, eps, n, k)(0);
        const double lhs = w_n(0) - forecast(model, eps, vec1(w0), 0, n)(0);
        worst_telescope = std::max(worst_telescope, std::abs(lhs - sum_d));
        w_prev = w_n;
      }
    }
    out.add("F_{n|n} = W_n per path to 1e-12", worst_consistency <= 1e-12,
            fmt("%ld paths, max |F_{n|n}-W_n| = %.3e", paths, worst_consistency));
    out.add("telescoping W_n - F_{n|0} = sum D_{n|k} to 1e-12", worst_telescope <= 1e-12,
            fmt("%ld paths, max error = %.3e", paths, worst_telescope));
  }
  out.seconds = timer.seconds();
  return out;
}

CheckResult riccati_properties(const energy::EnergyParams& params) {
  Timer timer;
  CheckResult out{"riccati-correctness", {}, 0.0};
  const std::pair<const char*, energy::SystemBundle> systems[] = {
      {"no-forecast", energy::build_no_forecast(params)}, {"forecast", energy::build_dynamic_forecast(params)}};
  for (const auto& [label, sys] : systems) {
    Eigen::MatrixXd prev;
    double worst = std::numeric_limits<double>::infinity();
    lqg::RiccatiOptions opts;
    opts.observer = [&](long j, const Eigen::MatrixXd& k) {
      if (j > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k - prev, Eigen::EigenvaluesOnly);
        worst = std::min(worst, es.eigenvalues().minCoeff());
      }
      prev = k;
    };
    const auto sol = lqg::riccati_solve(sys.lqr, opts);
    out.add(fmt("%s residual < 1e-12", label), sol.residual < 1e-12,
            fmt("residual %.3e after %ld iterations", sol.residual, sol.iterations));
    out.add(fmt("%s iterates nondecreasing in PSD order", label), worst >= -1e-10,
            fmt("min eigenvalue of K_{j+1}-K_j = %.3e", worst));
  }
  out.seconds = timer.seconds();
  return out;
}

CheckResult moment_agreement(const energy::EnergyParams& params, long draws, std::uint64_t seed) {
  Timer timer;
  CheckResult out{"moment-agreement", {}, 0.0};
  const Eigen::MatrixXd closed = energy::forecast_second_moment_closed_form(params);
  const Eigen::MatrixXd lyap = energy::forecast_second_moment_lyapunov(params);
  const double diff = (closed - lyap).cwiseAbs().maxCoeff();
  out.add("closed-form second moments equal Lyapunov solution to 1e-10", diff <= 1e-10,
          fmt("max entry difference %.3e", diff));

  // Sample the noise vector through the forecast roll in centred coordinates.
  const Eigen::MatrixXd c = energy::forecast_noise_cov(params);
  const DisturbanceSchedule s = params.schedule();
  const double sd[3] = {std::sqrt(s.lag_variance(0)), std::sqrt(s.lag_variance(1)), std::sqrt(s.lag_variance(2))};
  const double sd_agg = std::sqrt(s.lag_variance_sum(3, s.trunc_lag));
  const double sd_v = std::sqrt(params.sigma2_v);
  Eigen::MatrixXd sum_xx = Eigen::MatrixXd::Zero(4, 4);
  Eigen::Vector4d sum_x = Eigen::Vector4d::Zero();
  RandomStream rng(seed, 0x786921ULL);
  for (long i = 0; i < draws; ++i) {
    double fc[2] = {0.0, 0.0};
    const double reveal[3] = {sd[0] * rng.normal(), sd[1] * rng.normal(), sd[2] * rng.normal()};
    const double agg = sd_agg * rng.normal();
    const double w = roll_forecast_scalar(params.g, 0.0, fc, reveal, agg);
    const Eigen::Vector4d xi(w, fc[0], fc[1], reveal[0] + sd_v * rng.normal());
    sum_x += xi;
    sum_xx.noalias() += xi * xi.transpose();
  }
  const double n = static_cast<double>(draws);
  const Eigen::MatrixXd mc = (sum_xx - sum_x * sum_x.transpose() / n) / (n - 1.0);
  double worst_scaled = 0.0, worst_relative = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double err = std::abs(mc(i, j) - c(i, j));
      worst_scaled = std::max(worst_scaled, err / std::sqrt(c(i, i) * c(j, j)));
      if (c(i, j) != 0.0) worst_relative = std::max(worst_relative, err / std::abs(c(i, j)));
    }
  }
  out.add("C entries match Monte Carlo covariance within 1%", worst_scaled <= 0.01,
          fmt("%ld draws, max |err|/sqrt(C_ii C_jj) = %.3e%%, max plain relative error = %.3e%%", draws,
              100.0 * worst_scaled, 100.0 * worst_relative));
  out.seconds = timer.seconds();
  return out;
}

CheckResult value_validation(const energy::EnergyParams& params, long replications, std::uint64_t seed) {
  Timer timer;
  CheckResult out{"value-validation", {}, 0.0};
  const energy::CostBreakdown costs = energy::evaluate(params);
  sim::SimConfig cfg;
  cfg.replications = replications;
  cfg.seed = seed;
  cfg.discount = params.alpha;

  const energy::SystemBundle nf = energy::build_no_forecast(params);
  const auto init = sim::InitialDistribution::from_second_moment(nf.initial_second_moment, 2,
                                                                 params.tau - params.tau0());
  const sim::CostEstimate est_nf = sim::simulate_discounted_cost(nf.lqr, init, costs.no_forecast.gain, cfg);
  const double z_nf = std::abs(est_nf.mean - costs.cost_no_forecast) / est_nf.std_error;
  out.add("no-forecast closed form within 3 se of simulation", z_nf <= 3.0,
          fmt("closed %.6f, simulated %.6f +- %.4f (%.2f se)", costs.cost_no_forecast, est_nf.mean,
              est_nf.std_error, z_nf));

  const sim::PairEstimate pair = sim::simulate_energy_pair(params, cfg);
  const double z_f = std::abs(pair.forecast.mean - costs.cost_forecast) / pair.forecast.std_error;
  out.add("forecast closed form within 3 se of simulation", z_f <= 3.0,
          fmt("closed %.6f, simulated %.6f +- %.4f (%.2f se)", costs.cost_forecast, pair.forecast.mean,
              pair.forecast.std_error, z_f));
  out.seconds = timer.seconds();
  return out;
}

CheckResult improvement_properties(const energy::EnergyParams& params, int grid_points) {
  Timer timer;
  CheckResult out{"improvement-properties", {}, 0.0};
  using energy::SweepAxis;
  auto axis = [&](const std::string& name) {
    const auto [lo, hi] = energy::default_axis_range(name, params);
    return SweepAxis{name, energy::linspace(lo, hi, grid_points)};
  };
  const std::pair<std::string, std::string> panels[] = {
      {"gamma", "g"}, {"rho", "gamma"}, {"sigma2", "sigma2_v"}, {"tau", "gamma"}};
  std::vector<energy::SweepGrid> grids;
  for (const auto& [a1, a2] : panels) grids.push_back(energy::sweep_grid(params, axis(a1), axis(a2)));

  double min_d = std::numeric_limits<double>::infinity();
  long valid = 0, invalid = 0, failed = 0;
  for (const auto& grid : grids) {
    for (const auto& cell : grid.cells) {
      if (cell.ok()) {
        ++valid;
        min_d = std::min(min_d, cell.d_percent);
      } else if (cell.status == "invalid") {
        ++invalid;
      } else {
        ++failed;
      }
    }
  }
  out.add("D >= -1e-8 on every valid cell", min_d >= -1e-8 && failed == 0,
          fmt("min D = %.6e over %ld valid cells (%ld marked rho >= g, %ld solver failures)", min_d, valid, invalid,
              failed));

  {
    energy::EnergyParams p = params;
    p.gamma = 0.01;
    const double d = energy::improvement_d(p);
    std::string trail;
    for (double gm : {1e-3, 1e-4}) {
      p.gamma = gm;
      trail += fmt(", D(%.0e) = %.3e", gm, energy::improvement_d(p));
    }
    out.add("|D| < 1e-4 at gamma = 0.01", std::abs(d) < 1e-4, fmt("D(0.01) = %.6e%s", d, trail.c_str()));
  }

  const energy::SweepGrid& gg = grids[0];
  const std::size_t n1 = gg.axis1.values.size(), n2 = gg.axis2.values.size();
  {
    long bad_lines = 0;
    std::string worst;
    for (std::size_t j = 0; j < n2; ++j) {
      for (std::size_t i = 0; i + 1 < n1; ++i) {
        const auto &a = gg.at(i, j), &b = gg.at(i + 1, j);
        if (a.ok() && b.ok() && b.d_percent < a.d_percent - 1e-8) {
          ++bad_lines;
          break;
        }
      }
    }
    out.add("D nondecreasing in gamma along grid lines", bad_lines == 0,
            fmt("%ld of %zu g-columns violate", bad_lines, n2));
  }
  {
    long bad_lines = 0;
    std::string first;
    for (std::size_t i = 0; i < n1; ++i) {
      for (std::size_t j = 0; j + 1 < n2; ++j) {
        const auto &a = gg.at(i, j), &b = gg.at(i, j + 1);
        if (a.ok() && b.ok() && b.d_percent > a.d_percent + 1e-8) {
          if (bad_lines == 0) {
            std::size_t arg = j;
            for (std::size_t k = j; k < n2; ++k) {
              if (gg.at(i, k).ok() && gg.at(i, k).d_percent > gg.at(i, arg).d_percent) arg = k;
            }
            first = fmt("; e.g. gamma=%.3f: D rises from %.4f at g=%.3f to %.4f at g=%.3f", gg.axis1.values[i],
                        a.d_percent, gg.axis2.values[j], gg.at(i, arg).d_percent, gg.axis2.values[arg]);
          }
          ++bad_lines;
          break;
        }
      }
    }
    out.add("D nonincreasing in g along grid lines", bad_lines == 0,
            fmt("%ld of %zu gamma-rows violate%s", bad_lines, n1, first.c_str()));
  }
  {
    double worst = 0.0;
    for (double delta : {0.5, 1.0, 2.5, 5.0, 10.0}) {
      energy::EnergyParams up = params, down = params;
      up.tau = params.tau0() + delta;
      down.tau = params.tau0() - delta;
      worst = std::max(worst, std::abs(energy::improvement_d(up) - energy::improvement_d(down)));
    }
    out.add("D symmetric about tau0 to 1e-8", worst <= 1e-8, fmt("max |D(tau0+d) - D(tau0-d)| = %.3e", worst));
  }
  out.seconds = timer.seconds();
  return out;
}

CheckResult tabular_dp_properties(int instances, int tree_instances, std::uint64_t seed) {
  Timer timer;
  CheckResult out{"tabular-dp", {}, 0.0};
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int ns = 2 + i % 2;
    const int na = 2 + (i / 2) % 2;
    const int stages = 1 + (i / 4) % 3;
    const auto mdp = dp::random_mdp(ns, na, stages, hash_words({seed, 0x6470ULL, static_cast<std::uint64_t>(i)}),
                                    i % 5 == 0);
    const auto bi = dp::backward_induction(mdp);
    const auto bf = dp::brute_force_policy_enum(mdp);
    for (int t = 0; t < stages; ++t) worst = std::max(worst, (bi.values[t] - bf.values[t]).cwiseAbs().maxCoeff());
  }
  out.add("backward induction equals policy enumeration to 1e-12", worst <= 1e-12,
          fmt("%d instances, max value difference %.3e", instances, worst));

  int violations = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < tree_instances; ++i) {
    const auto inst = dp::random_scenario_instance(hash_words({seed, 0x74726565ULL, static_cast<std::uint64_t>(i)}));
    const auto cmp = dp::scenario_tree_comparison(inst);
    const double gap = cmp.no_forecast_value - cmp.forecast_value;
    min_gap = std::min(min_gap, gap);
    if (gap < -1e-12) ++violations;
  }
  out.add("forecast-augmented cost <= no-forecast cost on scenario trees", violations == 0,
          fmt("%d instances, %d violations, min(no-forecast - forecast) = %.3e", tree_instances, violations, min_gap));
  out.seconds = timer.seconds();
  return out;
}

std::vector<CheckResult> run_battery(const energy::EnergyParams& params, const Scale& scale, std::uint64_t seed,
                                     const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> results;
  auto push = [&](CheckResult r) {
    if (on_result) on_result(r);
    results.push_back(std::move(r));
  };
  push(martingale_suite(params, scale.martingale_replications, seed));
  push(riccati_properties(params));
  push(moment_agreement(params, scale.moment_draws, seed));
  push(value_validation(params, scale.value_replications, seed));
  push(improvement_properties(params, scale.grid_points));
  push(tabular_dp_properties(scale.dp_instances, scale.tree_instances, seed));
  return results;
}

std::string format_result(const CheckResult& r) {
  std::string s = fmt("[%s] %s (%.2f s)\n", r.passed() ? "PASS" : "FAIL", r.name.c_str(), r.seconds);
  for (const auto& sub : r.subchecks) {
    s += fmt("    [%s] %s: ", sub.passed ? "pass" : "fail", sub.name.c_str()) + sub.detail + "\n";
  }
  return s;
}

}  // namespace mmfe::validation
