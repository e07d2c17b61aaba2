#include "mmfe/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "mmfe/errors.hpp"

namespace mmfe::dp {

namespace {

constexpr double kPrune = 1e-14;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void check_atoms(const std::vector<double>& atoms) {
  if (atoms.empty()) throw DiscretizationError("grid has no atoms");
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    if (!(atoms[i] > atoms[i - 1])) throw DiscretizationError("grid atoms must be strictly increasing");
  }
}

void normalize(AtomMass& mass) {
  std::erase_if(mass, [](const auto& e) { return e.second < kPrune; });
  double sum = 0.0;
  for (const auto& e : mass) sum += e.second;
  for (auto& e : mass) e.second /= sum;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double scalar_g(const MmfeModel& model) {
  if (model.dim() != 1) throw ShapeError("tabular builders need scalar weather");
  return model.g()(0, 0);
}

// Law of the weather part of the state one stage ahead, together with the
// first two moments of the realized weather W' used in the stage cost.
struct WeatherRow {
  AtomMass next;
  double mean_w = 0.0;
  double second_w = 0.0;
};

using WeatherRows = std::vector<WeatherRow>;

void set_moments(WeatherRow& row, const AtomMass& w_mass, const std::vector<double>& w_atoms) {
  row.mean_w = row.second_w = 0.0;
  for (const auto& [i, p] : w_mass) {
    row.mean_w += p * w_atoms[i];
    row.second_w += p * w_atoms[i] * w_atoms[i];
  }
}

WeatherRows ar1_rows(const std::vector<double>& w_atoms, double g, double shift, double var, bool check) {
  WeatherRows rows(w_atoms.size());
  for (std::size_t i = 0; i < w_atoms.size(); ++i) {
    rows[i].next = quantize_gaussian(w_atoms, g * w_atoms[i] + shift, var, check);
    set_moments(rows[i], rows[i].next, w_atoms);
  }
  return rows;
}

// Sequential conditional quantization of the rolled forecast vector:
//   W' ~ N(f_1, v_0),  f'_j ~ N(f_{j+1} + g (f'_{j-1} - f_j), v_j) for j < r,
//   f'_r ~ N(g f'_{r-1} + E Z + shift, v_r + last_var),  with f'_0 = W'.
WeatherRows forecast_rows(const MmfeModel& model, const ForecastGrid& grid, double shift, double last_var) {
  const double g = scalar_g(model);
  const double ez = model.mean_z()(0);
  const auto& sched = model.schedule(0);
  const int r = grid.horizon();
  std::vector<long> stride(r);
  long count = 1;
  for (int j = r - 1; j >= 0; --j) {
    stride[j] = count;
    count *= static_cast<long>(grid.f[j].size());
  }

  WeatherRows rows(static_cast<std::size_t>(count));
  std::vector<double> f(r);
  std::vector<double> dense(static_cast<std::size_t>(count));
  for (long idx = 0; idx < count; ++idx) {
    for (int j = 0; j < r; ++j) f[j] = grid.f[j][(idx / stride[j]) % grid.f[j].size()];
    std::fill(dense.begin(), dense.end(), 0.0);
    const AtomMass w_mass = quantize_gaussian(grid.w, f[0], sched.lag_variance(0));

    std::function<void(int, double, double, long)> descend = [&](int j, double prev, double p, long at) {
      double mean, var;
      if (j < r) {
        mean = f[j] + g * (prev - f[j - 1]);
        var = sched.lag_variance(j);
      } else {
        mean = g * prev + ez + shift;
        var = sched.lag_variance(r) + last_var;
      }
      for (const auto& [k, q] : quantize_gaussian(grid.f[j - 1], mean, var)) {
        const long next = at + k * stride[j - 1];
        const double pq = p * q;
        if (j == r) {
          dense[next] += pq;
        } else {
          descend(j + 1, grid.f[j - 1][k], pq, next);
        }
      }
    };
    for (const auto& [i, p] : w_mass) descend(1, grid.w[i], p, 0);

    auto& row = rows[idx];
    for (long k = 0; k < count; ++k) {
      if (dense[k] > 0.0) row.next.emplace_back(static_cast<int>(k), dense[k]);
    }
    normalize(row.next);
    set_moments(row, w_mass, grid.w);
  }
  return rows;
}

std::vector<std::string> forecast_labels(const ForecastGrid& grid) {
  std::vector<std::string> labels{""};
  for (int j = 0; j < grid.horizon(); ++j) {
    std::vector<std::string> next;
    for (const auto& prefix : labels) {
      for (double x : grid.f[j]) next.push_back(prefix + "|f" + std::to_string(j + 1) + "=" + fmt(x));
    }
    labels = std::move(next);
  }
  return labels;
}

// Combines the Delta dynamics with per-stage weather rows. Stages whose rows
// are the same object share one kernel.
TabularMdp assemble(const ToyControl& control, const std::vector<double>& delta_atoms,
                    const std::vector<std::string>& weather_labels, const std::vector<const WeatherRows*>& stages,
                    bool coarse_check, double max_entries) {
  control.validate();
  check_atoms(delta_atoms);
  const int nd = static_cast<int>(delta_atoms.size());
  const int nw = static_cast<int>(weather_labels.size());
  const int na = static_cast<int>(control.actions.size());
  const int ns = nd * nw;

  TabularMdp mdp;
  mdp.states.reserve(static_cast<std::size_t>(ns));
  for (int d = 0; d < nd; ++d) {
    for (int w = 0; w < nw; ++w) mdp.states.push_back("d=" + fmt(delta_atoms[d]) + weather_labels[w]);
  }
  for (double a : control.actions) mdp.actions.push_back("a=" + fmt(a));

  // Delta' = rho Delta + a + V.
  std::vector<AtomMass> delta_next(static_cast<std::size_t>(nd) * na);
  std::size_t delta_support = 0;
  for (int d = 0; d < nd; ++d) {
    for (int a = 0; a < na; ++a) {
      const double mean = control.rho * delta_atoms[d] + control.actions[a] + control.mean_v;
      auto& m = delta_next[static_cast<std::size_t>(d) * na + a];
      m = control.sigma2_v > 0.0 ? quantize_gaussian(delta_atoms, mean, control.sigma2_v, coarse_check)
                                 : interpolate_point(delta_atoms, mean);
      delta_support += m.size();
    }
  }

  const WeatherRows* built_for = nullptr;
  KernelPtr last_kernel;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const WeatherRows& rows = *stages[i];
    if (static_cast<int>(rows.size()) != nw) throw ShapeError("weather rows do not match the state labels");

    Eigen::MatrixXd cost(ns, na);
    for (int d = 0; d < nd; ++d) {
      for (int w = 0; w < nw; ++w) {
        for (int a = 0; a < na; ++a) {
          const double act = control.actions[a];
          const double m = control.rho * delta_atoms[d] + act + control.mean_v - control.tau;
          cost(d * nw + w, a) = m * m + 2.0 * m * rows[w].mean_w + rows[w].second_w + control.sigma2_v +
                                control.kappa * act * act;
        }
      }
    }
    mdp.costs.push_back(std::move(cost));
    if (i + 1 == stages.size()) break;

    if (&rows == built_for) {
      mdp.kernels.push_back(last_kernel);
      continue;
    }
    std::size_t weather_support = 0;
    for (const auto& row : rows) weather_support += row.next.size();
    const double entries = static_cast<double>(delta_support) * static_cast<double>(weather_support);
    if (entries > max_entries) {
      throw SizeError("kernel would hold " + fmt(entries) + " entries, above the guard of " + fmt(max_entries));
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(entries));
    AtomMass joint;
    for (int d = 0; d < nd; ++d) {
      for (int w = 0; w < nw; ++w) {
        for (int a = 0; a < na; ++a) {
          joint.clear();
          for (const auto& [dd, pd] : delta_next[static_cast<std::size_t>(d) * na + a]) {
            for (const auto& [ww, pw] : rows[w].next) joint.emplace_back(dd * nw + ww, pd * pw);
          }
          normalize(joint);
          const int row = (d * nw + w) * na + a;
          for (const auto& [col, p] : joint) trip.emplace_back(row, col, p);
        }
      }
    }
    last_kernel = std::make_shared<const Kernel>(make_kernel(ns * na, ns, trip));
    built_for = &rows;
    mdp.kernels.push_back(last_kernel);
  }
  mdp.validate();
  return mdp;
}

void check_stages(int stages) {
  if (stages < 1) throw InvalidHorizonError("a tabular problem needs at least one stage");
}

}  // namespace

std::vector<double> centered_atoms(double center, double half_width, int count) {
  if (count < 1) throw DiscretizationError("grid needs at least one atom");
  if (count == 1) return {center};
  if (!(half_width > 0.0)) throw DiscretizationError("grid half-width must be positive");
  std::vector<double> atoms(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) atoms[i] = center - half_width + 2.0 * half_width * i / (count - 1);
  if (count % 2 == 1) atoms[count / 2] = center;
  return atoms;
}

int nearest_atom(const std::vector<double>& atoms, double x) {
  const auto it = std::lower_bound(atoms.begin(), atoms.end(), x);
  if (it == atoms.begin()) return 0;
  if (it == atoms.end()) return static_cast<int>(atoms.size()) - 1;
  const auto hi = static_cast<int>(it - atoms.begin());
  return (x - atoms[hi - 1] <= atoms[hi] - x) ? hi - 1 : hi;
}

AtomMass quantize_gaussian(const std::vector<double>& atoms, double mean, double var, bool coarse_check) {
  check_atoms(atoms);
  if (!(var >= 0.0) || !std::isfinite(mean)) throw DiscretizationError("invalid Gaussian to quantize");
  if (var == 0.0 || atoms.size() == 1) return {{nearest_atom(atoms, mean), 1.0}};
  const double sd = std::sqrt(var);
  const auto n = static_cast<int>(atoms.size());
  AtomMass mass;
  double below = 0.0;
  for (int i = 0; i < n; ++i) {
    const double upper = i + 1 < n ? normal_cdf((0.5 * (atoms[i] + atoms[i + 1]) - mean) / sd) : 1.0;
    const double p = upper - below;
    below = upper;
    if (coarse_check && i > 0 && i + 1 < n && p > 0.5) {
      throw DiscretizationError("grid too coarse: one cell holds " + fmt(p) + " of the mass");
    }
    mass.emplace_back(i, p);
  }
  normalize(mass);
  return mass;
}

AtomMass interpolate_point(const std::vector<double>& atoms, double x) {
  check_atoms(atoms);
  if (x <= atoms.front()) return {{0, 1.0}};
  if (x >= atoms.back()) return {{static_cast<int>(atoms.size()) - 1, 1.0}};
  const auto hi = static_cast<int>(std::upper_bound(atoms.begin(), atoms.end(), x) - atoms.begin());
  const double t = (x - atoms[hi - 1]) / (atoms[hi] - atoms[hi - 1]);
  AtomMass mass{{hi - 1, 1.0 - t}, {hi, t}};
  normalize(mass);
  return mass;
}

void ToyControl::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
  if (!(kappa > 0.0)) throw ParameterError("kappa must be positive");
  if (!(sigma2_v >= 0.0)) throw ParameterError("sigma2_v must be >= 0");
  if (actions.empty()) throw ParameterError("at least one action is required");
}

std::vector<double> default_actions(const ToyControl& control, double mean_w, int count, double step) {
  const double hold = (1.0 - control.rho) * (control.tau - mean_w) - control.mean_v;
  return centered_atoms(hold, step * (count - 1) / 2.0, count);
}

double stationary_forecast_sd(const MmfeModel& model, int j) {
  const double g = scalar_g(model);
  const auto& s = model.schedule(0);
  const double var_w = s.total_variance() / (1.0 - g * g);
  // Forecast error of F_{n+j|n}: noise revealed after n, propagated through G.
  double err = 0.0;
  for (int i = 0; i < j; ++i) err += std::pow(g, 2.0 * i) * s.lag_variance_sum(0, j - 1 - i);
  return std::sqrt(std::max(var_w - err, 0.0));
}

namespace {

std::vector<double> delta_atoms_for(const ToyControl& control, double mean_w, int count, double width_sd) {
  const auto [lo, hi] = std::minmax_element(control.actions.begin(), control.actions.end());
  const double spread = width_sd * std::sqrt(control.sigma2_v / (1.0 - control.rho * control.rho));
  return centered_atoms(control.tau - mean_w, std::max(spread + 0.5 * (*hi - *lo), 1.0), count);
}

}  // namespace

WeatherGrid default_weather_grid(const MmfeModel& model, const ToyControl& control, int delta_atoms, int w_atoms,
                                 double width_sd) {
  control.validate();
  const double mw = model.mean_w()(0);
  return {delta_atoms_for(control, mw, delta_atoms, width_sd),
          centered_atoms(mw, width_sd * stationary_forecast_sd(model, 0), w_atoms)};
}

ForecastGrid default_forecast_grid(const MmfeModel& model, const ToyControl& control, int r, int delta_atoms,
                                   int w_atoms, int f_atoms, double width_sd) {
  control.validate();
  if (r < 1) throw ShapeError("forecast horizon r must be >= 1");
  const double mw = model.mean_w()(0);
  ForecastGrid grid;
  grid.delta = delta_atoms_for(control, mw, delta_atoms, width_sd);
  grid.w = centered_atoms(mw, width_sd * stationary_forecast_sd(model, 0), w_atoms);
  for (int j = 1; j <= r; ++j) {
    grid.f.push_back(centered_atoms(mw, std::max(width_sd * stationary_forecast_sd(model, j), 1e-6), f_atoms));
  }
  return grid;
}

TabularMdp discretize_no_forecast(const MmfeModel& model, const ToyControl& control, int stages,
                                  const WeatherGrid& grid) {
  check_stages(stages);
  check_atoms(grid.w);
  const WeatherRows rows = ar1_rows(grid.w, scalar_g(model), model.mean_z()(0), model.schedule(0).total_variance(), true);
  std::vector<std::string> labels;
  for (double w : grid.w) labels.push_back("|w=" + fmt(w));
  return assemble(control, grid.delta, labels, std::vector<const WeatherRows*>(stages, &rows), true, 2e7);
}

TabularMdp discretize_static_forecast(const MmfeModel& model, const EpsilonArray& frozen, const ToyControl& control,
                                      int stages, const WeatherGrid& grid) {
  check_stages(stages);
  check_atoms(grid.w);
  const double g = scalar_g(model);
  std::vector<WeatherRows> rows;
  rows.reserve(static_cast<std::size_t>(stages));
  for (int i = 0; i < stages; ++i) {
    const TimeIndex target = i + 1;
    const double frozen_part = frozen.reveal_sum(target, target - model.trunc_lag(), 0)(0);
    const double var = conditional_noise_variance(model, i, 0)(0);
    rows.push_back(ar1_rows(grid.w, g, model.mean_z()(0) + frozen_part, var, true));
  }
  std::vector<const WeatherRows*> ptrs;
  for (const auto& r : rows) ptrs.push_back(&r);
  std::vector<std::string> labels;
  for (double w : grid.w) labels.push_back("|w=" + fmt(w));
  return assemble(control, grid.delta, labels, ptrs, true, 2e7);
}

TabularMdp discretize_dynamic_forecast(const MmfeModel& model, const ToyControl& control, int stages,
                                       const ForecastGrid& grid, double max_entries) {
  check_stages(stages);
  const int r = grid.horizon();
  if (r < 1) throw ShapeError("forecast grid needs at least one coordinate");
  check_atoms(grid.w);
  double states = static_cast<double>(grid.delta.size());
  for (const auto& f : grid.f) {
    check_atoms(f);
    states *= static_cast<double>(f.size());
  }
  if (states * static_cast<double>(control.actions.size()) > max_entries) {
    throw SizeError("forecast state table of " + fmt(states) + " states exceeds the memory guard");
  }
  const double tail = model.schedule(0).lag_variance_sum(r + 1, model.trunc_lag());
  const WeatherRows rows = forecast_rows(model, grid, 0.0, tail);
  return assemble(control, grid.delta, forecast_labels(grid), std::vector<const WeatherRows*>(stages, &rows), false,
                  max_entries);
}

TabularMdp discretize_static_dynamic(const MmfeModel& model, const EpsilonArray& frozen, const ToyControl& control,
                                     int stages, const ForecastGrid& grid, int max_r, double max_entries) {
  check_stages(stages);
  const int r = grid.horizon();
  if (r < 1) throw ShapeError("forecast grid needs at least one coordinate");
  if (r > max_r) throw SizeError("combined static/dynamic state is capped at r = " + std::to_string(max_r));
  check_atoms(grid.w);
  for (const auto& f : grid.f) check_atoms(f);
  std::vector<WeatherRows> rows;
  rows.reserve(static_cast<std::size_t>(stages));
  for (int n = 0; n < stages; ++n) {
    const double shift = g0_aggregate(model, frozen, n, r)(0);
    const double tail = model.schedule(0).lag_variance_sum(r + 1, r + n);
    rows.push_back(forecast_rows(model, grid, shift, tail));
  }
  std::vector<const WeatherRows*> ptrs;
  for (const auto& w : rows) ptrs.push_back(&w);
  return assemble(control, grid.delta, forecast_labels(grid), ptrs, false, max_entries);
}

}  // namespace mmfe::dp
