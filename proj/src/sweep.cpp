#include "mmfe/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

#include "mmfe/errors.hpp"

namespace mmfe::energy {

const std::vector<std::string>& sweep_axis_names() {
  static const std::vector<std::string> names = {"gamma", "g", "rho", "sigma2", "sigma2_v", "tau", "alpha", "kappa"};
  return names;
}

bool is_sweep_axis(const std::string& name) {
  const auto& names = sweep_axis_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

EnergyParams with_axis_value(const EnergyParams& base, const std::string& axis, double value) {
  EnergyParams p = base;
  if (axis == "gamma") p.gamma = value;
  else if (axis == "g") p.g = value;
  else if (axis == "rho") p.rho = value;
  else if (axis == "sigma2") p.sigma2 = value;
  else if (axis == "sigma2_v") p.sigma2_v = value;
  else if (axis == "tau") p.tau = value;
  else if (axis == "alpha") p.alpha = value;
  else if (axis == "kappa") p.kappa = value;
  else throw ConfigError("unknown sweep axis '" + axis + "'");
  return p;
}

double axis_value(const EnergyParams& p, const std::string& axis) {
  if (axis == "gamma") return p.gamma;
  if (axis == "g") return p.g;
  if (axis == "rho") return p.rho;
  if (axis == "sigma2") return p.sigma2;
  if (axis == "sigma2_v") return p.sigma2_v;
  if (axis == "tau") return p.tau;
  if (axis == "alpha") return p.alpha;
  if (axis == "kappa") return p.kappa;
  throw ConfigError("unknown sweep axis '" + axis + "'");
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 2) throw ConfigError("a sweep axis needs at least 2 points");
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  v.back() = hi;
  return v;
}

std::pair<double, double> default_axis_range(const std::string& axis, const EnergyParams& base) {
  if (axis == "gamma") return {0.5, 0.99};
  if (axis == "g") return {0.1, 0.95};
  if (axis == "rho") return {0.05, 0.55};
  if (axis == "sigma2" || axis == "sigma2_v") return {0.1, 4.0};
  if (axis == "tau") return {base.tau0() - 10.0, base.tau0() + 10.0};
  if (axis == "alpha") return {0.5, 0.95};
  if (axis == "kappa") return {0.1, 10.0};
  throw ConfigError("unknown sweep axis '" + axis + "'");
}

namespace {

SweepCell evaluate_cell(const EnergyParams& base, const std::string& n1, double x1, const std::string& n2, double x2) {
  SweepCell cell;
  cell.x1 = x1;
  cell.x2 = x2;
  try {
    const EnergyParams p = with_axis_value(with_axis_value(base, n1, x1), n2, x2);
    const CostBreakdown c = evaluate(p);
    cell.cost_no_forecast = c.cost_no_forecast;
    cell.cost_forecast = c.cost_forecast;
    cell.d_percent = c.d_percent;
  } catch (const Error& e) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    cell.cost_no_forecast = cell.cost_forecast = cell.d_percent = nan;
    cell.status = e.category() == "parameter" ? "invalid" : e.category();
  }
  return cell;
}

}  // namespace

SweepGrid sweep_grid(const EnergyParams& base, const SweepAxis& axis1, const SweepAxis& axis2, Execution exec) {
  if (!is_sweep_axis(axis1.name) || !is_sweep_axis(axis2.name)) throw ConfigError("unknown sweep axis");
  if (axis1.name == axis2.name) throw ConfigError("sweep axes must differ");
  if (axis1.values.empty() || axis2.values.empty()) throw ConfigError("sweep axes must be non-empty");
  SweepGrid grid{axis1, axis2, {}};
  const auto n2 = static_cast<long>(axis2.values.size());
  const long total = static_cast<long>(axis1.values.size()) * n2;
  grid.cells.resize(static_cast<std::size_t>(total));
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long idx = 0; idx < total; ++idx) {
      grid.cells[idx] = evaluate_cell(base, axis1.name, axis1.values[idx / n2], axis2.name, axis2.values[idx % n2]);
    }
  } else {
    for (long idx = 0; idx < total; ++idx) {
      grid.cells[idx] = evaluate_cell(base, axis1.name, axis1.values[idx / n2], axis2.name, axis2.values[idx % n2]);
    }
  }
  return grid;
}

void write_sweep_csv(std::ostream& out, const SweepGrid& grid) {
  out << grid.axis1.name << ',' << grid.axis2.name << ",cost_no_forecast,cost_forecast,D_percent,status\n";
  char buf[160];
  for (const auto& c : grid.cells) {
    if (c.ok()) {
      std::snprintf(buf, sizeof buf, "%.17e,%.17e,%.17e,%.17e,%.17e", c.x1, c.x2, c.cost_no_forecast, c.cost_forecast,
                    c.d_percent);
    } else {
      std::snprintf(buf, sizeof buf, "%.17e,%.17e,nan,nan,nan", c.x1, c.x2);
    }
    out << buf << ',' << c.status << '\n';
  }
}

}  // namespace mmfe::energy
