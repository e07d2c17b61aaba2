#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmfe/energy_example.hpp"
#include "mmfe/parallel.hpp"

namespace mmfe::energy {

/// Names accepted as sweep axes.
const std::vector<std::string>& sweep_axis_names();
bool is_sweep_axis(const std::string& name);

/// Returns a copy of `base` with the named parameter set to `value`.
/// Varying g keeps mean_w fixed, so E Z_0 follows (1 - g) mean_w.
EnergyParams with_axis_value(const EnergyParams& base, const std::string& axis, double value);
double axis_value(const EnergyParams& params, const std::string& axis);

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

/// `count` evenly spaced values over [lo, hi].
std::vector<double> linspace(double lo, double hi, int count);

/// Default range of an axis, bracketing the caption value. The tau range is
/// centred on the equilibrium temperature of `base`.
std::pair<double, double> default_axis_range(const std::string& axis, const EnergyParams& base);

struct SweepCell {
  double x1 = 0.0;
  double x2 = 0.0;
  double cost_no_forecast = 0.0;
  double cost_forecast = 0.0;
  double d_percent = 0.0;
  std::string status = "ok";  ///< "ok" or the error category of the failed cell

  bool ok() const { return status == "ok"; }
};

struct SweepGrid {
  SweepAxis axis1;
  SweepAxis axis2;
  std::vector<SweepCell> cells;  ///< row-major: index i1 * axis2.values.size() + i2

  const SweepCell& at(std::size_t i1, std::size_t i2) const { return cells.at(i1 * axis2.values.size() + i2); }
};

/// Evaluates every grid cell. Invalid parameter combinations become per-cell
/// error records; the sweep itself does not throw for them.
SweepGrid sweep_grid(const EnergyParams& base, const SweepAxis& axis1, const SweepAxis& axis2,
                     Execution exec = Execution::parallel);

/// Header `<axis1>,<axis2>,cost_no_forecast,cost_forecast,D_percent,status`,
/// then one row per cell in row-major order.
void write_sweep_csv(std::ostream& out, const SweepGrid& grid);

}  // namespace mmfe::energy
