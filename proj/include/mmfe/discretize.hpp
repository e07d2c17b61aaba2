#pragma once

// Quantized toy instances of the forecast-augmented recursions. Weather is
// scalar. The control acts on the indoor/outdoor gap Delta = X - W, which
// evolves as Delta' = rho Delta + a + V independently of the weather, and the
// stage cost is E[(X' - tau)^2] + kappa a^2 with X' = Delta' + W'.

#include <utility>
#include <vector>

#include "mmfe/mmfe_core.hpp"
#include "mmfe/tabular_dp.hpp"

namespace mmfe::dp {

/// Sparse probability vector over grid atoms.
using AtomMass = std::vector<std::pair<int, double>>;

std::vector<double> centered_atoms(double center, double half_width, int count);

/// N(mean, var) mapped onto the Voronoi cells of `atoms` (sorted), with the
/// tails folded into the two end atoms. var = 0 gives a point mass on the
/// nearest atom. With `coarse_check`, an interior cell holding more than half
/// of the mass raises DiscretizationError.
AtomMass quantize_gaussian(const std::vector<double>& atoms, double mean, double var, bool coarse_check = false);

/// Splits a point between its two neighbouring atoms so that the mean is kept;
/// points outside the grid collapse onto the nearest end atom.
AtomMass interpolate_point(const std::vector<double>& atoms, double x);

struct ToyControl {
  double rho = 0.3;
  double kappa = 1.0;
  double tau = 74.0;
  double mean_v = 2.0;
  double sigma2_v = 1.0;
  std::vector<double> actions;

  void validate() const;
};

/// `count` actions spaced `step` apart around the action that holds Delta at
/// the setpoint gap tau - mean_w.
std::vector<double> default_actions(const ToyControl& control, double mean_w, int count, double step);

struct WeatherGrid {
  std::vector<double> delta;
  std::vector<double> w;
};

/// Forecast-state grid: f[j-1] holds the atoms of F_{n+j|n}; w is only used to
/// quantize the realized weather inside a transition.
struct ForecastGrid {
  std::vector<double> delta;
  std::vector<double> w;
  std::vector<std::vector<double>> f;

  int horizon() const { return static_cast<int>(f.size()); }
};

/// Stationary standard deviation of F_{n+j|n} (j = 0 gives W itself).
double stationary_forecast_sd(const MmfeModel& model, int j);

WeatherGrid default_weather_grid(const MmfeModel& model, const ToyControl& control, int delta_atoms, int w_atoms,
                                 double width_sd = 4.0);
ForecastGrid default_forecast_grid(const MmfeModel& model, const ToyControl& control, int r, int delta_atoms,
                                   int w_atoms, int f_atoms, double width_sd = 4.0);

/// State (Delta, W); stationary AR(1) weather kernel. `stages` = t + 1.
TabularMdp discretize_no_forecast(const MmfeModel& model, const ToyControl& control, int stages,
                                  const WeatherGrid& grid);

/// State (Delta, W) with the weather law conditional on the frozen time-0
/// entries: at stage i, W' ~ N(g W + E Z + frozen part, sum_{j<=i} var eps(j)).
TabularMdp discretize_static_forecast(const MmfeModel& model, const EpsilonArray& frozen, const ToyControl& control,
                                      int stages, const WeatherGrid& grid);

/// State (Delta, F_{n+1|n}, ..., F_{n+r|n}); one kernel shared by all stages.
/// Throws SizeError when the kernel would hold more than `max_entries` entries.
TabularMdp discretize_dynamic_forecast(const MmfeModel& model, const ToyControl& control, int stages,
                                       const ForecastGrid& grid, double max_entries = 2e7);

/// Forecast-vector state with the time-0 part of the long-horizon term frozen:
/// stage-dependent kernels. Limited to r <= max_r.
TabularMdp discretize_static_dynamic(const MmfeModel& model, const EpsilonArray& frozen, const ToyControl& control,
                                     int stages, const ForecastGrid& grid, int max_r = 1, double max_entries = 2e7);

/// Index of the atom nearest to x.
int nearest_atom(const std::vector<double>& atoms, double x);

}  // namespace mmfe::dp
