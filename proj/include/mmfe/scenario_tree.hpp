#pragma once

// Common-noise scenario tree with truncation lag 1 and two-point noise: at
// every period the forecaster learns eps_{n+1}(n+1) = +-sqrt(v0) and
// eps_{n+2}(n+1) = +-sqrt(v1), each sign with probability 1/2. Both
// controllers face the same tree; they differ only in what they observe.

#include <cstdint>
#include <vector>

#include "mmfe/tabular_dp.hpp"

namespace mmfe::dp {

struct ScenarioInstance {
  double g = 0.6;
  double mean_z = 32.0;
  double sigma2 = 1.0;
  double gamma = 0.95;
  double rho = 0.3;
  double kappa = 1.0;
  double tau = 74.0;
  double mean_v = 2.0;
  std::vector<double> actions{-6.0, -4.0, -2.0};
  int periods = 3;  ///< decision stages 0..periods
  double w0 = 80.0;
  double pending0 = 0.0;  ///< eps_1(0), known to the forecaster at time 0
};

struct ScenarioComparison {
  TabularMdp forecast;     ///< state (tree node, Delta)
  TabularMdp no_forecast;  ///< state (weather-history information set, Delta)
  int forecast_root = 0;
  int no_forecast_root = 0;
  double forecast_value = 0.0;
  double no_forecast_value = 0.0;
};

/// Builds both MDPs on one tree and solves them by backward induction.
ScenarioComparison scenario_tree_comparison(const ScenarioInstance& inst, Execution exec = Execution::parallel);

/// Randomized instance for property checks.
ScenarioInstance random_scenario_instance(std::uint64_t seed);

}  // namespace mmfe::dp
