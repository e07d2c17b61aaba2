#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmfe/energy_example.hpp"
#include "mmfe/lqg.hpp"
#include "mmfe/mmfe_core.hpp"
#include "mmfe/parallel.hpp"

namespace mmfe::sim {

struct SimConfig {
  long replications = 100'000;
  int horizon_periods = 0;  ///< 0 selects default_horizon(discount)
  std::uint64_t seed = 1;
  double discount = 0.9;

  /// Smallest T with discount^T below tolerance.
  static int default_horizon(double discount, double tolerance = 1e-8);
  int effective_horizon() const;
  void validate() const;
};

struct CostEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long replications = 0;
  /// discount^T / (1 - discount) times the largest per-period cost seen at the
  /// final simulated period.
  double truncation_bias_bound = 0.0;
  int horizon = 0;
};

/// Gaussian initial law: mean vector and covariance.
struct InitialDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  /// Splits a second moment whose coordinate `constant_index` is the constant
  /// `value` into mean and covariance.
  static InitialDistribution from_second_moment(const Eigen::MatrixXd& second_moment, int constant_index,
                                                double value);
};

/// Monte Carlo estimate of E sum_{j<T} alpha^j (chi_j' Q chi_j + a_j' R a_j)
/// under a_j = -gain chi_j and Gaussian noise with the problem's covariance.
/// Throws InstabilityError when a path diverges.
CostEstimate simulate_discounted_cost(const lqg::DiscountedLqr& system, const InitialDistribution& init,
                                      const Eigen::MatrixXd& gain, const SimConfig& cfg,
                                      Execution exec = Execution::parallel);

struct PairEstimate {
  CostEstimate no_forecast;
  CostEstimate forecast;
  CostEstimate difference;  ///< per-replication no_forecast - forecast
};

/// Both energy controllers on common random numbers: one weather path from
/// the forecast roll, one building-noise path, optimal gains for each system.
PairEstimate simulate_energy_pair(const energy::EnergyParams& params, const SimConfig& cfg,
                                  Execution exec = Execution::parallel);

/// Same as simulate_energy_pair with explicit gains (3-state and 5-state).
PairEstimate simulate_energy_pair(const energy::EnergyParams& params, const Eigen::MatrixXd& gain_no_forecast,
                                  const Eigen::MatrixXd& gain_forecast, const SimConfig& cfg,
                                  Execution exec = Execution::parallel);

/// Joint weather and forecast path driven by one counter-based epsilon array,
/// emitted after a burn-in of 10 * trunc_lag periods. Record n holds W_n and
/// (F_{n+1|n}, ..., F_{n+r|n}).
std::vector<PathRecord> simulate_mmfe_joint_path(const MmfeModel& model, int r, long length, std::uint64_t seed);

/// One replication of simulate_discounted_cost written as
/// `j,chi[0..m-1],action[0..p-1],discounted_cost` rows.
void write_trace_csv(std::ostream& out, const lqg::DiscountedLqr& system, const InitialDistribution& init,
                     const Eigen::MatrixXd& gain, const SimConfig& cfg, long replication);

/// `key=value` lines prefixed with `name.`.
std::string format_estimate(const std::string& name, const CostEstimate& est);

}  // namespace mmfe::sim
