#pragma once

// Property battery shared by the `validate` CLI mode and the acceptance
// binary. Every check reports its sub-checks and its wall-clock time.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mmfe/energy_example.hpp"

namespace mmfe::validation {

struct SubCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckResult {
  std::string name;
  std::vector<SubCheck> subchecks;
  double seconds = 0.0;

  bool passed() const;
  void add(std::string sub, bool ok, std::string detail);
};

struct Scale {
  long martingale_replications = 100'000;
  long moment_draws = 1'000'000;
  long value_replications = 100'000;
  int grid_points = 25;
  int dp_instances = 200;
  int tree_instances = 50;
};

/// Conditional-mean martingale test, orthogonality of martingale
/// differences, F_{n|n} = W_n and telescoping per path.
CheckResult martingale_suite(const energy::EnergyParams& params, long replications, std::uint64_t seed);

/// Fixed-point residuals of both energy systems and monotone PSD ordering of
/// the Riccati iterates.
CheckResult riccati_properties(const energy::EnergyParams& params);

/// Closed-form second moments against the Lyapunov solution, and the noise
/// covariance C against sampled roll increments.
CheckResult moment_agreement(const energy::EnergyParams& params, long draws, std::uint64_t seed);

/// Closed-form expected costs against Monte Carlo estimates.
CheckResult value_validation(const energy::EnergyParams& params, long replications, std::uint64_t seed);

/// Sign, limit, monotonicity and symmetry properties of D over the default
/// four-panel sweep.
CheckResult improvement_properties(const energy::EnergyParams& params, int grid_points);

/// Backward induction against policy enumeration, and information
/// monotonicity on common-noise scenario trees.
CheckResult tabular_dp_properties(int instances, int tree_instances, std::uint64_t seed);

/// Runs every check above in order.
std::vector<CheckResult> run_battery(const energy::EnergyParams& params, const Scale& scale, std::uint64_t seed,
                                     const std::function<void(const CheckResult&)>& on_result = {});

/// `[PASS] name (1.23 s)` followed by one indented line per sub-check.
std::string format_result(const CheckResult& result);

}  // namespace mmfe::validation
