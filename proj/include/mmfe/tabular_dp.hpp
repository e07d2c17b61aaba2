#pragma once

// Finite-horizon tabular dynamic programming over stages 0..t:
//
//   v_t(s) = min_a c_t(s, a),
//   v_i(s) = min_a [ c_i(s, a) + sum_{s'} P_i(s' | s, a) v_{i+1}(s') ].

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mmfe/parallel.hpp"

namespace mmfe::dp {

/// Transition table with one row per (state, action) pair, row index
/// s * num_actions + a, and one column per next state.
using Kernel = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using KernelPtr = std::shared_ptr<const Kernel>;

struct TabularMdp {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  /// kernels[i] drives stage i -> i+1, for i = 0..t-1. Stationary problems
  /// share one table across stages.
  std::vector<KernelPtr> kernels;
  /// costs[i](s, a) for i = 0..t.
  std::vector<Eigen::MatrixXd> costs;

  int num_states() const { return static_cast<int>(states.size()); }
  int num_actions() const { return static_cast<int>(actions.size()); }
  /// Number of stages t + 1.
  int horizon() const { return static_cast<int>(costs.size()); }

  /// Throws ShapeError on inconsistent sizes and MalformedKernelError when a
  /// row is negative somewhere or does not sum to 1 within 1e-12.
  void validate() const;
};

struct Solution {
  std::vector<Eigen::VectorXd> values;  ///< values[i](s)
  std::vector<std::vector<int>> policy;  ///< policy[i][s]
};

/// Backward induction; ties go to the smallest action index. The parallel
/// path splits states within a stage and matches the serial one bit for bit.
Solution backward_induction(const TabularMdp& mdp, Execution exec = Execution::parallel);

/// Exact stage values of a fixed deterministic Markov policy.
std::vector<Eigen::VectorXd> evaluate_policy(const TabularMdp& mdp, const std::vector<std::vector<int>>& policy);

/// Enumerates every deterministic Markov policy and takes the pointwise
/// minimum of their values. Throws SizeError above `max_policies`.
Solution brute_force_policy_enum(const TabularMdp& mdp, double max_policies = 1e6);

/// Random stochastic instance for testing: dense kernels with Dirichlet-like
/// rows and uniform costs in [0, 1).
TabularMdp random_mdp(int num_states, int num_actions, int horizon, std::uint64_t seed, bool stationary = false);

/// `stage,state,value,action` rows.
void write_solution_csv(std::ostream& out, const TabularMdp& mdp, const Solution& sol);

/// Helper for builders: assembles a kernel from triplets and prunes zeros.
Kernel make_kernel(int rows, int cols, std::vector<Eigen::Triplet<double>>& triplets);

}  // namespace mmfe::dp
