#pragma once

// Discounted linear-quadratic regulation with additive i.i.d. noise:
//
//   chi_{j+1} = A chi_j + B a_j + xi_{j+1},   cost sum_j alpha^j (chi_j' Q chi_j + a_j' R a_j).

#include <functional>

#include <Eigen/Dense>

namespace mmfe::lqg {

struct DiscountedLqr {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
  double alpha = 0.9;
  Eigen::MatrixXd noise_cov;

  int state_dim() const { return static_cast<int>(a.rows()); }
  int action_dim() const { return static_cast<int>(b.cols()); }

  /// Throws ShapeError or ParameterError when the problem is malformed.
  void validate() const;
};

struct RiccatiSolution {
  Eigen::MatrixXd k;
  Eigen::MatrixXd gain;  ///< optimal action = -gain * state
  double noise_constant = 0.0;
  long iterations = 0;
  double residual = 0.0;
};

struct RiccatiOptions {
  double tol = 1e-12;
  long max_iter = 1'000'000;
  /// Called with (j, K_j) for every iterate, starting at K_0 = Q.
  std::function<void(long, const Eigen::MatrixXd&)> observer;
};

/// One application of the discounted Riccati map to K.
Eigen::MatrixXd riccati_map(const DiscountedLqr& problem, const Eigen::MatrixXd& k);

Eigen::MatrixXd feedback_gain(const DiscountedLqr& problem, const Eigen::MatrixXd& k);

/// Value iteration on the Riccati map from K_0 = Q until the Frobenius change
/// drops below tol. Throws NonConvergenceError after max_iter iterations.
RiccatiSolution riccati_solve(const DiscountedLqr& problem, const RiccatiOptions& options = {});

/// z' K z + noise_constant.
double value_at(const RiccatiSolution& sol, const Eigen::Ref<const Eigen::VectorXd>& z);

Eigen::VectorXd optimal_action(const RiccatiSolution& sol, const Eigen::Ref<const Eigen::VectorXd>& z);

/// Expected optimal cost when the initial state has second moment `m`:
/// tr(K m) + noise_constant.
double expected_value(const RiccatiSolution& sol, const Eigen::Ref<const Eigen::MatrixXd>& m);

struct LyapunovOptions {
  double tol = 1e-12;
  long max_iter = 1'000'000;
};

/// Stationary covariance Lambda = A Lambda A' + Sigma by fixed-point iteration
/// from zero. Throws InstabilityError when the spectral radius of A is >= 1.
Eigen::MatrixXd lyapunov_stationary_cov(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                        const Eigen::Ref<const Eigen::MatrixXd>& noise_cov,
                                        const LyapunovOptions& options = {});

/// Direct solve of the same equation through the Kronecker-vectorized system.
/// Only practical for small state dimensions.
Eigen::MatrixXd lyapunov_direct(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                const Eigen::Ref<const Eigen::MatrixXd>& noise_cov);

double lyapunov_residual(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& noise_cov,
                         const Eigen::Ref<const Eigen::MatrixXd>& lambda);

}  // namespace mmfe::lqg
