#include <gtest/gtest.h>

#include "mmfe/errors.hpp"
#include "mmfe/linalg.hpp"
#include "mmfe/lqg.hpp"
#include "oracles.hpp"

using namespace mmfe;
using namespace mmfe::lqg;

namespace {

DiscountedLqr scalar(double a, double b, double q, double r, double alpha, double noise = 0.0) {
  DiscountedLqr p;
  p.a = Eigen::MatrixXd::Constant(1, 1, a);
  p.b = Eigen::MatrixXd::Constant(1, 1, b);
  p.q = Eigen::MatrixXd::Constant(1, 1, q);
  p.r = Eigen::MatrixXd::Constant(1, 1, r);
  p.alpha = alpha;
  p.noise_cov = Eigen::MatrixXd::Constant(1, 1, noise);
  return p;
}

}  // namespace

TEST(Riccati, ZeroDynamicsGivesQ) {
  DiscountedLqr p;
  p.a = Eigen::MatrixXd::Zero(3, 3);
  p.b = Eigen::MatrixXd::Ones(3, 1);
  Eigen::MatrixXd f(3, 3);
  f << 1, 0.2, 0, 0.1, 2, 0.3, 0, 0.5, 1;
  p.q = f * f.transpose();
  p.r = Eigen::MatrixXd::Identity(1, 1);
  p.noise_cov = Eigen::MatrixXd::Identity(3, 3);
  const auto sol = riccati_solve(p);
  EXPECT_LT((sol.k - p.q).norm(), 1e-14);
  EXPECT_LE(sol.iterations, 1);
}

TEST(Riccati, ZeroCostGivesZero) {
  const auto sol = riccati_solve(scalar(0.9, 1.0, 0.0, 1.0, 0.9, 1.0));
  EXPECT_EQ(sol.k(0, 0), 0.0);
  EXPECT_EQ(sol.gain(0, 0), 0.0);
}

TEST(Riccati, ScalarBisectionOracle) {
  for (const auto& [a, b, q, r, al] : {std::tuple{0.9, 1.0, 1.0, 1.0, 0.9}, std::tuple{1.3, 0.5, 2.0, 0.3, 0.95},
                                       std::tuple{0.2, 2.0, 0.7, 5.0, 0.5}}) {
    const auto sol = riccati_solve(scalar(a, b, q, r, al));
    EXPECT_NEAR(sol.k(0, 0), oracle::scalar_riccati(a, b, q, r, al), 1e-10);
    EXPECT_LT(sol.residual, 1e-12);
  }
}

TEST(Riccati, MonotoneIterates) {
  DiscountedLqr p;
  p.a = (Eigen::MatrixXd(2, 2) << 1.1, 0.3, 0.0, 0.8).finished();
  p.b = (Eigen::MatrixXd(2, 1) << 0.0, 1.0).finished();
  p.q = Eigen::MatrixXd::Identity(2, 2);
  p.r = Eigen::MatrixXd::Identity(1, 1) * 0.5;
  p.alpha = 0.95;
  p.noise_cov = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd prev;
  double worst = 1.0;
  RiccatiOptions opts;
  opts.observer = [&](long j, const Eigen::MatrixXd& k) {
    if (j > 0) worst = std::min(worst, min_symmetric_eigenvalue(k - prev));
    prev = k;
  };
  riccati_solve(p, opts);
  EXPECT_GE(worst, -1e-10);
}

TEST(Riccati, NonConvergenceCarriesResidual) {
  RiccatiOptions opts;
  opts.max_iter = 3;
  try {
    riccati_solve(scalar(0.99, 1.0, 1.0, 1.0, 0.99), opts);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_GT(e.last_residual(), 0.0);
    EXPECT_EQ(e.iterations(), 3);
  }
}

TEST(Riccati, RejectsBadShapes) {
  DiscountedLqr p = scalar(0.5, 1.0, 1.0, 1.0, 0.9);
  p.b = Eigen::MatrixXd::Ones(2, 1);
  EXPECT_THROW(riccati_solve(p), ShapeError);
  p = scalar(0.5, 1.0, 1.0, 1.0, 1.0);
  EXPECT_THROW(riccati_solve(p), ParameterError);
}

TEST(Value, ZeroAndSymmetry) {
  const auto quiet = riccati_solve(scalar(0.9, 1.0, 1.0, 1.0, 0.9, 0.0));
  EXPECT_EQ(value_at(quiet, Eigen::VectorXd::Zero(1)), 0.0);
  const auto sol = riccati_solve(scalar(0.9, 1.0, 1.0, 1.0, 0.9, 2.0));
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(1, 1.7);
  EXPECT_DOUBLE_EQ(value_at(sol, z), value_at(sol, -z));
  EXPECT_NEAR(sol.noise_constant, 0.9 / 0.1 * sol.k(0, 0) * 2.0, 1e-9);
}

TEST(Action, LinearAndHomogeneous) {
  const auto sol = riccati_solve(scalar(0.9, 1.0, 1.0, 1.0, 0.9, 1.0));
  EXPECT_EQ(optimal_action(sol, Eigen::VectorXd::Zero(1))(0), 0.0);
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(1, 0.8);
  EXPECT_DOUBLE_EQ(optimal_action(sol, 2.0 * z)(0), 2.0 * optimal_action(sol, z)(0));
}

TEST(Lyapunov, ZeroDynamicsAndScalar) {
  const Eigen::MatrixXd s = (Eigen::MatrixXd(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
  EXPECT_LT((lyapunov_stationary_cov(Eigen::MatrixXd::Zero(2, 2), s) - s).norm(), 1e-15);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, 0.6);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  EXPECT_NEAR(lyapunov_stationary_cov(a, one)(0, 0), 1.5625, 1e-12);
  EXPECT_NEAR(lyapunov_direct(a, one)(0, 0), 1.5625, 1e-12);
}

TEST(Lyapunov, ResidualAndDirectAgree) {
  Eigen::MatrixXd a(3, 3);
  a << 0.5, 0.2, 0.0, -0.1, 0.7, 0.3, 0.05, 0.0, 0.4;
  Eigen::MatrixXd f = Eigen::MatrixXd::Random(3, 3);
  const Eigen::MatrixXd s = f * f.transpose();
  LyapunovOptions opts;
  const Eigen::MatrixXd lam = lyapunov_stationary_cov(a, s, opts);
  EXPECT_LT(lyapunov_residual(a, s, lam), 1e-10);
  EXPECT_LT((lam - lyapunov_direct(a, s)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lyapunov, UnstableRejected) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, 1.0);
  EXPECT_THROW(lyapunov_stationary_cov(a, a), InstabilityError);
}
