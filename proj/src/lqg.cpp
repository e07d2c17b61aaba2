#include "mmfe/lqg.hpp"

#include <cmath>
#include <string>

#include "mmfe/errors.hpp"
#include "mmfe/linalg.hpp"

namespace mmfe::lqg {

namespace {

void require_square(const Eigen::MatrixXd& m, Eigen::Index n, const char* name) {
  if (m.rows() != n || m.cols() != n) {
    throw ShapeError(std::string(name) + " must be " + std::to_string(n) + "x" + std::to_string(n));
  }
}

}  // namespace

void DiscountedLqr::validate() const {
  const Eigen::Index m = a.rows();
  if (m == 0) throw ShapeError("A must be non-empty");
  require_square(a, m, "A");
  if (b.rows() != m || b.cols() == 0) throw ShapeError("B must have as many rows as A and at least one column");
  require_square(q, m, "Q");
  require_square(r, b.cols(), "R");
  require_square(noise_cov, m, "noise covariance");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (!is_symmetric(q)) throw ParameterError("Q must be symmetric");
  if (!is_symmetric(r)) throw ParameterError("R must be symmetric");
  if (!is_symmetric(noise_cov)) throw ParameterError("noise covariance must be symmetric");
  if (min_symmetric_eigenvalue(q) < -1e-12) throw ParameterError("Q must be positive semidefinite");
  if (!(min_symmetric_eigenvalue(r) > 0.0)) throw ParameterError("R must be positive definite");
  if (min_symmetric_eigenvalue(noise_cov) < -1e-12) throw ParameterError("noise covariance must be PSD");
}

Eigen::MatrixXd riccati_map(const DiscountedLqr& p, const Eigen::MatrixXd& k) {
  const double al = p.alpha;
  const Eigen::MatrixXd s = al * p.b.transpose() * k * p.b + p.r;
  // s is positive definite whenever R is, so LDLT never meets a singular pivot.
  const Eigen::MatrixXd bk = p.b.transpose() * k;
  const Eigen::MatrixXd inner = al * k - al * al * bk.transpose() * s.ldlt().solve(bk);
  Eigen::MatrixXd next = p.a.transpose() * inner * p.a + p.q;
  return 0.5 * (next + next.transpose());
}

Eigen::MatrixXd feedback_gain(const DiscountedLqr& p, const Eigen::MatrixXd& k) {
  const Eigen::MatrixXd s = p.alpha * p.b.transpose() * k * p.b + p.r;
  return p.alpha * s.ldlt().solve(p.b.transpose() * k * p.a);
}

RiccatiSolution riccati_solve(const DiscountedLqr& problem, const RiccatiOptions& options) {
  problem.validate();
  if (!(options.tol > 0.0)) throw ParameterError("tolerance must be positive");
  Eigen::MatrixXd k = problem.q;
  if (options.observer) options.observer(0, k);
  double change = 0.0;
  for (long j = 1; j <= options.max_iter; ++j) {
    Eigen::MatrixXd next = riccati_map(problem, k);
    change = (next - k).norm();
    k = std::move(next);
    if (options.observer) options.observer(j, k);
    if (!std::isfinite(change)) break;
    if (change < options.tol) {
      RiccatiSolution sol;
      sol.gain = feedback_gain(problem, k);
      sol.noise_constant = problem.alpha / (1.0 - problem.alpha) * (k * problem.noise_cov).trace();
      sol.iterations = j;
      sol.residual = (riccati_map(problem, k) - k).norm();
      sol.k = std::move(k);
      return sol;
    }
  }
  throw NonConvergenceError("Riccati iteration did not converge", change, options.max_iter);
}

double value_at(const RiccatiSolution& sol, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != sol.k.rows()) throw ShapeError("state dimension does not match the solution");
  return z.dot(sol.k * z) + sol.noise_constant;
}

Eigen::VectorXd optimal_action(const RiccatiSolution& sol, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != sol.gain.cols()) throw ShapeError("state dimension does not match the gain");
  return -sol.gain * z;
}

double expected_value(const RiccatiSolution& sol, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() != sol.k.rows() || m.cols() != sol.k.cols()) throw ShapeError("second moment has the wrong shape");
  return (sol.k * m).trace() + sol.noise_constant;
}

Eigen::MatrixXd lyapunov_stationary_cov(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                        const Eigen::Ref<const Eigen::MatrixXd>& noise_cov,
                                        const LyapunovOptions& options) {
  if (a.rows() != a.cols()) throw ShapeError("A must be square");
  require_square(noise_cov, a.rows(), "noise covariance");
  if (spectral_radius(a) >= 1.0 - 1e-10) throw InstabilityError("spectral radius of A must be < 1");
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  double change = 0.0;
  for (long j = 1; j <= options.max_iter; ++j) {
    Eigen::MatrixXd next = a * lam * a.transpose() + noise_cov;
    next = 0.5 * (next + next.transpose());
    change = (next - lam).norm();
    lam = std::move(next);
    if (change < options.tol) return lam;
  }
  throw NonConvergenceError("Lyapunov iteration did not converge", change, options.max_iter);
}

Eigen::MatrixXd lyapunov_direct(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                const Eigen::Ref<const Eigen::MatrixXd>& noise_cov) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw ShapeError("A must be square");
  require_square(noise_cov, n, "noise covariance");
  if (n > 40) throw SizeError("direct Lyapunov solve is limited to 40 states");
  // vec(A L A') = (A kron A) vec(L) for column-major vec.
  Eigen::MatrixXd kron(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = a(i, j) * a;
  }
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n * n, n * n) - kron;
  const Eigen::MatrixXd sigma = noise_cov;
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(sigma.data(), n * n);
  const Eigen::VectorXd sol = lhs.partialPivLu().solve(rhs);
  Eigen::MatrixXd lam = Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, n);
  return 0.5 * (lam + lam.transpose());
}

double lyapunov_residual(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& noise_cov,
                         const Eigen::Ref<const Eigen::MatrixXd>& lambda) {
  return (lambda - a * lambda * a.transpose() - noise_cov).norm();
}

}  // namespace mmfe::lqg
