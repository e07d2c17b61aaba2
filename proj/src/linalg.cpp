#include "mmfe/linalg.hpp"

#include <cstdio>
#include <ostream>

#include <Eigen/Eigenvalues>

namespace mmfe {

double spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1) return std::abs(a(0, 0));
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_symmetric(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double min_symmetric_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Eigen::MatrixXd psd_factor(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal();
}

void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& m) {
  out << "# " << m.rows() << ',' << m.cols() << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17e", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace mmfe
