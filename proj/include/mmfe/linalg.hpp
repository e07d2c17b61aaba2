#pragma once

#include <iosfwd>

#include <Eigen/Dense>

namespace mmfe {

/// Largest eigenvalue modulus.
double spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& a);

bool is_symmetric(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol = 1e-12);

/// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Square factor F with F F^T = m for a symmetric PSD m. Tiny negative
/// eigenvalues from round-off are clamped to zero.
Eigen::MatrixXd psd_factor(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Row-major dump with a `# rows,cols` header line.
void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& m);

}  // namespace mmfe
