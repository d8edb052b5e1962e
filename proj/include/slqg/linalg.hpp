#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace slqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

// Relative asymmetry above this is rejected at model construction.
inline constexpr double kSymmetryTol = 1e-8;
// Negative eigenvalues above this fraction of lambda_max are clipped to zero;
// anything more negative is treated as a numerical failure.
inline constexpr double kPsdClipTol = 1e-12;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double relative_asymmetry(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (m.size() == 0 || scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

inline Vector eigenvalues(const Matrix& m) {
  if (m.size() == 0) return Vector{};
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const Matrix& m) {
  const Vector ev = eigenvalues(m);
  return ev.size() == 0 ? 0.0 : ev.minCoeff();
}

inline double max_eigenvalue(const Matrix& m) {
  const Vector ev = eigenvalues(m);
  return ev.size() == 0 ? 0.0 : ev.maxCoeff();
}

/// Scale-relative positive-definiteness threshold: 1e-10 * (1 + lambda_max).
inline double pd_tolerance(double lambda_max) { return 1e-10 * (1.0 + std::max(lambda_max, 0.0)); }

inline bool is_positive_definite(const Matrix& m) {
  if (m.size() == 0) return true;
  const Vector ev = eigenvalues(m);
  return ev.minCoeff() > pd_tolerance(ev.maxCoeff());
}

inline bool is_positive_semidefinite(const Matrix& m) {
  if (m.size() == 0) return true;
  const Vector ev = eigenvalues(m);
  return ev.minCoeff() >= -pd_tolerance(ev.maxCoeff());
}

/// Inverse symmetric square root via eigendecomposition.
inline Matrix inverse_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  const Vector ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() <= pd_tolerance(ev.maxCoeff())) {
    throw std::invalid_argument("matrix not positive definite");
  }
  return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

/// Clips small negative eigenvalues (|lambda| <= 1e-12 * lambda_max) to zero.
/// Throws if the matrix is indefinite beyond that.
inline Matrix repair_psd(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  Vector ev = es.eigenvalues();
  const double lmax = std::max(ev.maxCoeff(), 0.0);
  if (ev.minCoeff() >= 0.0) return symmetrize(m);
  if (ev.minCoeff() < -kPsdClipTol * lmax) {
    throw std::runtime_error("covariance lost positive semidefiniteness (lambda_min = " +
                             std::to_string(ev.minCoeff()) + ")");
  }
  ev = ev.cwiseMax(0.0);
  return symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

/// Factor F with F F^T = m for a PSD m; negative eigenvalues are clipped at 0.
inline Matrix psd_factor(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

inline double relative_residual(const Matrix& lhs, const Matrix& rhs) {
  const double diff = (lhs - rhs).norm();
  const double scale = std::max(lhs.norm(), rhs.norm());
  return scale == 0.0 ? diff : diff / scale;
}

}  // namespace linalg
}  // namespace slqg
