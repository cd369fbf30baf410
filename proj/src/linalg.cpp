#include "sgdml/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "sgdml/error.hpp"

namespace sgdml {

namespace {

void require_square_finite(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimMismatch, "matrix is not square");
  if (!m.allFinite()) throw Error(ErrorCode::NonFiniteInput, "matrix has non-finite entries");
}

}  // namespace

EigenDecomposition sym_eigen(const Matrix& m) {
  require_square_finite(m);
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NonFiniteInput, "eigensolver failed to converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix psd_project(const Matrix& m) {
  EigenDecomposition eig = sym_eigen(m);
  if (eig.values.size() == 0 || eig.values.minCoeff() >= 0.0) {
    // Already in the cone: the symmetrised input is its own projection.
    return 0.5 * (m + m.transpose());
  }
  const Vector clamped = eig.values.cwiseMax(0.0);
  Matrix out = eig.vectors * clamped.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix domain_project(const Matrix& m, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::InvalidRadius, "radius must be positive and finite");
  Matrix psd = psd_project(m);
  const double norm = frobenius_norm(psd);
  if (norm > radius) psd /= norm / radius;
  return psd;
}

double frobenius_norm(const Matrix& m) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFiniteInput, "matrix has non-finite entries");
  return m.norm();
}

double mahalanobis_sq(const Matrix& m, const Eigen::Ref<const Vector>& a,
                      const Eigen::Ref<const Vector>& b) {
  if (m.rows() != m.cols() || a.size() != m.rows() || b.size() != m.rows())
    throw Error(ErrorCode::DimMismatch, "metric and vector dimensions disagree");
  const Vector diff = a - b;
  return diff.dot(m * diff);
}

}  // namespace sgdml
