#pragma once

#include <Eigen/Core>

namespace sgdml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Learned Mahalanobis metric: symmetric d x d, kept PSD with Frobenius norm
/// at most R by `domain_project`.
using MetricMatrix = Matrix;

struct EigenDecomposition {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns, vectors.col(c) pairs with values[c]
};

/// Full eigendecomposition of (m + m^T) / 2. Throws NonFiniteInput, DimMismatch
/// for a non-square input.
EigenDecomposition sym_eigen(const Matrix& m);

/// Frobenius-nearest PSD matrix: negative eigenvalues clamped to exactly 0.
Matrix psd_project(const Matrix& m);

/// Projection onto {M : M PSD, ||M||_F <= radius}: PSD projection followed by
/// shrinking onto the ball. Throws InvalidRadius when radius <= 0.
Matrix domain_project(const Matrix& m, double radius);

double frobenius_norm(const Matrix& m);

/// (a - b)^T m (a - b). Throws DimMismatch.
double mahalanobis_sq(const Matrix& m, const Eigen::Ref<const Vector>& a,
                      const Eigen::Ref<const Vector>& b);

}  // namespace sgdml
