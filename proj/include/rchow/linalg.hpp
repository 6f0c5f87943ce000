#pragma once

#include <cstddef>

#include "rchow/types.hpp"

namespace rchow {

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// Largest (algebraic) eigenpair of a symmetric matrix via a full
/// self-adjoint decomposition.
EigenPair top_eigenpair_dense(const Matrix& sym);

/// Largest (algebraic) eigenpair by shifted power iteration. Stops when the
/// Rayleigh quotient changes by less than rel_tol (relative) between steps.
EigenPair top_eigenpair_power(const Matrix& sym, double rel_tol = 1e-8, std::size_t max_steps = 10000);

/// Dense decomposition up to dense_limit rows, power iteration beyond.
EigenPair top_eigenpair(const Matrix& sym, std::size_t dense_limit = 2000);

/// Symmetric PSD moment matrix together with its pseudo-inverse square root.
/// Eigenvalues below null_rel_tol * (largest eigenvalue) are null directions.
class MomentGeometry {
 public:
  explicit MomentGeometry(Matrix sigma, double null_rel_tol = 1e-10);

  const Matrix& sigma() const { return sigma_; }
  std::size_t dim() const { return static_cast<std::size_t>(sigma_.rows()); }
  std::size_t rank() const { return static_cast<std::size_t>(whitener_.rows()); }

  /// r x dim matrix W with W Sigma W^T = I_r; rows span the range of Sigma.
  const Matrix& whitener() const { return whitener_; }
  /// dim x r orthonormal basis of the range.
  const Matrix& range_basis() const { return range_; }
  /// dim x (dim - r) orthonormal basis of the null space.
  const Matrix& null_basis() const { return null_; }
  const Vector& eigenvalues() const { return eigenvalues_; }

  /// Symmetric Sigma^{+1/2} (pseudo-inverse square root).
  Matrix inverse_sqrt() const;
  /// Moore-Penrose pseudo-inverse.
  Matrix pseudo_inverse() const;

  /// Orthonormal coordinates W * chi.
  Vector whiten(VectorRef chi) const { return whitener_ * chi; }
  /// Monomial coefficients of the polynomial whose orthonormal coordinates are rho.
  Vector coefficients_from_orthonormal(VectorRef rho) const { return whitener_.transpose() * rho; }

 private:
  Matrix sigma_;
  Matrix whitener_;
  Matrix range_;
  Matrix null_;
  Vector eigenvalues_;
  Vector range_values_;
};

/// Largest principal angle (radians) between span(a) and span(b). When the
/// spans have different dimensions the angle is measured against the larger
/// one from the smaller one; an empty span against a non-empty one gives pi/2.
double largest_principal_angle(const Matrix& a, const Matrix& b);

/// Orthonormalizes the columns of m (modified Gram-Schmidt), dropping columns
/// whose residual norm falls below tol.
Matrix orthonormalize_columns(const Matrix& m, double tol = 1e-9);

}  // namespace rchow
