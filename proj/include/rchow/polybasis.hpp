#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <map>
#include <vector>

#include "rchow/types.hpp"

namespace rchow {

using MultiIndex = std::vector<int>;

inline constexpr std::size_t kDefaultBasisCap = 200000;

enum class BasisKind { Full, Multilinear };

/// All monomials of degree <= d in n variables, in graded lexicographic order:
/// by total degree, then by exponent tuples in descending lexicographic order,
/// so x1 precedes x2 and x1^2 precedes x1*x2. Index 0 is the constant.
class MonomialBasis {
 public:
  MonomialBasis(int n, int d, BasisKind kind = BasisKind::Full, std::size_t cap = kDefaultBasisCap);

  int n() const { return n_; }
  int d() const { return d_; }
  BasisKind kind() const { return kind_; }
  bool multilinear() const { return kind_ == BasisKind::Multilinear; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& index(std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  int degree_of(std::size_t i) const { return degrees_[i]; }

  /// Position of a multi-index, or -1 when it is not part of the basis.
  std::ptrdiff_t find(const MultiIndex& a) const;
  /// Position of the monomial x_j (degree-1 slot j).
  std::size_t linear_slot(int j) const;

  /// m(x): entry i is prod_j x_j^{a^i_j}.
  Vector eval(VectorRef x) const;
  void eval_into(VectorRef x, Eigen::Ref<Vector> out) const;
  /// One row of monomial values per input row.
  Matrix eval_rows(const PointMatrix& points) const;

  bool same_as(const MonomialBasis& other) const {
    return n_ == other.n_ && d_ == other.d_ && kind_ == other.kind_;
  }

 private:
  int n_;
  int d_;
  BasisKind kind_;
  std::vector<MultiIndex> indices_;
  std::vector<int> degrees_;
  // m_i = m_{parent_[i]} * x_{factor_[i]} for i >= 1.
  std::vector<std::size_t> parent_;
  std::vector<int> factor_;
  std::map<MultiIndex, std::size_t> lookup_;
};

using BasisPtr = std::shared_ptr<const MonomialBasis>;

/// Number of monomials of degree <= d in n variables, binomial(n + d, d).
/// Saturates at SIZE_MAX instead of overflowing.
std::size_t basis_size(int n, int d, BasisKind kind = BasisKind::Full);

BasisPtr enumerate_basis(int n, int d, BasisKind kind = BasisKind::Full, std::size_t cap = kDefaultBasisCap);

/// p(x) = sum_i c_i m_i(x).
class Polynomial {
 public:
  Polynomial(BasisPtr basis, Vector coeffs);
  static Polynomial zero(BasisPtr basis);

  const MonomialBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Vector& coeffs() const { return coeffs_; }
  Vector& coeffs() { return coeffs_; }

  double eval(VectorRef x) const;
  /// Values on every row of points.
  Vector eval_rows(const PointMatrix& points) const;

  Polynomial scaled(double alpha) const { return {basis_, alpha * coeffs_}; }

 private:
  BasisPtr basis_;
  Vector coeffs_;
};

/// sqrt(c^T M c); throws NegativeQuadraticForm when c^T M c < -tol.
double l2_norm(const Polynomial& p, const Matrix& moments, double tol = 1e-9);

}  // namespace rchow
