#include "rchow/polybasis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rchow/error.hpp"

namespace rchow {

namespace {

std::size_t saturating_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  long double value = 1.0L;
  for (int i = 1; i <= k; ++i) value = value * static_cast<long double>(n - k + i) / i;
  if (value >= static_cast<long double>(std::numeric_limits<std::size_t>::max())) {
    return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(std::llround(value));
}

void append_degree(int n, int remaining, bool multilinear, int coord, MultiIndex& current,
                   std::vector<MultiIndex>& out) {
  if (coord == n - 1) {
    if (multilinear && remaining > 1) return;
    current[coord] = remaining;
    out.push_back(current);
    current[coord] = 0;
    return;
  }
  const int top = multilinear ? std::min(remaining, 1) : remaining;
  for (int e = top; e >= 0; --e) {
    // Enough room must remain in the later coordinates.
    if (multilinear && remaining - e > n - coord - 1) continue;
    current[coord] = e;
    append_degree(n, remaining - e, multilinear, coord + 1, current, out);
  }
  current[coord] = 0;
}

}  // namespace

std::size_t basis_size(int n, int d, BasisKind kind) {
  if (n < 1 || d < 0) return 0;
  if (kind == BasisKind::Full) return saturating_binomial(n + d, d);
  std::size_t total = 0;
  for (int g = 0; g <= std::min(n, d); ++g) {
    const std::size_t term = saturating_binomial(n, g);
    if (term > std::numeric_limits<std::size_t>::max() - total) return std::numeric_limits<std::size_t>::max();
    total += term;
  }
  return total;
}

MonomialBasis::MonomialBasis(int n, int d, BasisKind kind, std::size_t cap) : n_(n), d_(d), kind_(kind) {
  require(n >= 1 && d >= 1, ErrorKind::InvalidArgument, "basis needs n >= 1 and d >= 1");
  const std::size_t ell = basis_size(n, d, kind);
  require(ell <= cap, ErrorKind::SizeCapExceeded,
          "basis of size " + std::to_string(ell) + " exceeds cap " + std::to_string(cap));
  indices_.reserve(ell);
  MultiIndex current(static_cast<std::size_t>(n), 0);
  const bool ml = kind == BasisKind::Multilinear;
  for (int g = 0; g <= d; ++g) append_degree(n, g, ml, 0, current, indices_);

  degrees_.resize(indices_.size());
  parent_.assign(indices_.size(), 0);
  factor_.assign(indices_.size(), -1);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    int deg = 0;
    for (int e : indices_[i]) deg += e;
    degrees_[i] = deg;
    lookup_.emplace(indices_[i], i);
  }
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    MultiIndex reduced = indices_[i];
    int j = 0;
    while (reduced[static_cast<std::size_t>(j)] == 0) ++j;
    --reduced[static_cast<std::size_t>(j)];
    parent_[i] = lookup_.at(reduced);
    factor_[i] = j;
  }
}

std::ptrdiff_t MonomialBasis::find(const MultiIndex& a) const {
  const auto it = lookup_.find(a);
  return it == lookup_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::size_t MonomialBasis::linear_slot(int j) const {
  require(j >= 0 && j < n_, ErrorKind::DimensionMismatch, "linear slot out of range");
  // Degree-1 monomials follow the constant in coordinate order.
  return static_cast<std::size_t>(1 + j);
}

void MonomialBasis::eval_into(VectorRef x, Eigen::Ref<Vector> out) const {
  require(x.size() == n_, ErrorKind::DimensionMismatch,
          "point has length " + std::to_string(x.size()) + ", basis expects " + std::to_string(n_));
  out(0) = 1.0;
  for (std::size_t i = 1; i < indices_.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = out(static_cast<Eigen::Index>(parent_[i])) * x(factor_[i]);
  }
}

Vector MonomialBasis::eval(VectorRef x) const {
  Vector out(static_cast<Eigen::Index>(size()));
  eval_into(x, out);
  return out;
}

Matrix MonomialBasis::eval_rows(const PointMatrix& points) const {
  require(points.cols() == n_, ErrorKind::DimensionMismatch, "point matrix width does not match basis");
  Matrix out(points.rows(), static_cast<Eigen::Index>(size()));
  Vector buffer(static_cast<Eigen::Index>(size()));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    eval_into(points.row(r).transpose(), buffer);
    out.row(r) = buffer.transpose();
  }
  return out;
}

BasisPtr enumerate_basis(int n, int d, BasisKind kind, std::size_t cap) {
  return std::make_shared<const MonomialBasis>(n, d, kind, cap);
}

Polynomial::Polynomial(BasisPtr basis, Vector coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  require(basis_ != nullptr, ErrorKind::InvalidArgument, "polynomial needs a basis");
  require(static_cast<std::size_t>(coeffs_.size()) == basis_->size(), ErrorKind::DimensionMismatch,
          "coefficient vector length does not match basis size");
  require(coeffs_.allFinite(), ErrorKind::InvalidArgument, "polynomial coefficients must be finite");
}

Polynomial Polynomial::zero(BasisPtr basis) {
  const auto ell = static_cast<Eigen::Index>(basis->size());
  return {std::move(basis), Vector::Zero(ell)};
}

double Polynomial::eval(VectorRef x) const { return coeffs_.dot(basis_->eval(x)); }

Vector Polynomial::eval_rows(const PointMatrix& points) const {
  require(points.cols() == basis_->n(), ErrorKind::DimensionMismatch, "point matrix width does not match basis");
  Vector out(points.rows());
  Vector buffer(static_cast<Eigen::Index>(basis_->size()));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    basis_->eval_into(points.row(r).transpose(), buffer);
    out(r) = coeffs_.dot(buffer);
  }
  return out;
}

double l2_norm(const Polynomial& p, const Matrix& moments, double tol) {
  const auto ell = static_cast<Eigen::Index>(p.basis().size());
  require(moments.rows() == ell && moments.cols() == ell, ErrorKind::DimensionMismatch,
          "moment matrix size does not match basis");
  const double q = p.coeffs().dot(moments * p.coeffs());
  require(q >= -tol * std::max(1.0, p.coeffs().squaredNorm()), ErrorKind::NegativeQuadraticForm,
          "quadratic form is " + std::to_string(q));
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace rchow
