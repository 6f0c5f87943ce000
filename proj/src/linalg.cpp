#include "rchow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "rchow/error.hpp"
#include "rchow/numeric.hpp"

namespace rchow {

EigenPair top_eigenpair_dense(const Matrix& sym) {
  require(sym.rows() == sym.cols() && sym.rows() > 0, ErrorKind::DimensionMismatch,
          "eigenproblem needs a non-empty square matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Eigen::Index last = sym.rows() - 1;
  EigenPair out;
  out.value = solver.eigenvalues()(last);
  out.vector = solver.eigenvectors().col(last);
  return out;
}

EigenPair top_eigenpair_power(const Matrix& sym, double rel_tol, std::size_t max_steps) {
  require(sym.rows() == sym.cols() && sym.rows() > 0, ErrorKind::DimensionMismatch,
          "eigenproblem needs a non-empty square matrix");
  const Eigen::Index n = sym.rows();
  // Gershgorin shift makes the matrix PSD so the dominant eigenvalue is the
  // largest algebraic one.
  double shift = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double radius = sym.row(i).cwiseAbs().sum() - std::abs(sym(i, i));
    shift = std::max(shift, radius - sym(i, i));
  }
  Vector x(n);
  std::uint64_t state = 0x2545F4914F6CDD1DULL;
  for (Eigen::Index i = 0; i < n; ++i) {
    state = mix_seed(state);
    x(i) = 1.0 + static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  x.normalize();
  double previous = 0.0;
  for (std::size_t step = 0; step < max_steps; ++step) {
    Vector y = sym * x + shift * x;
    const double norm = y.norm();
    if (norm == 0.0) break;
    y /= norm;
    const double rayleigh = y.dot(sym * y);
    x = std::move(y);
    if (step > 0 && std::abs(rayleigh - previous) <= rel_tol * std::max(1e-300, std::abs(rayleigh))) {
      previous = rayleigh;
      break;
    }
    previous = rayleigh;
  }
  return {x.dot(sym * x), x};
}

EigenPair top_eigenpair(const Matrix& sym, std::size_t dense_limit) {
  if (static_cast<std::size_t>(sym.rows()) <= dense_limit) return top_eigenpair_dense(sym);
  return top_eigenpair_power(sym);
}

MomentGeometry::MomentGeometry(Matrix sigma, double null_rel_tol) : sigma_(std::move(sigma)) {
  require(sigma_.rows() == sigma_.cols() && sigma_.rows() > 0, ErrorKind::DimensionMismatch,
          "moment matrix must be square and non-empty");
  require(sigma_.allFinite(), ErrorKind::NotPSD, "moment matrix has non-finite entries");
  const double asym = (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-9 * std::max(1.0, sigma_.cwiseAbs().maxCoeff()), ErrorKind::NotPSD,
          "moment matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sigma_);
  eigenvalues_ = solver.eigenvalues();
  const double top = eigenvalues_.maxCoeff();
  require(eigenvalues_.minCoeff() >= -1e-10 * std::max(1.0, top), ErrorKind::NotPSD,
          "moment matrix has eigenvalue " + std::to_string(eigenvalues_.minCoeff()));
  const double cutoff = null_rel_tol * std::max(top, 0.0);
  std::vector<Eigen::Index> keep;
  std::vector<Eigen::Index> drop;
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    (eigenvalues_(i) > cutoff ? keep : drop).push_back(i);
  }
  const Eigen::Index n = sigma_.rows();
  range_.resize(n, static_cast<Eigen::Index>(keep.size()));
  range_values_.resize(static_cast<Eigen::Index>(keep.size()));
  whitener_.resize(static_cast<Eigen::Index>(keep.size()), n);
  // Largest eigenvalue first so whitened coordinate 0 is the dominant direction.
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const Eigen::Index src = keep[keep.size() - 1 - j];
    const auto col = static_cast<Eigen::Index>(j);
    range_.col(col) = solver.eigenvectors().col(src);
    range_values_(col) = eigenvalues_(src);
    whitener_.row(col) = solver.eigenvectors().col(src).transpose() / std::sqrt(eigenvalues_(src));
  }
  null_.resize(n, static_cast<Eigen::Index>(drop.size()));
  for (std::size_t j = 0; j < drop.size(); ++j) {
    null_.col(static_cast<Eigen::Index>(j)) = solver.eigenvectors().col(drop[j]);
  }
}

Matrix MomentGeometry::inverse_sqrt() const {
  return range_ * range_values_.cwiseInverse().cwiseSqrt().asDiagonal() * range_.transpose();
}

Matrix MomentGeometry::pseudo_inverse() const {
  return range_ * range_values_.cwiseInverse().asDiagonal() * range_.transpose();
}

Matrix orthonormalize_columns(const Matrix& m, double tol) {
  std::vector<Vector> kept;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Vector v = m.col(j);
    const double original = v.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : kept) v -= q.dot(v) * q;
    }
    const double norm = v.norm();
    if (norm <= tol * std::max(1.0, original)) continue;
    kept.push_back(v / norm);
  }
  Matrix out(m.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = kept[j];
  return out;
}

double largest_principal_angle(const Matrix& a, const Matrix& b) {
  const Matrix qa = orthonormalize_columns(a);
  const Matrix qb = orthonormalize_columns(b);
  if (qa.cols() == 0 && qb.cols() == 0) return 0.0;
  if (qa.cols() == 0 || qb.cols() == 0) return kPi / 2.0;
  const Matrix& small = qa.cols() <= qb.cols() ? qa : qb;
  const Matrix& large = qa.cols() <= qb.cols() ? qb : qa;
  Eigen::JacobiSVD<Matrix> svd(small.transpose() * large);
  const double smallest = svd.singularValues().minCoeff();
  return std::acos(std::clamp(smallest, -1.0, 1.0));
}

}  // namespace rchow
