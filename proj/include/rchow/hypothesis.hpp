#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rchow/polybasis.hpp"
#include "rchow/types.hpp"

namespace rchow {

/// P_1: identity on [-1, 1], sign outside.
double project_p1(double t);

/// sign(v . x + theta) with sign(0) = +1.
struct LTF {
  Vector v;
  double theta = 0.0;

  /// Throws InvalidHypothesis unless |1 - ||v||| <= 1e-10.
  LTF(Vector v, double theta);
  /// Normalizes v first; throws InvalidHypothesis when v is zero or not finite.
  static LTF normalized(const Vector& v, double theta);

  int n() const { return static_cast<int>(v.size()); }
  double margin(VectorRef x) const { return v.dot(x) + theta; }
  double eval(VectorRef x) const { return margin(x) >= 0.0 ? 1.0 : -1.0; }
  LTF negated() const { return {-v, -theta}; }
};

/// sign(q(x)) with sign(0) = +1.
struct PTF {
  Polynomial q;

  explicit PTF(Polynomial q);
  int n() const { return q.basis().n(); }
  double margin(VectorRef x) const { return q.eval(x); }
  double eval(VectorRef x) const { return margin(x) >= 0.0 ? 1.0 : -1.0; }
};

/// P_1(q(x)); coefficients of q are multiples of xi / 2.
struct PBF {
  Polynomial q;
  double xi = 0.0;

  PBF(Polynomial q, double xi);
  int n() const { return q.basis().n(); }
  double eval(VectorRef x) const { return project_p1(q.eval(x)); }
  /// Integer grid weights q_i / (xi / 2).
  Eigen::VectorXd grid_weights() const;
  PTF to_ptf() const { return PTF(q); }
};

/// The constant +1 or -1 on R^n.
struct ConstantHypothesis {
  int n = 1;
  double value = 1.0;

  ConstantHypothesis(int n, double value);
  double eval(VectorRef) const { return value; }
};

/// +1 iff every member LTF outputs +1. With a basis B (n x dim, orthonormal
/// columns) the members live on R^dim and see B^T x; otherwise they are
/// ambient. Zero members give the constant +1.
struct Intersection {
  std::vector<LTF> halfspaces;
  std::optional<Matrix> basis;
  int ambient_n = 0;

  Intersection(std::vector<LTF> halfspaces, int ambient_n);
  Intersection(std::vector<LTF> halfspaces, Matrix basis);

  int n() const { return ambient_n; }
  std::size_t k() const { return halfspaces.size(); }
  int reduced_dim() const { return basis ? static_cast<int>(basis->cols()) : ambient_n; }
  /// Coordinates the members see: B^T x, or x.
  Vector reduce(VectorRef x) const;
  double eval_reduced(VectorRef z) const;
  double eval(VectorRef x) const { return eval_reduced(reduce(x)); }
  /// Smallest member margin (+inf with no members).
  double margin(VectorRef x) const;
  /// Members with defining vectors B w_j in R^n.
  std::vector<LTF> ambient_halfspaces() const;
};

using Hypothesis = std::variant<LTF, PTF, PBF, ConstantHypothesis, Intersection>;

std::string kind_name(const Hypothesis& h);
int input_dim(const Hypothesis& h);

/// Value in [-1, 1] (+-1 for every kind except PBF).
double evaluate(const Hypothesis& h, VectorRef x);
Vector evaluate_rows(const Hypothesis& h, const PointMatrix& points);

/// Signed distance proxy to the decision boundary; used by adversaries that
/// target near-boundary or far-from-boundary points.
double margin(const Hypothesis& h, VectorRef x);
Vector margin_rows(const Hypothesis& h, const PointMatrix& points);

/// Fraction of rows where sign(h) differs from sign(g), sign(0) = +1.
double disagreement(const Hypothesis& h, const Hypothesis& g, const PointMatrix& points);
/// Mean of |h - g| / 2 over the rows; equals disagreement for +-1 hypotheses.
double l1_half_distance(const Hypothesis& h, const Hypothesis& g, const PointMatrix& points);
/// Fraction of rows where sign(h(x)) differs from the label's sign.
double empirical_error(const Hypothesis& h, const PointMatrix& points, const Vector& labels);

}  // namespace rchow
