#include "rchow/hypothesis.hpp"

#include <cmath>
#include <limits>

#include "rchow/error.hpp"
#include "rchow/numeric.hpp"

namespace rchow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sign_of(double t) { return t >= 0.0 ? 1.0 : -1.0; }

constexpr std::size_t kBlock = 4096;

template <class Fn>
Vector map_rows(const PointMatrix& points, Fn&& fn) {
  Vector out(points.rows());
  const auto rows = static_cast<std::size_t>(points.rows());
  const std::size_t blocks = (rows + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(rows, (b + 1) * kBlock);
    for (std::size_t r = b * kBlock; r < end; ++r) {
      const auto i = static_cast<Eigen::Index>(r);
      out(i) = fn(points.row(i).transpose());
    }
  });
  return out;
}

}  // namespace

double project_p1(double t) {
  if (t > 1.0) return 1.0;
  if (t < -1.0) return -1.0;
  return t;
}

LTF::LTF(Vector vec, double th) : v(std::move(vec)), theta(th) {
  require(v.size() >= 1 && v.allFinite() && std::isfinite(theta), ErrorKind::InvalidHypothesis,
          "LTF needs a finite vector and threshold");
  require(std::abs(v.norm() - 1.0) <= 1e-10, ErrorKind::InvalidHypothesis,
          "LTF defining vector must be a unit vector (norm " + std::to_string(v.norm()) + ")");
}

LTF LTF::normalized(const Vector& vec, double th) {
  const double norm = vec.norm();
  require(std::isfinite(norm) && norm > 0.0, ErrorKind::InvalidHypothesis, "cannot normalize a zero vector");
  Vector unit = vec / norm;
  unit /= unit.norm();
  return {std::move(unit), th};
}

PTF::PTF(Polynomial poly) : q(std::move(poly)) {
  require(q.coeffs().cwiseAbs().maxCoeff() > 0.0, ErrorKind::InvalidHypothesis, "PTF polynomial is identically zero");
}

PBF::PBF(Polynomial poly, double step) : q(std::move(poly)), xi(step) {
  require(xi > 0.0 && xi < 1.0, ErrorKind::InvalidArgument, "PBF grid step must lie in (0, 1)");
}

Eigen::VectorXd PBF::grid_weights() const { return q.coeffs() / (xi / 2.0); }

ConstantHypothesis::ConstantHypothesis(int dim, double v) : n(dim), value(v) {
  require(v == 1.0 || v == -1.0, ErrorKind::InvalidHypothesis, "constant hypothesis must be +1 or -1");
}

Intersection::Intersection(std::vector<LTF> hs, int n) : halfspaces(std::move(hs)), ambient_n(n) {
  for (const auto& h : halfspaces) {
    require(h.n() == n, ErrorKind::InvalidHypothesis, "intersection member has the wrong dimension");
  }
}

Intersection::Intersection(std::vector<LTF> hs, Matrix b)
    : halfspaces(std::move(hs)), basis(std::move(b)), ambient_n(static_cast<int>(basis->rows())) {
  const Matrix gram = basis->transpose() * *basis;
  require((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-8,
          ErrorKind::InvalidHypothesis, "subspace basis columns must be orthonormal");
  for (const auto& h : halfspaces) {
    require(h.n() == reduced_dim(), ErrorKind::InvalidHypothesis, "intersection member has the wrong dimension");
  }
}

Vector Intersection::reduce(VectorRef x) const {
  require(x.size() == ambient_n, ErrorKind::DimensionMismatch, "point dimension does not match intersection");
  if (basis) return basis->transpose() * x;
  return x;
}

double Intersection::eval_reduced(VectorRef z) const {
  for (const auto& h : halfspaces) {
    if (h.margin(z) < 0.0) return -1.0;
  }
  return 1.0;
}

double Intersection::margin(VectorRef x) const {
  const Vector z = reduce(x);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : halfspaces) best = std::min(best, h.margin(z));
  return best;
}

std::vector<LTF> Intersection::ambient_halfspaces() const {
  if (!basis) return halfspaces;
  std::vector<LTF> out;
  out.reserve(halfspaces.size());
  for (const auto& h : halfspaces) out.push_back(LTF::normalized(*basis * h.v, h.theta));
  return out;
}

std::string kind_name(const Hypothesis& h) {
  return std::visit(overloaded{[](const LTF&) { return std::string("ltf"); },
                               [](const PTF&) { return std::string("ptf"); },
                               [](const PBF&) { return std::string("pbf"); },
                               [](const ConstantHypothesis&) { return std::string("constant"); },
                               [](const Intersection&) { return std::string("intersection"); }},
                    h);
}

int input_dim(const Hypothesis& h) {
  return std::visit(overloaded{[](const ConstantHypothesis& c) { return c.n; }, [](const auto& x) { return x.n(); }},
                    h);
}

double evaluate(const Hypothesis& h, VectorRef x) {
  return std::visit([&](const auto& hyp) { return hyp.eval(x); }, h);
}

Vector evaluate_rows(const Hypothesis& h, const PointMatrix& points) {
  require(points.cols() == input_dim(h), ErrorKind::DimensionMismatch, "point dimension does not match hypothesis");
  return map_rows(points, [&](const auto& x) { return evaluate(h, x); });
}

double margin(const Hypothesis& h, VectorRef x) {
  return std::visit(
      overloaded{[&](const LTF& f) { return f.margin(x); }, [&](const PTF& f) { return f.margin(x); },
                 [&](const PBF& f) { return f.q.eval(x); },
                 [](const ConstantHypothesis&) { return std::numeric_limits<double>::infinity(); },
                 [&](const Intersection& f) { return f.margin(x); }},
      h);
}

Vector margin_rows(const Hypothesis& h, const PointMatrix& points) {
  require(points.cols() == input_dim(h), ErrorKind::DimensionMismatch, "point dimension does not match hypothesis");
  return map_rows(points, [&](const auto& x) { return margin(h, x); });
}

double disagreement(const Hypothesis& h, const Hypothesis& g, const PointMatrix& points) {
  if (points.rows() == 0) return 0.0;
  const Vector a = evaluate_rows(h, points);
  const Vector b = evaluate_rows(g, points);
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) count += sign_of(a(i)) != sign_of(b(i)) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(points.rows());
}

double l1_half_distance(const Hypothesis& h, const Hypothesis& g, const PointMatrix& points) {
  if (points.rows() == 0) return 0.0;
  const Vector a = evaluate_rows(h, points);
  const Vector b = evaluate_rows(g, points);
  return 0.5 * (a - b).cwiseAbs().mean();
}

double empirical_error(const Hypothesis& h, const PointMatrix& points, const Vector& labels) {
  require(points.rows() == labels.size(), ErrorKind::DimensionMismatch, "points and labels differ in length");
  if (labels.size() == 0) return 0.0;
  const Vector a = evaluate_rows(h, points);
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) count += sign_of(a(i)) != sign_of(labels(i)) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(labels.size());
}

}  // namespace rchow
