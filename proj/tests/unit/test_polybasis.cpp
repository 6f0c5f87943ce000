#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rchow/distributions.hpp"
#include "rchow/error.hpp"
#include "rchow/polybasis.hpp"

using namespace rchow;

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("enumerate_basis orders monomials graded lex") {
  auto b = enumerate_basis(2, 1);
  REQUIRE(b->size() == 3);
  CHECK(b->index(0) == MultiIndex{0, 0});
  CHECK(b->index(1) == MultiIndex{1, 0});
  CHECK(b->index(2) == MultiIndex{0, 1});

  CHECK(enumerate_basis(3, 2)->size() == 10);

  auto c = enumerate_basis(1, 3);
  REQUIRE(c->size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(c->index(static_cast<std::size_t>(i)) == MultiIndex{i});
}

TEST_CASE("basis size is binomial(n + d, d)") {
  for (int n = 1; n <= 6; ++n) {
    for (int d = 1; d <= 4; ++d) {
      CHECK(static_cast<double>(enumerate_basis(n, d)->size()) == binomial(n + d, d));
      CHECK(static_cast<double>(basis_size(n, d)) == binomial(n + d, d));
    }
  }
}

TEST_CASE("basis cap is enforced") {
  CHECK_THROWS_AS(enumerate_basis(30, 6, BasisKind::Full, 1000), Error);
}

TEST_CASE("eval_monomials examples") {
  auto b = enumerate_basis(2, 2);
  Vector x(2);
  x << 2, 3;
  Vector expect(6);
  expect << 1, 2, 3, 4, 6, 9;
  CHECK((b->eval(x) - expect).norm() == 0.0);

  Vector zero = Vector::Zero(4);
  Vector m0 = enumerate_basis(4, 3)->eval(zero);
  CHECK(m0(0) == 1.0);
  CHECK(m0.tail(m0.size() - 1).cwiseAbs().maxCoeff() == 0.0);

  Vector y(1);
  y << -1;
  Vector m1 = enumerate_basis(1, 2)->eval(y);
  CHECK(m1(0) == 1.0);
  CHECK(m1(1) == -1.0);
  CHECK(m1(2) == 1.0);
}

TEST_CASE("monomials supported on coordinates equal to one evaluate to one") {
  auto b = enumerate_basis(4, 3);
  Vector x(4);
  x << 1.0, 7.0, 1.0, -2.5;
  const Vector m = b->eval(x);
  for (std::size_t i = 0; i < b->size(); ++i) {
    const auto& a = b->index(i);
    if (a[1] == 0 && a[3] == 0) CHECK(m(static_cast<Eigen::Index>(i)) == 1.0);
  }
}

TEST_CASE("eval_poly examples") {
  auto b = enumerate_basis(2, 2);
  Vector c = Vector::Zero(6);
  c(1) = 1.0;
  Vector x(2);
  x << 5, -1;
  CHECK(Polynomial(b, c).eval(x) == 5.0);
  CHECK(Polynomial::zero(b).eval(x) == 0.0);

  Vector c2 = Vector::Zero(6);
  c2(0) = 1.0;
  c2(b->find({1, 1})) = 1.0;
  Vector y(2);
  y << 2, 3;
  CHECK(Polynomial(b, c2).eval(y) == 7.0);
}

TEST_CASE("eval_rows agrees with eval") {
  auto b = enumerate_basis(3, 3);
  const Eigen::MatrixXd raw = oracle::gaussian_rows(3, 20, 5);
  PointMatrix pts = raw;
  const Matrix rows = b->eval_rows(pts);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    CHECK((rows.row(i).transpose() - b->eval(pts.row(i).transpose())).norm() == 0.0);
  }
}

TEST_CASE("l2_norm examples") {
  auto b = enumerate_basis(2, 2);
  const Matrix sigma = gaussian_moment_matrix(*b);
  Vector c = Vector::Zero(6);
  c(1) = 1.0;
  CHECK(l2_norm(Polynomial(b, c), sigma) == doctest::Approx(1.0).epsilon(1e-12));
  Vector sq = Vector::Zero(6);
  sq(b->find({2, 0})) = 1.0;
  CHECK(l2_norm(Polynomial(b, sq), sigma) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

  auto cube = enumerate_basis(2, 2, BasisKind::Multilinear);
  Vector xy = Vector::Zero(static_cast<Eigen::Index>(cube->size()));
  xy(cube->find({1, 1})) = 1.0;
  CHECK(l2_norm(Polynomial(cube, xy), hypercube_moment_matrix(*cube)) == doctest::Approx(1.0));
}

TEST_CASE("l2_norm is absolutely homogeneous") {
  auto b = enumerate_basis(3, 2);
  const Matrix sigma = gaussian_moment_matrix(*b);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Vector c(static_cast<Eigen::Index>(b->size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
  const Polynomial p(b, c);
  const double base = l2_norm(p, sigma);
  for (double alpha : {-3.5, -1.0, 0.0, 0.25, 7.0}) {
    CHECK(std::abs(l2_norm(p.scaled(alpha), sigma) - std::abs(alpha) * base) <= 1e-12 * (1.0 + std::abs(alpha) * base));
  }
}

TEST_CASE("l2_norm rejects an indefinite moment matrix") {
  auto b = enumerate_basis(1, 1);
  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  Vector c(2);
  c << 0, 1;
  CHECK_THROWS_AS(l2_norm(Polynomial(b, c), bad), Error);
}

TEST_CASE("l2_norm matches the Monte-Carlo root mean square") {
  auto b = enumerate_basis(3, 2);
  const Matrix sigma = gaussian_moment_matrix(*b);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    Vector c(static_cast<Eigen::Index>(b->size()));
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
    const Polynomial p(b, c);
    PointMatrix pts = oracle::gaussian_rows(3, 100000, 100 + static_cast<std::uint64_t>(trial));
    const Vector v = p.eval_rows(pts);
    std::vector<double> sq(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) sq[static_cast<std::size_t>(i)] = v(i) * v(i);
    const double ms = oracle::mean(sq);
    const double se = oracle::stderr_of(sq);
    const double norm = l2_norm(p, sigma);
    // Compare second moments; 5 SE on the mean of p^2.
    CHECK(std::abs(ms - norm * norm) <= 5.0 * se);
  }
}
