#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rchow/adversary.hpp"
#include "rchow/chowfilter.hpp"
#include "rchow/error.hpp"

using namespace rchow;

namespace {

Vector unit(int n, int j) {
  Vector v = Vector::Zero(n);
  v(j) = 1.0;
  return v;
}

/// Exact degree-1 Chow vector of sign(v.x + theta) under N(0, I).
Vector ltf_chow(const Vector& v, double theta) {
  Vector c(v.size() + 1);
  c(0) = 2.0 * oracle::phi(theta) - 1.0;
  c.tail(v.size()) = 2.0 * oracle::pdf(theta) * v;
  return c;
}

}  // namespace

TEST_CASE("pruning removes few clean points and caps normalized polynomials") {
  const auto dist = make_gaussian(10, 1, 0.1);
  const PointMatrix pts = dist.sample(20000, 5);
  const auto kept = prune_indices(pts, dist);
  CHECK(static_cast<double>(kept.size()) >= 0.999 * 20000.0);

  // |p(x)| <= T_max for random normalized linear p on survivors.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  const auto l = static_cast<Eigen::Index>(dist.basis().size());
  for (int t = 0; t < 20; ++t) {
    Vector w(l);
    for (Eigen::Index i = 0; i < l; ++i) w(i) = g(rng);
    w.normalize();
    for (std::size_t i : kept) {
      const Vector z = dist.geometry().whiten(dist.basis().eval(pts.row(static_cast<Eigen::Index>(i)).transpose()));
      CHECK(std::abs(w.dot(z)) <= dist.t_max());
    }
  }

  PointMatrix far = PointMatrix::Zero(1, 10);
  far(0, 0) = 1e3;
  CHECK(prune_indices(far, dist).empty());
  LabeledSampleSet lone(far, Vector::Ones(1));
  try {
    prune(lone, dist);
    FAIL("expected AllPointsPruned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AllPointsPruned);
  }
}

TEST_CASE("clean samples converge at once") {
  const auto dist = make_gaussian(10, 1, 0.1);
  const auto inst = plant_instance(LTF(unit(10, 0), 0.0), dist, 50000, 3);
  LabeledSampleSet s = prune(inst.clean, dist);
  const auto it = filter_iteration(s, dist, {});
  CHECK(it.outcome == FilterOutcome::Converged);
  CHECK(it.lambda_star <= 0.05);
  CHECK(it.direction.norm() == doctest::Approx(1.0));
}

TEST_CASE("robust_chow on sign(x1) matches the closed form") {
  const int n = 10;
  const auto dist = make_gaussian(n, 1, 0.0);
  const auto inst = plant_instance(LTF(unit(n, 0), 0.0), dist, 100000, 4);
  const ChowEstimate est = robust_chow(inst.clean, dist);
  const Vector expect = ltf_chow(unit(n, 0), 0.0);
  CHECK((est.chi - expect).cwiseAbs().maxCoeff() <= 0.02);
  CHECK(expect(1) == doctest::Approx(std::sqrt(2.0 / std::acos(-1.0))));
  CHECK(est.provenance.converged);
  CHECK(est.provenance.removed_by_filter == 0);
}

TEST_CASE("robust_chow on a constant function") {
  const auto dist = make_gaussian(4, 1, 0.0);
  const PointMatrix pts = dist.sample(20000, 6);
  const LabeledSampleSet s(pts, Vector::Ones(20000));
  const ChowEstimate est = robust_chow(s, dist);
  CHECK(est.chi(0) == doctest::Approx(1.0));
  CHECK(est.chi.tail(4).cwiseAbs().maxCoeff() <= 0.03);
}

TEST_CASE("an injected cluster is filtered out") {
  const int n = 10;
  const auto dist = make_gaussian(n, 1, 0.1);
  const Hypothesis plant = LTF(unit(n, 0), 0.0);
  const auto inst = plant_instance(plant, dist, 20000, 8);
  AdversaryStrategy s;
  s.tag = StrategyTag::ChowAttack;
  const auto bad = corrupt(inst.clean, plant, 0.1, s, dist, 9);
  const ChowEstimate truth = make_chow(dist, ltf_chow(unit(n, 0), 0.0));
  const double raw = chow_distance(empirical_chow(bad, dist), truth);
  const ChowEstimate est = robust_chow(bad, dist);
  const double filtered = chow_distance(est, truth);
  CHECK(raw >= 0.4);
  CHECK(filtered <= 0.1);

  const FilterRun run = filter_points(bad.points, dist, {});
  std::size_t hits = 0;
  for (std::size_t i : run.removed) hits += bad.is_corrupted(i);
  REQUIRE_FALSE(run.removed.empty());
  CHECK(3 * hits >= 2 * run.removed.size());
}

TEST_CASE("a filtered run leaves a bounded top eigenvalue") {
  const auto dist = make_gaussian(6, 1, 0.1);
  const Hypothesis plant = LTF(unit(6, 1), 0.3);
  const auto inst = plant_instance(plant, dist, 20000, 13);
  AdversaryStrategy s;
  s.tag = StrategyTag::ChowAttack;
  const auto bad = corrupt(inst.clean, plant, 0.1, s, dist, 10);
  const FilterRun run = filter_points(bad.points, dist, {});
  CHECK(run.provenance.converged);
  CHECK(run.provenance.final_lambda <= run.provenance.break_threshold);
  CHECK(run.provenance.survivors == run.survivors.size());
  CHECK(run.survivors.size() + run.removed.size() + run.pruned.size() == bad.size());
}

TEST_CASE("chow_distance examples and metric properties") {
  const auto dist = make_gaussian(3, 1, 0.0);
  Vector a(4);
  a << 0.0, 1.0, 0.0, 0.0;
  Vector b = Vector::Zero(4);
  CHECK(chow_distance(make_chow(dist, a), make_chow(dist, b)) == doctest::Approx(1.0));
  CHECK(chow_distance(make_chow(dist, a), make_chow(dist, a)) == 0.0);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    Vector x(4), y(4), z(4);
    for (int i = 0; i < 4; ++i) {
      x(i) = g(rng);
      y(i) = g(rng);
      z(i) = g(rng);
    }
    const auto cx = make_chow(dist, x);
    const auto cy = make_chow(dist, y);
    const auto cz = make_chow(dist, z);
    CHECK(chow_distance(cx, cz) <= chow_distance(cx, cy) + chow_distance(cy, cz) + 1e-12);
    CHECK(chow_distance(cx, cy) == doctest::Approx(chow_distance(cy, cx)));
  }

  const auto other = make_gaussian(4, 1, 0.0);
  try {
    chow_distance(make_chow(dist, a), make_chow(other, Vector::Zero(5)));
    FAIL("expected BasisMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BasisMismatch);
  }
}

TEST_CASE("chow_distance is the sup over normalized polynomials") {
  // For degree 2 the whitened norm bounds |L_a(p) - L_b(p)| for every p with ||p||_2 = 1.
  const auto dist = make_gaussian(2, 2, 0.0);
  const Matrix sigma = gaussian_moment_matrix(dist.basis());
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Vector a(6), b(6);
  for (int i = 0; i < 6; ++i) {
    a(i) = g(rng);
    b(i) = g(rng);
  }
  const auto ca = make_chow(dist, a);
  const auto cb = make_chow(dist, b);
  const double dist_ab = chow_distance(ca, cb);
  double best = 0.0;
  for (int t = 0; t < 2000; ++t) {
    Vector c(6);
    for (int i = 0; i < 6; ++i) c(i) = g(rng);
    const Polynomial p(dist.basis_ptr(), c / l2_norm(Polynomial(dist.basis_ptr(), c), sigma));
    const double gap = std::abs(ca.apply(p) - cb.apply(p));
    CHECK(gap <= dist_ab + 1e-9);
    best = std::max(best, gap);
  }
  CHECK(best >= 0.5 * dist_ab);
}

TEST_CASE("declared but absent corruption keeps nearly every point") {
  const int n = 10;
  const auto dist = make_gaussian(n, 1, 0.0);
  const auto inst = plant_instance(LTF(unit(n, 0), 0.0), dist, 50000, 15);
  const ChowEstimate truth = make_chow(dist, ltf_chow(unit(n, 0), 0.0));
  const double base = chow_distance(robust_chow(inst.clean, dist), truth);
  for (double eps : {0.05, 0.1}) {
    const ChowEstimate est = robust_chow(inst.clean, dist.at_eps(eps));
    const double removed = static_cast<double>(est.provenance.pruned + est.provenance.removed_by_filter);
    CHECK(removed <= 0.02 * 50000.0);
    CHECK(est.provenance.converged);
    CHECK(chow_distance(est, truth) <= 2.0 * base + 1e-12);
  }
}

TEST_CASE("default_eigen_tol scales like sqrt(ell / N)") {
  CHECK(default_eigen_tol(11, 100000, 1) == doctest::Approx(4.0 * std::sqrt(11.0 / 100000.0)));
  CHECK(default_eigen_tol(11, 400000, 1) == doctest::Approx(0.5 * default_eigen_tol(11, 100000, 1)));
}
