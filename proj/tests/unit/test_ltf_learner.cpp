#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rchow/adversary.hpp"
#include "rchow/error.hpp"
#include "rchow/ltf_learner.hpp"

using namespace rchow;

namespace {

Vector unit(int n, int j) {
  Vector v = Vector::Zero(n);
  v(j) = 1.0;
  return v;
}

double ltf_disagreement(const Hypothesis& h, const LTF& plant, std::uint64_t seed) {
  const PointMatrix pts = oracle::gaussian_rows(plant.v.size(), 200000, seed);
  return disagreement(h, Hypothesis(plant), pts);
}

}  // namespace

TEST_CASE("threshold from the label mean") {
  CHECK(threshold_from_mean(0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(threshold_from_mean(2.0 * oracle::phi(1.0) - 1.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(threshold_from_mean(2.0 * oracle::phi(-0.7) - 1.0) == doctest::Approx(-0.7).epsilon(1e-9));
  CHECK(std::isfinite(threshold_from_mean(1.0)));
  CHECK(std::isfinite(threshold_from_mean(-5.0)));
  for (double t : {-2.0, -0.3, 0.0, 1.5}) {
    CHECK(ltf_mean(t) == doctest::Approx(2.0 * oracle::phi(t) - 1.0).epsilon(1e-12));
    const Vector c = ltf_chow(unit(3, 2), t);
    CHECK(c(2) == doctest::Approx(2.0 * oracle::pdf(t)).epsilon(1e-12));
    CHECK(c(0) == 0.0);
  }
}

TEST_CASE("rejection acceptance formula") {
  const RejectionParams rp(unit(2, 0), 0.4, 0.5);
  Vector x = Vector::Zero(2);
  x(0) = -0.4 / 0.75;
  CHECK(rp.acceptance(x) == doctest::Approx(1.0));
  x(0) = 0.0;
  const double expect = std::exp(-(4.0 - 1.0) * std::pow(0.4 / 0.75, 2) / 2.0);
  CHECK(rp.acceptance(x) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(rp.gaussian_rate() == doctest::Approx(0.5 * std::exp(-0.16 / 1.5)).epsilon(1e-12));
  CHECK_THROWS_AS(RejectionParams(unit(2, 0), 0.0, 1.5), Error);
}

TEST_CASE("rejection sampler statistics for random parameters") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> theta_dist(-1.5, 1.5);
  std::uniform_real_distribution<double> sigma_dist(0.2, 0.9);
  std::normal_distribution<double> g;
  const std::size_t count = 100000;
  const int n = 4;
  for (int trial = 0; trial < 8; ++trial) {
    Vector v(n);
    for (int j = 0; j < n; ++j) v(j) = g(rng);
    v.normalize();
    const double theta = theta_dist(rng);
    const double sigma = sigma_dist(rng);
    const RejectionParams rp(v, theta, sigma);
    const PointMatrix pts = oracle::gaussian_rows(n, count, 500 + static_cast<std::uint64_t>(trial));
    const auto acc = rejection_sample(pts, rp, 900 + static_cast<std::uint64_t>(trial));
    const double rate = sigma * std::exp(-theta * theta / (2.0 * (1.0 - sigma * sigma)));
    const double emp = static_cast<double>(acc.size()) / static_cast<double>(count);
    CHECK(std::abs(emp - rate) <= 3.0 * std::sqrt(rate * (1.0 - rate) / static_cast<double>(count)));

    std::vector<double> proj;
    for (std::size_t i : acc) proj.push_back(v.dot(pts.row(static_cast<Eigen::Index>(i)).transpose()));
    const double mean = oracle::mean(proj);
    double var = 0.0;
    for (double p : proj) var += (p - mean) * (p - mean);
    var /= static_cast<double>(proj.size() - 1);
    const double k = static_cast<double>(proj.size());
    CHECK(std::abs(mean + theta) <= 4.0 * sigma / std::sqrt(k));
    CHECK(std::abs(var - sigma * sigma) <= 4.0 * sigma * sigma * std::sqrt(2.0 / k));
  }
}

TEST_CASE("to_standard maps the conditioned Gaussian back to N(0, I)") {
  const int n = 3;
  const RejectionParams rp(unit(n, 1), 0.8, 0.4);
  const PointMatrix pts = oracle::gaussian_rows(n, 200000, 3);
  const auto acc = rejection_sample(pts, rp, 4);
  std::vector<double> along;
  for (std::size_t i : acc) along.push_back(rp.to_standard(pts.row(static_cast<Eigen::Index>(i)).transpose())(1));
  CHECK(std::abs(oracle::mean(along)) <= 4.0 * oracle::stderr_of(along));
  double sq = 0.0;
  for (double a : along) sq += a * a;
  CHECK(sq / static_cast<double>(along.size()) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("recover_ab inverts the perpendicular fraction") {
  for (double sigma : {0.2, 0.5, 0.9}) {
    for (double b : {0.0, 0.05, 0.2, 0.5}) {
      const double a = std::sqrt(1.0 - b * b);
      const double c = b / std::sqrt(a * a * sigma * sigma + b * b);
      const AB ab = recover_ab(c, sigma);
      CHECK(ab.a * ab.a + ab.b * ab.b == doctest::Approx(1.0));
      CHECK(ab.b == doctest::Approx(b).epsilon(1e-9));
    }
  }
  CHECK(recover_ab(0.0, 0.5).a == 1.0);
  CHECK(recover_ab(-1.0, 0.5).b == 0.0);
  CHECK(recover_ab(5.0, 0.5).b < 1.0);
}

TEST_CASE("weak learner recovers the direction from clean samples") {
  const int n = 10;
  const auto dist = make_gaussian(n, 1, 0.0);
  const LTF plant(unit(n, 3), 0.5);
  const auto inst = plant_instance(plant, dist, 100000, 5);
  const WeakLTF w = weak_learn_ltf(inst.clean, 0.0);
  CHECK(w.ltf.v.dot(plant.v) >= 0.999);
  CHECK(std::abs(w.ltf.theta - 0.5) <= 0.02);
  CHECK((w.u - ltf_chow(plant.v, 0.5).tail(n)).cwiseAbs().maxCoeff() <= 0.02);

  const LabeledSampleSet flat(dist.sample(5000, 6), Vector::Ones(5000));
  try {
    weak_learn_ltf(flat, 0.0);
    FAIL("expected ZeroChowVector");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroChowVector);
  }
}

TEST_CASE("a nearly constant target takes the constant branch") {
  const int n = 5;
  const auto dist = make_gaussian(n, 1, 0.1);
  const LTF plant(unit(n, 0), 3.0);
  AdversaryStrategy s;
  s.tag = StrategyTag::RandomFlip;
  const auto src = corrupted_source(plant, dist, 0.1, s, 11);
  const LTFResult r = learn_ltf(src, 20000, 0.1, 12);
  CHECK(r.branch == "constant");
  CHECK(ltf_disagreement(r.hypothesis, plant, 13) <= 0.01);
}

TEST_CASE("moderate branch learns a shifted LTF under noise") {
  const int n = 10;
  const auto dist = make_gaussian(n, 1, 0.05);
  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  const LTF plant(v, 1.0);
  AdversaryStrategy s;
  s.tag = StrategyTag::BoundaryFlip;
  const auto src = corrupted_source(plant, dist, 0.05, s, 21);
  const LTFResult r = learn_ltf(src, 50000, 0.05, 22);
  CHECK(r.branch == "moderate");
  CHECK(ltf_disagreement(r.hypothesis, plant, 23) <= 0.1);
  CHECK(r.selection.index < r.candidates.size());
  CHECK_FALSE(r.delta_schedule.empty());
}

TEST_CASE("learn_ltf is deterministic") {
  const int n = 4;
  const auto dist = make_gaussian(n, 1, 0.05);
  const LTF plant(unit(n, 1), 0.2);
  AdversaryStrategy s;
  s.tag = StrategyTag::RandomFlip;
  const LTFResult a = learn_ltf(corrupted_source(plant, dist, 0.05, s, 3), 10000, 0.05, 4);
  const LTFResult b = learn_ltf(corrupted_source(plant, dist, 0.05, s, 3), 10000, 0.05, 4);
  const auto& la = std::get<LTF>(a.hypothesis);
  const auto& lb = std::get<LTF>(b.hypothesis);
  CHECK(la.v == lb.v);
  CHECK(la.theta == lb.theta);
}
