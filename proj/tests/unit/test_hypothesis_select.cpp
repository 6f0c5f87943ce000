#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rchow/error.hpp"
#include "rchow/hypothesis_select.hpp"

using namespace rchow;

TEST_CASE("selection picks the lower empirical error") {
  // h1 agrees on 70% of the holdout, h2 on 100%.
  PointMatrix pts(10, 1);
  for (int i = 0; i < 10; ++i) pts(i, 0) = i + 1.0;
  Vector y = Vector::Ones(10);
  const ConstantHypothesis h2(1, 1.0);
  const LTF h1(Vector::Ones(1), -7.5);
  y(0) = 1.0;
  const LabeledSampleSet holdout(pts, y);
  const Selection s = select_hypothesis(std::vector<Hypothesis>{h1, h2}, holdout);
  CHECK(s.index == 1);
  CHECK(s.error == 0.0);
  CHECK(s.errors[0] == doctest::Approx(0.7));
}

TEST_CASE("ties go to the first candidate") {
  PointMatrix pts = PointMatrix::Zero(4, 2);
  Vector y(4);
  y << 1, 1, -1, -1;
  const LabeledSampleSet holdout(pts, y);
  const Selection s =
      select_hypothesis(std::vector<Hypothesis>{ConstantHypothesis(2, -1.0), ConstantHypothesis(2, 1.0)}, holdout);
  CHECK(s.index == 0);
  CHECK(s.errors[0] == s.errors[1]);
}

TEST_CASE("selection equals the brute-force minimum on random LTFs") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g;
  const PointMatrix pts = oracle::gaussian_rows(3, 2000, 20);
  Vector y(2000);
  for (Eigen::Index i = 0; i < 2000; ++i) y(i) = g(rng) + pts(i, 0) > 0 ? 1.0 : -1.0;
  const LabeledSampleSet holdout(pts, y);
  std::vector<Candidate> cands;
  for (int i = 0; i < 50; ++i) {
    Vector v(3);
    for (int j = 0; j < 3; ++j) v(j) = g(rng);
    cands.push_back({LTF::normalized(v, g(rng)), "c" + std::to_string(i)});
  }
  const Selection s = select_hypothesis(cands, holdout);
  double best = 2.0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    double wrong = 0.0;
    for (Eigen::Index r = 0; r < 2000; ++r) {
      const Vector x = pts.row(r).transpose();
      wrong += evaluate(cands[i].hypothesis, x) != y(r);
    }
    const double err = wrong / 2000.0;
    if (err < best) {
      best = err;
      arg = i;
    }
  }
  CHECK(s.index == arg);
  CHECK(s.error == doctest::Approx(best));
}

TEST_CASE("selection errors") {
  const LabeledSampleSet empty(PointMatrix(0, 2), Vector(0));
  try {
    select_hypothesis(std::vector<Hypothesis>{ConstantHypothesis(2, 1.0)}, empty);
    FAIL("expected EmptyHoldout");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyHoldout);
  }
  const LabeledSampleSet one(PointMatrix::Zero(1, 2), Vector::Ones(1));
  CHECK_THROWS_AS(select_hypothesis(std::vector<Hypothesis>{}, one), Error);
}
