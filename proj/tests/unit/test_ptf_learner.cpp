#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rchow/adversary.hpp"
#include "rchow/error.hpp"
#include "rchow/ptf_learner.hpp"

using namespace rchow;

namespace {

PTF square_plant(const ReasonableDistribution& dist) {
  Vector c = Vector::Zero(static_cast<Eigen::Index>(dist.basis().size()));
  c(0) = -1.0;
  MultiIndex sq(static_cast<std::size_t>(dist.n()), 0);
  sq[0] = 2;
  c(dist.basis().find(sq)) = 1.0;
  return PTF(Polynomial(dist.basis_ptr(), c));
}

}  // namespace

TEST_CASE("round_to_grid") {
  Vector c(4);
  c << 0.26, -0.24, 0.0, 1.01;
  const Vector r = round_to_grid(c, 0.5);
  CHECK(r(0) == 0.5);
  CHECK(r(1) == 0.0);
  CHECK(r(2) == 0.0);
  CHECK(r(3) == 1.0);
  CHECK((round_to_grid(c, 0.01) - c).cwiseAbs().maxCoeff() <= 0.005 + 1e-15);
}

TEST_CASE("default xi") {
  CHECK(default_ptf_xi(45, 1000000, 0.0) == doctest::Approx(std::max(0.01, std::sqrt(45e-6) / 2)));
  CHECK(default_ptf_xi(45, 100000, 0.1) == doctest::Approx((std::sqrt(45e-5) + 0.1) / 2));
}

TEST_CASE("reconstruction meets its stopping rule on exact Chow parameters") {
  const auto dist = make_gaussian(3, 2, 0.0);
  const PTF plant = square_plant(dist);
  const PointMatrix pool = dist.sample(100000, 3);
  const ChowOracle oracle = pool_oracle(pool, dist, {});
  const ChowEstimate target = make_chow(dist, mean_label_moments(pool, evaluate_rows(plant, pool), dist.basis(), nullptr));
  const double xi = 0.05;
  const ReconstructResult r = chow_reconstruct(target, dist, xi, oracle);
  CHECK_FALSE(r.cap_reached);
  CHECK(r.residual <= 4.0 * xi);
  CHECK(r.residual_history.size() == r.iterations + 1);
  CHECK(chow_distance(target, oracle(r.pbf)) == doctest::Approx(r.residual).epsilon(1e-9));
  // Coefficients live on the xi/2 grid.
  const Vector g = r.pbf.grid_weights();
  CHECK((g - g.array().round().matrix()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("learn_ptf on a clean degree-2 target") {
  const auto dist = make_gaussian(4, 2, 0.0);
  const PTF plant = square_plant(dist);
  const auto inst = plant_instance(plant, dist, 100000, 8);
  const PTFResult r = learn_ptf(inst.clean, dist, 2, 0.0);
  const PointMatrix test = oracle::gaussian_rows(4, 100000, 9);
  CHECK(disagreement(Hypothesis(r.ptf), Hypothesis(plant), test) <= 0.1);
  CHECK(r.reconstruction.residual <= r.xi * 4.0);
}

TEST_CASE("learn_ptf under nasty noise beats the trivial bound") {
  const auto dist = make_gaussian(4, 2, 0.05);
  const PTF plant = square_plant(dist);
  const auto inst = plant_instance(plant, dist, 100000, 10);
  AdversaryStrategy s;
  s.tag = StrategyTag::ChowAttack;
  const auto bad = corrupt(inst.clean, plant, 0.05, s, dist, 11);
  const PTFResult r = learn_ptf(bad, dist, 2, 0.05);
  const PointMatrix test = oracle::gaussian_rows(4, 100000, 12);
  CHECK(disagreement(Hypothesis(r.ptf), Hypothesis(plant), test) <= 0.35);
}

TEST_CASE("learn_ptf on the hypercube") {
  const auto dist = make_hypercube(5, 1, 0.0);
  Vector c = Vector::Zero(6);
  c(0) = 0.5;
  c.tail(5).setOnes();
  const PTF plant(Polynomial(dist.basis_ptr(), c));
  const auto inst = plant_instance(plant, dist, 50000, 13);
  const PTFResult r = learn_ptf(inst.clean, dist, 1, 0.0);
  const PointMatrix test = dist.sample(20000, 14);
  CHECK(disagreement(Hypothesis(r.ptf), Hypothesis(plant), test) <= 0.1);
}

TEST_CASE("learn_ptf argument checks") {
  const auto dist = make_gaussian(3, 1, 0.0);
  const auto inst = plant_instance(LTF(Vector::Unit(3, 0), 0.0), dist, 5000, 1);
  CHECK(learn_ptf(inst.clean, dist, 2, 0.0).pbf.q.basis().d() == 2);
  CHECK_THROWS_AS(learn_ptf(inst.clean, make_gaussian(4, 1, 0.0), 1, 0.0), Error);
  CHECK_THROWS_AS(learn_ptf(inst.clean, dist, 0, 0.0), Error);
  CHECK_THROWS_AS(learn_ptf(inst.clean, make_hypercube(3, 2, 0.0), 2, 0.0), Error);
}
