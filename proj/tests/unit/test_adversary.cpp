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

}  // namespace

TEST_CASE("strategy names round trip") {
  for (StrategyTag t : strategy_catalog()) CHECK(parse_strategy(to_string(t)) == t);
  try {
    parse_strategy("sneaky");
    FAIL("expected UnknownStrategy");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownStrategy);
  }
}

TEST_CASE("eps = 0 leaves every strategy's output identical") {
  const auto dist = make_gaussian(5, 1, 0.0);
  const Hypothesis plant = LTF(unit(5, 0), 0.3);
  const auto inst = plant_instance(plant, dist, 2000, 1);
  for (StrategyTag t : strategy_catalog()) {
    AdversaryStrategy s;
    s.tag = t;
    const auto out = corrupt(inst.clean, plant, 0.0, s, dist, 9);
    CHECK(out.points == inst.clean.points);
    CHECK(out.labels == inst.clean.labels);
    CHECK(out.corrupted_count() == 0);
  }
}

TEST_CASE("budget is exact and untouched rows are unchanged") {
  const auto dist = make_gaussian(4, 1, 0.1);
  const Hypothesis plant = LTF(unit(4, 1), -0.2);
  const auto small = plant_instance(plant, dist, 100, 2);
  AdversaryStrategy rf;
  rf.tag = StrategyTag::RandomFlip;
  CHECK(corrupt(small.clean, plant, 0.05, rf, dist, 3).corrupted_count() == 5);

  const auto inst = plant_instance(plant, dist, 3001, 4);
  for (StrategyTag t : strategy_catalog()) {
    if (t == StrategyTag::None) continue;
    for (double eps : {0.01, 0.07, 0.1, 0.3}) {
      AdversaryStrategy s;
      s.tag = t;
      const auto out = corrupt(inst.clean, plant, eps, s, dist, 5);
      CHECK(out.corrupted_count() == static_cast<std::size_t>(std::floor(eps * 3001)));
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.is_corrupted(i)) continue;
        CHECK(out.label(i) == inst.clean.label(i));
        CHECK(out.points.row(static_cast<Eigen::Index>(i)) == inst.clean.points.row(static_cast<Eigen::Index>(i)));
      }
    }
  }
  CHECK_THROWS_AS(corrupt(inst.clean, plant, 0.4, rf, dist, 5), Error);
}

TEST_CASE("chow_attack shifts the Chow vector along the attack direction by eps times the value") {
  const int n = 10;
  const auto dist = make_gaussian(n, 1, 0.1);
  const Hypothesis plant = LTF(unit(n, 0), 0.0);
  const auto inst = plant_instance(plant, dist, 100000, 7);
  AdversaryStrategy s;
  s.tag = StrategyTag::ChowAttack;
  s.direction = unit(n, 3);
  // p*(x0) = u.x0 = 10; the constant slot adds 1 to the squared whitened norm.
  s.magnitude = std::sqrt(101.0);
  const AttackPoint ap = chow_attack_point(plant, s, dist, 1);
  CHECK(ap.x0(3) == doctest::Approx(10.0).epsilon(1e-9));
  const auto out = corrupt(inst.clean, plant, 0.1, s, dist, 8);
  const Vector clean = empirical_chow(inst.clean, dist).chi;
  const Vector bad = empirical_chow(out, dist).chi;
  const double shift = bad(static_cast<Eigen::Index>(dist.basis().linear_slot(3))) -
                       clean(static_cast<Eigen::Index>(dist.basis().linear_slot(3)));
  CHECK(std::abs(shift - 1.0) <= 0.05);
}

TEST_CASE("default attack direction avoids the plant and respects the prune radius") {
  const int n = 8;
  const auto dist = make_gaussian(n, 1, 0.1);
  const Hypothesis plant = LTF(unit(n, 2), 0.5);
  AdversaryStrategy s;
  s.tag = StrategyTag::ChowAttack;
  const AttackPoint ap = chow_attack_point(plant, s, dist, 3);
  CHECK(std::abs(ap.x0(2)) <= 1e-9);
  CHECK(ap.magnitude == doctest::Approx(0.9 * dist.t_max() / std::sqrt(2.0)).epsilon(1e-9));

  const auto inst = plant_instance(plant, dist, 20000, 11);
  const auto out = corrupt(inst.clean, plant, 0.1, s, dist, 3);
  const auto kept = prune_indices(out.points, dist);
  std::size_t planted_kept = 0;
  for (std::size_t i : kept) planted_kept += out.is_corrupted(i);
  CHECK(static_cast<double>(planted_kept) >= 0.99 * static_cast<double>(out.corrupted_count()));
}

TEST_CASE("boundary_flip and remove_informative target margins") {
  const auto dist = make_gaussian(3, 1, 0.1);
  const Hypothesis plant = LTF(unit(3, 0), 0.0);
  const auto inst = plant_instance(plant, dist, 5000, 12);
  AdversaryStrategy bf;
  bf.tag = StrategyTag::BoundaryFlip;
  const auto flipped = corrupt(inst.clean, plant, 0.1, bf, dist, 1);
  double max_flipped = 0.0;
  double min_kept = 1e9;
  for (std::size_t i = 0; i < flipped.size(); ++i) {
    const double m = std::abs(margin(plant, flipped.point(i)));
    if (flipped.is_corrupted(i)) {
      max_flipped = std::max(max_flipped, m);
      CHECK(flipped.label(i) == -inst.clean.label(i));
    } else {
      min_kept = std::min(min_kept, m);
    }
  }
  CHECK(max_flipped <= min_kept);

  AdversaryStrategy ri;
  ri.tag = StrategyTag::RemoveInformative;
  const auto replaced = corrupt(inst.clean, plant, 0.1, ri, dist, 1);
  for (std::size_t i = 0; i < replaced.size(); ++i) {
    CHECK(replaced.label(i) == evaluate(plant, replaced.point(i)));
  }
}

TEST_CASE("planted instance label rates") {
  const auto dist = make_gaussian(6, 2, 0.0);
  const auto ltf = plant_instance(LTF(unit(6, 0), 0.0), dist, 100000, 1);
  CHECK(std::abs(ltf.clean.labels.mean()) <= 0.02);

  const Hypothesis inter = Intersection({LTF(unit(6, 0), 0.0), LTF(unit(6, 1), 0.0)}, 6);
  const auto in = plant_instance(inter, dist, 100000, 2);
  CHECK(std::abs((in.clean.labels.array() > 0).cast<double>().mean() - 0.25) <= 0.01);

  Vector c = Vector::Zero(static_cast<Eigen::Index>(dist.basis().size()));
  c(0) = -1.0;
  MultiIndex sq(6, 0);
  sq[0] = 2;
  c(dist.basis().find(sq)) = 1.0;
  const auto ptf = plant_instance(PTF(Polynomial(dist.basis_ptr(), c)), dist, 100000, 3);
  const double expect = 2.0 * (1.0 - oracle::phi(1.0));
  CHECK(std::abs((ptf.clean.labels.array() > 0).cast<double>().mean() - expect) <= 0.01);
}

TEST_CASE("corrupted source is deterministic and batches differ") {
  const auto dist = make_gaussian(3, 1, 0.05);
  AdversaryStrategy s;
  s.tag = StrategyTag::RandomFlip;
  auto a = corrupted_source(LTF(unit(3, 0), 0.0), dist, 0.05, s, 42);
  auto b = corrupted_source(LTF(unit(3, 0), 0.0), dist, 0.05, s, 42);
  const auto a1 = a(100);
  const auto a2 = a(100);
  CHECK(a1.points == b(100).points);
  CHECK(a1.points != a2.points);
  CHECK(a1.corrupted_count() == 5);
}
