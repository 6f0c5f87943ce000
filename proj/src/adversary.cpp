#include "rchow/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include "rchow/error.hpp"
#include "rchow/numeric.hpp"

namespace rchow {

namespace {

std::vector<std::size_t> random_subset(std::size_t m, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, m - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Indices ordered by |margin| ascending; ties by index.
std::vector<std::size_t> order_by_abs_margin(const Vector& margins) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(margins.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(margins(static_cast<Eigen::Index>(a))) < std::abs(margins(static_cast<Eigen::Index>(b)));
  });
  return idx;
}

std::vector<Vector> plant_vectors(const Hypothesis& h) {
  std::vector<Vector> out;
  if (const auto* ltf = std::get_if<LTF>(&h)) out.push_back(ltf->v);
  if (const auto* inter = std::get_if<Intersection>(&h)) {
    for (const auto& member : inter->ambient_halfspaces()) out.push_back(member.v);
  }
  return out;
}

Vector default_direction(const Hypothesis& target, int n, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed ^ 0xa77ac4ULL));
  std::normal_distribution<double> gauss;
  const std::vector<Vector> avoid = plant_vectors(target);
  for (int attempt = 0; attempt < 16; ++attempt) {
    Vector u(n);
    for (int j = 0; j < n; ++j) u(j) = gauss(rng);
    if (static_cast<int>(avoid.size()) < n) {
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& a : avoid) u -= (a.dot(u) / a.squaredNorm()) * a;
      }
    }
    if (u.norm() > 1e-6) return u / u.norm();
  }
  Vector u = Vector::Zero(n);
  u(0) = 1.0;
  return u;
}

double normalized_magnitude(const ReasonableDistribution& dist, const Vector& x) {
  return dist.geometry().whiten(dist.basis().eval(x)).norm();
}

}  // namespace

std::string to_string(StrategyTag tag) {
  switch (tag) {
    case StrategyTag::None: return "none";
    case StrategyTag::RandomFlip: return "random_flip";
    case StrategyTag::BoundaryFlip: return "boundary_flip";
    case StrategyTag::ChowAttack: return "chow_attack";
    case StrategyTag::RemoveInformative: return "remove_informative";
  }
  return "none";
}

StrategyTag parse_strategy(const std::string& name) {
  for (StrategyTag tag : strategy_catalog()) {
    if (to_string(tag) == name) return tag;
  }
  fail(ErrorKind::UnknownStrategy, "unknown adversary strategy '" + name + "'");
}

const std::vector<StrategyTag>& strategy_catalog() {
  static const std::vector<StrategyTag> catalog = {StrategyTag::None, StrategyTag::RandomFlip,
                                                   StrategyTag::BoundaryFlip, StrategyTag::ChowAttack,
                                                   StrategyTag::RemoveInformative};
  return catalog;
}

std::size_t corruption_budget(double eps, std::size_t m) {
  return static_cast<std::size_t>(std::floor(eps * static_cast<double>(m) * (1.0 + 1e-12)));
}

AttackPoint chow_attack_point(const Hypothesis& target, const AdversaryStrategy& strategy,
                              const ReasonableDistribution& dist, std::uint64_t seed) {
  const int n = dist.n();
  Vector u = strategy.direction ? *strategy.direction : default_direction(target, n, seed);
  require(u.size() == n, ErrorKind::DimensionMismatch, "attack direction has the wrong dimension");
  require(u.norm() > 0.0, ErrorKind::InvalidArgument, "attack direction is zero");
  u /= u.norm();

  double goal = 0.0;
  if (strategy.magnitude) {
    goal = *strategy.magnitude;
  } else {
    require(strategy.rho > 0.0 && strategy.rho < 1.0, ErrorKind::InvalidArgument, "rho must lie in (0, 1)");
    goal = strategy.rho * dist.t_max() / std::sqrt(2.0);
  }
  const double base = normalized_magnitude(dist, Vector::Zero(n));
  require(goal > base, ErrorKind::InvalidArgument, "attack magnitude is below the value at the origin");

  double lo = 0.0;
  double hi = 1.0;
  while (normalized_magnitude(dist, hi * u) < goal) {
    lo = hi;
    hi *= 2.0;
    require(hi < 1e12, ErrorKind::InvalidArgument, "attack magnitude unreachable along direction");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (normalized_magnitude(dist, mid * u) < goal ? lo : hi) = mid;
  }
  AttackPoint out;
  out.x0 = lo * u;
  out.magnitude = normalized_magnitude(dist, out.x0);
  return out;
}

LabeledSampleSet corrupt(const LabeledSampleSet& clean, const Hypothesis& target, double eps,
                         const AdversaryStrategy& strategy, const ReasonableDistribution& dist, std::uint64_t seed) {
  require(eps >= 0.0 && eps < 1.0 / 3.0, ErrorKind::InvalidArgument, "eps must lie in [0, 1/3)");
  require(clean.n() == dist.n() || clean.empty(), ErrorKind::DimensionMismatch,
          "sample dimension does not match distribution");
  const std::size_t m = clean.size();
  const std::size_t k = corruption_budget(eps, m);
  LabeledSampleSet out = clean;
  out.corrupted.emplace(m, false);
  if (k == 0 || strategy.tag == StrategyTag::None) return out;

  std::mt19937_64 rng(mix_seed(seed));
  std::vector<std::size_t> chosen;

  switch (strategy.tag) {
    case StrategyTag::RandomFlip: {
      chosen = random_subset(m, k, rng);
      for (std::size_t i : chosen) out.labels(static_cast<Eigen::Index>(i)) = -clean.label(i);
      break;
    }
    case StrategyTag::BoundaryFlip: {
      const auto order = order_by_abs_margin(margin_rows(target, clean.points));
      chosen.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
      for (std::size_t i : chosen) out.labels(static_cast<Eigen::Index>(i)) = -clean.label(i);
      break;
    }
    case StrategyTag::ChowAttack: {
      const AttackPoint attack = chow_attack_point(target, strategy, dist, seed);
      chosen = random_subset(m, k, rng);
      for (std::size_t i : chosen) {
        out.points.row(static_cast<Eigen::Index>(i)) = attack.x0.transpose();
        out.labels(static_cast<Eigen::Index>(i)) = 1.0;
      }
      break;
    }
    case StrategyTag::RemoveInformative: {
      require(dist.has_sampler(), ErrorKind::InvalidArgument, "remove_informative needs a sampler");
      const auto order = order_by_abs_margin(margin_rows(target, clean.points));
      chosen.assign(order.end() - static_cast<std::ptrdiff_t>(k), order.end());
      const PointMatrix pool = dist.sample(std::max<std::size_t>(1, strategy.pool_factor) * k, mix_seed(seed + 1));
      const auto pool_order = order_by_abs_margin(margin_rows(target, pool));
      for (std::size_t r = 0; r < k; ++r) {
        const auto src = static_cast<Eigen::Index>(pool_order[r]);
        const auto dst = static_cast<Eigen::Index>(chosen[r]);
        out.points.row(dst) = pool.row(src);
        out.labels(dst) = evaluate(target, pool.row(src).transpose());
      }
      break;
    }
    case StrategyTag::None: break;
  }
  for (std::size_t i : chosen) (*out.corrupted)[i] = true;
  require(out.corrupted_count() == k, ErrorKind::BudgetExceeded, "corruption count differs from budget");
  return out;
}

LabeledSampleSet label_points(const Hypothesis& h, PointMatrix points) {
  Vector labels = evaluate_rows(h, points);
  return {std::move(points), std::move(labels)};
}

PlantedInstance plant_instance(Hypothesis plant, const ReasonableDistribution& dist, std::size_t m,
                               std::uint64_t seed) {
  require(input_dim(plant) == dist.n(), ErrorKind::InvalidHypothesis, "plant dimension does not match distribution");
  LabeledSampleSet clean = label_points(plant, dist.sample(m, seed));
  return {std::move(plant), std::move(clean)};
}

SampleSource corrupted_source(Hypothesis plant, ReasonableDistribution dist, double eps, AdversaryStrategy strategy,
                              std::uint64_t seed) {
  auto batch = std::make_shared<std::uint64_t>(0);
  return [plant = std::move(plant), dist = std::move(dist), eps, strategy = std::move(strategy), seed,
          batch](std::size_t count) {
    const std::uint64_t i = (*batch)++;
    const LabeledSampleSet clean = label_points(plant, dist.sample(count, derive_seed(seed, 2 * i)));
    return corrupt(clean, plant, eps, strategy, dist, derive_seed(seed, 2 * i + 1));
  };
}

}  // namespace rchow
