#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rchow/distributions.hpp"
#include "rchow/hypothesis.hpp"
#include "rchow/sample_set.hpp"

namespace rchow {

enum class StrategyTag { None, RandomFlip, BoundaryFlip, ChowAttack, RemoveInformative };

std::string to_string(StrategyTag tag);
/// Throws UnknownStrategy.
StrategyTag parse_strategy(const std::string& name);
/// Every tag, in declaration order.
const std::vector<StrategyTag>& strategy_catalog();

struct AdversaryStrategy {
  StrategyTag tag = StrategyTag::None;
  /// chow_attack: unit direction u in R^n along which x0 = t u is placed.
  /// Default: random, orthogonal to the plant's defining vectors.
  std::optional<Vector> direction;
  /// chow_attack: placement as a fraction of the prune radius, so that
  /// m(x0)^T Sigma^+ m(x0) = (rho T_max)^2 / 2. Must lie in (0, 1).
  double rho = 0.9;
  /// chow_attack: when set, overrides rho with sup_p p(x0) = magnitude over
  /// normalized p, i.e. sqrt(m(x0)^T Sigma^+ m(x0)) = magnitude.
  std::optional<double> magnitude;
  /// remove_informative: replacement candidates drawn per removed point.
  std::size_t pool_factor = 20;
};

/// floor(eps * m), robust to rounding in eps * m.
std::size_t corruption_budget(double eps, std::size_t m);

/// Replaces exactly corruption_budget(eps, m) entries of clean; the rest are
/// copied unchanged and the mask marks the replacements.
LabeledSampleSet corrupt(const LabeledSampleSet& clean, const Hypothesis& target, double eps,
                         const AdversaryStrategy& strategy, const ReasonableDistribution& dist, std::uint64_t seed);

/// The chow_attack point for the strategy and distribution, and its
/// normalized magnitude sqrt(m(x0)^T Sigma^+ m(x0)).
struct AttackPoint {
  Vector x0;
  double magnitude = 0.0;
};
AttackPoint chow_attack_point(const Hypothesis& target, const AdversaryStrategy& strategy,
                              const ReasonableDistribution& dist, std::uint64_t seed);

struct PlantedInstance {
  Hypothesis plant;
  LabeledSampleSet clean;
};

/// Draws m points from dist and labels them with the plant.
PlantedInstance plant_instance(Hypothesis plant, const ReasonableDistribution& dist, std::size_t m,
                               std::uint64_t seed);

/// Each call draws count fresh points, labels them with the plant and
/// corrupts the batch; batch i uses seeds derived from (seed, i).
SampleSource corrupted_source(Hypothesis plant, ReasonableDistribution dist, double eps, AdversaryStrategy strategy,
                              std::uint64_t seed);

/// Labels every row with the hypothesis (values in [-1, 1]).
LabeledSampleSet label_points(const Hypothesis& h, PointMatrix points);

}  // namespace rchow
