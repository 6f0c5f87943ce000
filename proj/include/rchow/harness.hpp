#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rchow/adversary.hpp"
#include "rchow/chowfilter.hpp"
#include "rchow/hypothesis.hpp"
#include "rchow/serialize.hpp"

namespace rchow {

enum class LearnerKind { PTF, LTF, Intersection };

std::string to_string(LearnerKind kind);
LearnerKind parse_learner(const std::string& name);

struct ExperimentConfig {
  LearnerKind learner = LearnerKind::LTF;
  DistributionConfig distribution;
  int n = 10;
  int d = 1;
  int k = 1;
  std::vector<double> eps_grid;
  std::vector<StrategyTag> strategies;
  /// Training samples (per stage for the LTF learner).
  std::size_t m = 10000;
  /// Selection samples; learner default when zero.
  std::size_t holdout = 0;
  std::size_t score_count = 100000;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::optional<std::string> output;
  /// Plant: LTF sign(x1 + theta) (theta 1 by default), k halfspaces
  /// sign(x_j + theta) for the intersection (theta 0.5), and for PTFs
  /// sign(x1^2 - 1), sign(x1 + theta) at d = 1 (theta 0) or
  /// sign(sum x_i + 1/2) on the hypercube, unless plant_polynomial is given.
  std::optional<double> plant_theta;
  std::optional<Polynomial> plant_polynomial;
  AdversaryStrategy strategy_params;
  FilterParams filter;
  std::optional<double> xi;
  std::optional<double> delta;
  /// Cells slower than this are flagged "timeout" (only checked when set).
  std::optional<double> timeout_ms;
  /// wall_time_ms is measured only when set, so that output stays
  /// byte-identical across reruns otherwise.
  bool record_timing = false;
};

/// Throws ConfigError (with the line of the offending key when known),
/// UnknownStrategy or UnknownFamily.
ExperimentConfig experiment_config_from_json(const Json& j, const std::string& text = {});
ExperimentConfig load_experiment_config(const std::string& path);
Json to_json(const ExperimentConfig& c);

struct ResultRow {
  std::string learner;
  std::string strategy;
  double eps = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  /// Absent when the learner failed.
  std::optional<double> disagreement;
  std::optional<double> chow_error;
  std::size_t iterations = 0;
  std::size_t points_removed = 0;
  double wall_time_ms = 0.0;
  std::string flags;
};

struct CellOutcome {
  ResultRow row;
  std::optional<Hypothesis> hypothesis;
};

/// Monte-Carlo Pr[h(X) != f(X)] on count fresh points from dist.
double score(const Hypothesis& h, const Hypothesis& plant, const ReasonableDistribution& dist, std::size_t count,
             std::uint64_t seed);

double plant_theta(const ExperimentConfig& c);
Hypothesis make_plant(const ExperimentConfig& c);

/// Plant, sample, corrupt, learn and score one cell. Learner failures are
/// reported in flags ("error=<kind>") with no disagreement.
CellOutcome run_cell(const ExperimentConfig& c, StrategyTag strategy, double eps, std::size_t trial,
                     std::uint64_t seed);

/// Seed of cell (strategy index, eps index, trial).
std::uint64_t cell_seed(const ExperimentConfig& c, std::size_t strategy_index, std::size_t eps_index,
                        std::size_t trial);

/// Cells in (strategy, eps, trial) order; writes c.output when set.
std::vector<ResultRow> run_experiment(const ExperimentConfig& c);

extern const char* const kResultHeader;
std::string format_row(const ResultRow& row);
void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out);
void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);

}  // namespace rchow
