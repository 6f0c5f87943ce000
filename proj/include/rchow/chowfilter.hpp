#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "rchow/distributions.hpp"
#include "rchow/linalg.hpp"
#include "rchow/polybasis.hpp"
#include "rchow/sample_set.hpp"

namespace rchow {

struct FilterParams {
  /// Working corruption rate; the descriptor's own rate when unset.
  std::optional<double> eps;
  double c_break = 10.0;
  /// Slack added to the break threshold for finite-sample fluctuation of
  /// M - I. When unset, default_eigen_tol(ell, N, d) is used.
  std::optional<double> eigen_tol;
  std::size_t max_iterations = 1000;
  std::size_t dense_limit = 2000;
};

/// 4 d sqrt(ell / N): a few multiples of the spectral fluctuation of the
/// whitened second-moment matrix on clean samples.
double default_eigen_tol(std::size_t ell, std::size_t samples, int d);

enum class FilterOutcome { Converged, Filtered, NoThreshold };

struct FilterIterationResult {
  FilterOutcome outcome = FilterOutcome::Converged;
  double lambda_star = 0.0;
  /// Unit eigenvector of M - I in orthonormal coordinates.
  Vector direction;
  /// Removal threshold T (Filtered only).
  double threshold = 0.0;
  std::size_t removed = 0;
  double break_threshold = 0.0;
};

struct Provenance {
  std::size_t samples_in = 0;
  std::size_t pruned = 0;
  std::size_t iterations = 0;
  std::size_t removed_by_filter = 0;
  std::size_t survivors = 0;
  double final_lambda = 0.0;
  double break_threshold = 0.0;
  bool converged = false;
  bool no_threshold = false;
  bool cap_reached = false;
  bool filtered = true;
};

/// Chow vector chi_i ~ E[f m_i] together with the basis and moment geometry
/// it refers to.
struct ChowEstimate {
  BasisPtr basis;
  std::shared_ptr<const MomentGeometry> geometry;
  Vector chi;
  Provenance provenance;

  /// L(p) = sum_i c_i chi_i.
  double apply(const Polynomial& p) const;
  /// W chi.
  Vector orthonormal() const { return geometry->whiten(chi); }
};

/// Outcome of running the filter on unlabeled points: indices refer to the
/// input rows.
struct FilterRun {
  std::vector<std::size_t> survivors;
  std::vector<std::size_t> pruned;
  std::vector<std::size_t> removed;
  std::vector<FilterIterationResult> iterations;
  Provenance provenance;
};

/// Rows kept by step 1 (all rows when pruning is disabled).
std::vector<std::size_t> prune_indices(const PointMatrix& points, const ReasonableDistribution& dist);
/// Throws AllPointsPruned when nothing survives.
LabeledSampleSet prune(const LabeledSampleSet& s, const ReasonableDistribution& dist);

/// One eigen-test on s (assumed pruned). On Filtered the removed rows are
/// erased from s.
FilterIterationResult filter_iteration(LabeledSampleSet& s, const ReasonableDistribution& dist,
                                       const FilterParams& params);

/// Prune then filter to a fixpoint. Labels play no role.
FilterRun filter_points(const PointMatrix& points, const ReasonableDistribution& dist, const FilterParams& params);

/// Mean of y m(x) over the given rows, or over every row when rows is null.
Vector mean_label_moments(const PointMatrix& points, const Vector& labels, const MonomialBasis& basis,
                          const std::vector<std::size_t>* rows);

ChowEstimate robust_chow(const LabeledSampleSet& corrupted, const ReasonableDistribution& dist,
                         const FilterParams& params = {});
/// Plain empirical Chow vector with no pruning or filtering.
ChowEstimate empirical_chow(const LabeledSampleSet& s, const ReasonableDistribution& dist);
/// Chow estimate of given labels over a precomputed survivor set.
ChowEstimate chow_from_run(const FilterRun& run, const PointMatrix& points, const Vector& labels,
                           const ReasonableDistribution& dist);

/// ||W (chi_a - chi_b)||_2; throws BasisMismatch unless basis and Sigma agree.
double chow_distance(const ChowEstimate& a, const ChowEstimate& b);

/// Wraps a known Chow vector (no provenance).
ChowEstimate make_chow(const ReasonableDistribution& dist, Vector chi);

}  // namespace rchow
