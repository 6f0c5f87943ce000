#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rchow/chowfilter.hpp"
#include "rchow/hypothesis.hpp"
#include "rchow/hypothesis_select.hpp"
#include "rchow/sample_set.hpp"

namespace rchow {

/// vec1_i = E[y x_i]; mat2_ij = E[y x_i x_j] off the diagonal and
/// E[y (x_i^2 - 1)] on it. Exactly symmetric.
struct Degree2ChowMatrix {
  Vector vec1;
  Matrix mat2;
};

/// Reads the degree-1 and degree-2 slots of a Chow estimate over a full
/// basis with d >= 2; the diagonal is centred by the constant slot.
Degree2ChowMatrix build_degree2(const ChowEstimate& chow);

struct Subspace {
  Matrix basis;  // n x dim, orthonormal columns

  int dim() const { return static_cast<int>(basis.cols()); }
  Matrix projector() const { return basis * basis.transpose(); }
};

/// Span of vec1 and the eigenvectors of the k largest-magnitude eigenvalues
/// of mat2, keeping only directions whose norm or |eigenvalue| exceeds
/// noise_floor.
Subspace extract_subspace(const Degree2ChowMatrix& d2, int k, double noise_floor);

/// eps sqrt(2 log(1/eps)) + 3 sqrt(ell / m).
double default_noise_floor(double eps, std::size_t ell, std::size_t m);

/// Unit vectors on S^{dim-1} within angle `resolution` of every unit vector,
/// and thresholds on [-bound, bound] with step `resolution`.
struct HalfspaceNet {
  int dim = 1;
  std::vector<Vector> directions;
  std::vector<double> thresholds;

  std::size_t size() const { return directions.size() * thresholds.size(); }
  LTF member(std::size_t i) const;
  /// Member with the closest direction and threshold.
  LTF nearest(const LTF& h) const;
};

HalfspaceNet make_halfspace_net(int dim, double resolution, double bound);
/// Resolution delta / (4k) and bound Phi^{-1}(1 - delta / (8k)).
HalfspaceNet cover_net(int k, int dim, double delta);

/// Every multiset of k net members, plus the two constants (the constant
/// true is the intersection with no members; the constant false is the
/// first member intersected with its negation).
std::vector<Intersection> make_cover(int k, int dim, double delta, std::size_t cap = 2000000);
std::size_t cover_size(int k, int dim, double delta);

/// c eps^{1/11} k^{4/11} log^{3/11}(k / eps), floored at 0.05.
double default_cover_delta(double eps, int k, double c = 0.1);

struct IntersectionOptions {
  FilterParams filter;
  std::optional<double> delta;
  std::optional<double> noise_floor;
  /// Fraction of the samples used for Chow estimation; the rest is the
  /// selection batch.
  double chow_fraction = 0.75;
  /// Coarse net resolution for the tournament.
  double coarse_resolution = 0.13;
  std::size_t coarse_points = 16384;
  std::size_t pair_budget = 4000000;
  std::size_t max_refine_sweeps = 60;
};

struct IntersectionResult {
  Hypothesis hypothesis;
  Subspace subspace;
  Degree2ChowMatrix d2;
  ChowEstimate chow;
  double delta = 0.0;
  double selection_error = 0.0;
  std::size_t coarse_candidates = 0;
};

/// Robust degree-2 Chow estimation, subspace extraction, tournament and
/// local refinement on the projected selection batch, lifted back to R^n.
IntersectionResult learn_intersection(const LabeledSampleSet& chow_batch, const LabeledSampleSet& selection_batch,
                                      int k, double eps, const IntersectionOptions& options = {});
IntersectionResult learn_intersection(const LabeledSampleSet& corrupted, int k, double eps,
                                      const IntersectionOptions& options = {});

/// Norm of (E[f01 (v.x)], E[f01 ((v.x)^2 - 1)] / sqrt(2)) with labels in {0, 1}.
double direction_correlation(const LabeledSampleSet& samples, const Vector& v);

/// Monte-Carlo E|f01(G) - f01(G')| where G' resamples the v-component of G.
double resampling_variation(const Hypothesis& f, const Vector& v, std::size_t count, std::uint64_t seed);

}  // namespace rchow
