#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "rchow/chowfilter.hpp"
#include "rchow/hypothesis.hpp"
#include "rchow/sample_set.hpp"

namespace rchow {

/// Estimates the Chow vector of a bounded hypothesis from (possibly
/// corrupted) unlabeled points that the oracle labels itself.
using ChowOracle = std::function<ChowEstimate(const PBF& h)>;

/// Oracle over one fixed point pool: the pool is filtered once (the filter
/// ignores labels) and every query averages h(x) m(x) over the survivors.
ChowOracle pool_oracle(const PointMatrix& points, const ReasonableDistribution& dist, const FilterParams& params);
/// Oracle that draws a fresh batch per query from the source, filters it and
/// averages h(x) m(x) over the survivors. Source labels are ignored.
ChowOracle fresh_oracle(SampleSource source, std::size_t batch, const ReasonableDistribution& dist,
                        const FilterParams& params);

struct ReconstructParams {
  double c_stop = 4.0;
  /// Defaults to 4 / xi^2 + 16.
  std::optional<std::size_t> max_iterations;
};

struct ReconstructResult {
  PBF pbf;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool cap_reached = false;
  /// The rounded update vanished before the stopping rule fired.
  bool stalled = false;
  std::vector<double> residual_history;
};

/// Residual descent q <- q + (1/2) p_rho on the xi/2 grid until the
/// orthonormal residual W (chi_target - chi(P_1(q))) has norm <= c_stop xi.
ReconstructResult chow_reconstruct(const ChowEstimate& target, const ReasonableDistribution& dist, double xi,
                                   const ChowOracle& oracle, const ReconstructParams& params = {});

/// Rounds each coefficient to the nearest multiple of step.
Vector round_to_grid(const Vector& c, double step);

struct PTFOptions {
  FilterParams filter;
  ReconstructParams reconstruct;
  /// Grid step; default_ptf_xi when unset.
  std::optional<double> xi;
  /// Relabel the filtered training pool instead of drawing fresh batches.
  bool reuse_pool = true;
  /// Fresh unlabeled batches for the oracle when reuse_pool is false.
  SampleSource fresh_source;
  std::size_t fresh_batch = 0;
};

/// max(0.01, (sqrt(ell / m) + eps) / 2): the scale of the achieved Chow error.
double default_ptf_xi(std::size_t ell, std::size_t m, double eps);

struct PTFResult {
  PTF ptf;
  PBF pbf;
  ChowEstimate target;
  ReconstructResult reconstruction;
  double xi = 0.0;
};

/// Robust Chow estimation followed by reconstruction; returns sign(q).
PTFResult learn_ptf(const LabeledSampleSet& corrupted, const ReasonableDistribution& dist, int d, double eps,
                    const PTFOptions& options = {});

}  // namespace rchow
