#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rchow/chowfilter.hpp"
#include "rchow/hypothesis.hpp"
#include "rchow/hypothesis_select.hpp"
#include "rchow/sample_set.hpp"

namespace rchow {

/// Phi^{-1}((mean + 1) / 2) with the mean clamped to [-1 + 1e-9, 1 - 1e-9].
double threshold_from_mean(double mean);
double estimate_threshold(const LabeledSampleSet& s);

/// E[sign(v.x + theta)] = 2 Phi(theta) - 1 under N(0, I).
double ltf_mean(double theta);
/// Degree-1 Chow vector 2 G(theta) v of sign(v.x + theta).
Vector ltf_chow(const Vector& v, double theta);

struct RejectionParams {
  Vector v;
  double theta = 0.0;
  double sigma = 0.5;

  RejectionParams(Vector v, double theta, double sigma);
  /// exp(-(sigma^-2 - 1)(v.x + theta / (1 - sigma^2))^2 / 2).
  double acceptance(VectorRef x) const;
  /// sigma exp(-theta^2 / (2 (1 - sigma^2))): the acceptance rate under N(0, I).
  double gaussian_rate() const;
  /// A^{-1/2}(x + theta v) with A^{-1/2} = I + (1/sigma - 1) v v^T.
  Vector to_standard(VectorRef x) const;
};

/// Rows accepted independently with probability rp.acceptance(x).
std::vector<std::size_t> rejection_sample(const PointMatrix& points, const RejectionParams& rp, std::uint64_t seed);

/// Accepted rows mapped to standard coordinates, labels kept.
LabeledSampleSet restrict_samples(const LabeledSampleSet& s, const RejectionParams& rp, std::uint64_t seed,
                                  double* acceptance_rate = nullptr);

/// (a, b) with a^2 + b^2 = 1 from the perpendicular fraction C of the
/// restricted LTF's Chow direction, which is proportional to a sigma v + b w.
/// C is clamped to [0, 0.99].
struct AB {
  double a = 1.0;
  double b = 0.0;
};
AB recover_ab(double c, double sigma);

/// Degree-1 block (slots 1..n) of a Chow estimate over a degree >= 1 basis.
Vector linear_chow(const ChowEstimate& est);

struct WeakLTF {
  LTF ltf;
  Vector u;
  double mean = 0.0;
  ChowEstimate chow;
};

/// Filtered Chow vector, v = u / ||u||, theta from the filtered label mean.
/// Throws ZeroChowVector when ||u|| < 10 / sqrt(survivors).
WeakLTF weak_learn_ltf(const LabeledSampleSet& corrupted, double eps, const FilterParams& params = {});

struct RefineResult {
  Vector chow;  // estimate of 2 G(theta) (a v + b w)
  AB ab;
  Vector w;
  double sigma = 0.0;
  double acceptance_rate = 0.0;
  double eps_restricted = 0.0;
  std::size_t accepted = 0;
};

struct RefineParams {
  FilterParams filter;
  /// Lower clamp for sigma so that enough points are accepted.
  double sigma_min = 0.0;
  /// Restricted runs use eps' = min(eps_cap, eps / acceptance rate).
  double eps_cap = 0.45;
};

/// One localization step in the moderate regime. Throws AcceptanceTooLow when
/// the empirical acceptance rate is below eps.
RefineResult refine_moderate(const LabeledSampleSet& batch, const Vector& v_prev, double theta, double delta_prev,
                             double eps, std::uint64_t seed, const RefineParams& params = {});

/// One randomized trial of the extreme regime with the guessed b.
RefineResult refine_extreme_trial(const LabeledSampleSet& batch, const Vector& v_prev, double theta, double eps,
                                  double b_guess, double s_fraction, std::uint64_t seed,
                                  const RefineParams& params = {});

struct ExtremeParams {
  RefineParams refine;
  /// Defaults to 50 log^2(1/eps).
  std::optional<std::size_t> trials;
  double b_cap = 0.25;
};

struct ExtremeCandidate {
  Vector chow;
  double b_guess = 0.0;
  double s = 0.0;
};

/// Runs the trial budget on one shared batch; failed trials are skipped.
std::vector<ExtremeCandidate> refine_extreme(const LabeledSampleSet& batch, const Vector& u, double theta, double eps,
                                             std::uint64_t seed, const ExtremeParams& params = {});

struct LTFOptions {
  FilterParams filter;
  /// Constant branch when 1 - |2 Phi(theta) - 1| <= c_constant eps.
  double c_constant = 3.0;
  /// Extreme branch when theta e^{theta^2/2} >= kappa sqrt(log(1/eps)) / eps.
  double kappa = 1.0;
  /// C in delta_i = C eps sqrt(log(delta_{i-1} / eps)).
  double c_delta = 1.0;
  std::size_t max_moderate_iterations = 12;
  /// Accepted points required per restricted run, per dimension.
  double min_accepted_per_dim = 50.0;
  ExtremeParams extreme;
  /// Holdout size for the final selection; the stage size when zero.
  std::size_t holdout = 0;
};

struct LTFResult {
  Hypothesis hypothesis;
  std::string branch;
  double theta = 0.0;
  std::size_t iterations = 0;
  std::vector<double> delta_schedule;
  std::vector<Candidate> candidates;
  Selection selection;
  std::optional<WeakLTF> weak;
};

/// Full pipeline. Each stage (weak learner, every localization step, the
/// extreme batch, the holdout) draws its own batch of stage_size samples.
LTFResult learn_ltf(const SampleSource& source, std::size_t stage_size, double eps, std::uint64_t seed,
                    const LTFOptions& options = {});
/// Splits one corrupted set into stages of equal size.
LTFResult learn_ltf(const LabeledSampleSet& corrupted, double eps, std::uint64_t seed, std::size_t stages = 4,
                    const LTFOptions& options = {});

}  // namespace rchow
