#include "rchow/ltf_learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rchow/error.hpp"
#include "rchow/numeric.hpp"

namespace rchow {

namespace {

constexpr double kMeanClamp = 1e-9;

ChowEstimate linear_robust_chow(const LabeledSampleSet& s, double eps, const FilterParams& params) {
  const ReasonableDistribution dist = make_gaussian(s.n(), 1, eps);
  FilterParams fp = params;
  fp.eps = eps;
  return robust_chow(s, dist, fp);
}

WeakLTF weak_from_chow(ChowEstimate chow) {
  WeakLTF out{LTF::normalized(Vector::Ones(chow.basis->n()), 0.0), linear_chow(chow), chow.chi(0), chow};
  const double floor = 10.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, chow.provenance.survivors)));
  require(out.u.norm() >= floor, ErrorKind::ZeroChowVector,
          "degree-1 Chow vector norm " + std::to_string(out.u.norm()) + " is below the noise floor");
  out.ltf = LTF::normalized(out.u, threshold_from_mean(out.mean));
  return out;
}

/// Shared tail of both refinement kinds: learn the restricted LTF's Chow
/// direction and undo the rejection map.
RefineResult refine_core(const LabeledSampleSet& batch, const Vector& v, double theta_f, const RejectionParams& rp,
                         double eps, std::uint64_t seed, const RefineParams& params) {
  RefineResult out;
  out.sigma = rp.sigma;
  const LabeledSampleSet restricted = restrict_samples(batch, rp, seed, &out.acceptance_rate);
  out.accepted = restricted.size();
  require(out.acceptance_rate >= eps && out.accepted > static_cast<std::size_t>(batch.n()) + 1,
          ErrorKind::AcceptanceTooLow,
          "acceptance rate " + std::to_string(out.acceptance_rate) + " is too low for eps " + std::to_string(eps));
  out.eps_restricted = std::min(params.eps_cap, eps / out.acceptance_rate);
  const ChowEstimate g = linear_robust_chow(restricted, out.eps_restricted, params.filter);
  Vector d = linear_chow(g);
  require(d.norm() > 0.0, ErrorKind::ZeroChowVector, "restricted Chow vector vanished");
  d /= d.norm();
  Vector perp = d - d.dot(v) * v;
  const double c = perp.norm();
  out.ab = recover_ab(c, rp.sigma);
  out.w = c > 1e-12 ? Vector(perp / c) : Vector(Vector::Zero(v.size()));
  out.chow = 2.0 * normal_pdf(theta_f) * (out.ab.a * v + out.ab.b * out.w);
  return out;
}

std::size_t default_trials(double eps) {
  const double l = std::log(1.0 / eps);
  return static_cast<std::size_t>(std::ceil(50.0 * l * l));
}

}  // namespace

double threshold_from_mean(double mean) {
  const double m = std::clamp(mean, -1.0 + kMeanClamp, 1.0 - kMeanClamp);
  return normal_quantile((m + 1.0) / 2.0);
}

double estimate_threshold(const LabeledSampleSet& s) {
  require(!s.empty(), ErrorKind::InvalidArgument, "threshold estimate needs samples");
  return threshold_from_mean(s.labels.mean());
}

double ltf_mean(double theta) { return 2.0 * normal_cdf(theta) - 1.0; }

Vector ltf_chow(const Vector& v, double theta) { return 2.0 * normal_pdf(theta) * v; }

RejectionParams::RejectionParams(Vector vec, double th, double s) : v(std::move(vec)), theta(th), sigma(s) {
  require(sigma > 0.0 && sigma < 1.0, ErrorKind::InvalidArgument, "sigma must lie in (0, 1)");
  require(std::abs(v.norm() - 1.0) <= 1e-10, ErrorKind::InvalidArgument, "rejection direction must be a unit vector");
}

double RejectionParams::acceptance(VectorRef x) const {
  const double s2 = sigma * sigma;
  const double z = v.dot(x) + theta / (1.0 - s2);
  return std::exp(-(1.0 / s2 - 1.0) * z * z / 2.0);
}

double RejectionParams::gaussian_rate() const {
  return sigma * std::exp(-theta * theta / (2.0 * (1.0 - sigma * sigma)));
}

Vector RejectionParams::to_standard(VectorRef x) const {
  Vector y = x + theta * v;
  y += (1.0 / sigma - 1.0) * v.dot(y) * v;
  return y;
}

std::vector<std::size_t> rejection_sample(const PointMatrix& points, const RejectionParams& rp, std::uint64_t seed) {
  require(points.cols() == rp.v.size(), ErrorKind::DimensionMismatch, "point dimension does not match direction");
  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double u = unif(rng);
    if (u < rp.acceptance(points.row(i).transpose())) out.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

LabeledSampleSet restrict_samples(const LabeledSampleSet& s, const RejectionParams& rp, std::uint64_t seed,
                                  double* acceptance_rate) {
  const std::vector<std::size_t> rows = rejection_sample(s.points, rp, seed);
  LabeledSampleSet out = s.subset(rows);
  for (Eigen::Index i = 0; i < out.points.rows(); ++i) {
    out.points.row(i) = rp.to_standard(out.points.row(i).transpose()).transpose();
  }
  if (acceptance_rate) {
    *acceptance_rate = s.empty() ? 0.0 : static_cast<double>(rows.size()) / static_cast<double>(s.size());
  }
  return out;
}

AB recover_ab(double c, double sigma) {
  require(sigma > 0.0, ErrorKind::InvalidArgument, "sigma must be positive");
  const double cc = std::clamp(c, 0.0, 0.99);
  const double r = sigma * cc / std::sqrt(1.0 - cc * cc);  // b / a
  AB out;
  out.b = r / std::sqrt(1.0 + r * r);
  out.a = 1.0 / std::sqrt(1.0 + r * r);
  return out;
}

Vector linear_chow(const ChowEstimate& est) {
  require(est.basis && est.basis->d() >= 1, ErrorKind::BasisMismatch, "Chow estimate has no degree-1 block");
  const int n = est.basis->n();
  Vector u(n);
  for (int j = 0; j < n; ++j) u(j) = est.chi(static_cast<Eigen::Index>(est.basis->linear_slot(j)));
  return u;
}

WeakLTF weak_learn_ltf(const LabeledSampleSet& corrupted, double eps, const FilterParams& params) {
  require(!corrupted.empty(), ErrorKind::InvalidArgument, "weak learner needs samples");
  return weak_from_chow(linear_robust_chow(corrupted, eps, params));
}

RefineResult refine_moderate(const LabeledSampleSet& batch, const Vector& v_prev, double theta, double delta_prev,
                             double eps, std::uint64_t seed, const RefineParams& params) {
  require(delta_prev > 0.0, ErrorKind::InvalidArgument, "delta_prev must be positive");
  const double raw = delta_prev * std::exp(theta * theta / 2.0);
  const double sigma = std::clamp(raw, std::min(0.5, std::max(params.sigma_min, 1e-6)), 0.5);
  const RejectionParams rp(v_prev, theta, sigma);
  return refine_core(batch, v_prev, theta, rp, eps, seed, params);
}

RefineResult refine_extreme_trial(const LabeledSampleSet& batch, const Vector& v_prev, double theta, double eps,
                                  double b_guess, double s_fraction, std::uint64_t seed, const RefineParams& params) {
  require(b_guess >= 0.0 && b_guess < 1.0, ErrorKind::InvalidArgument, "b guess must lie in [0, 1)");
  const double a = std::sqrt(1.0 - b_guess * b_guess);
  const double mag = std::abs(theta);
  const double sigma = std::min(0.5, mag > 0.0 ? 1.0 / mag : 0.5);
  const double s = (theta >= 0.0 ? 1.0 : -1.0) * (a * mag + s_fraction * b_guess);
  const RejectionParams rp(v_prev, s, sigma);
  RefineResult out = refine_core(batch, v_prev, theta, rp, eps, seed, params);
  return out;
}

std::vector<ExtremeCandidate> refine_extreme(const LabeledSampleSet& batch, const Vector& u, double theta, double eps,
                                             std::uint64_t seed, const ExtremeParams& params) {
  require(u.norm() > 0.0, ErrorKind::ZeroChowVector, "extreme refinement needs a non-zero Chow estimate");
  const Vector v = u / u.norm();
  const double e = std::max(eps, 1e-6);
  const std::size_t trials = params.trials ? *params.trials : default_trials(e);
  const double unit = 1.0 / std::max(1.0, std::log(1.0 / e));
  const auto steps = static_cast<int>(std::floor(params.b_cap / unit + 1e-12));

  std::vector<std::optional<ExtremeCandidate>> slots(trials);
  parallel_for(trials, [&](std::size_t t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    std::uniform_int_distribution<int> pick(0, std::max(0, steps));
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    const double b = std::min(params.b_cap, pick(rng) * unit);
    const double sf = frac(rng);
    try {
      const RefineResult r = refine_extreme_trial(batch, v, theta, eps, b, sf, rng(), params.refine);
      const double a = std::sqrt(1.0 - b * b);
      ExtremeCandidate c;
      c.b_guess = b;
      c.s = a * std::abs(theta) + sf * b;
      c.chow = 2.0 * normal_pdf(theta) * (a * v + b * r.w);
      slots[t] = std::move(c);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::AcceptanceTooLow && err.kind() != ErrorKind::ZeroChowVector &&
          err.kind() != ErrorKind::AllPointsPruned) {
        throw;
      }
    }
  });
  std::vector<ExtremeCandidate> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

LTFResult learn_ltf(const SampleSource& source, std::size_t stage_size, double eps, std::uint64_t seed,
                    const LTFOptions& options) {
  require(eps >= 0.0 && eps < 1.0 / 3.0, ErrorKind::InvalidArgument, "eps must lie in [0, 1/3)");
  require(stage_size > 0, ErrorKind::InvalidArgument, "stage size must be positive");
  const LabeledSampleSet first = source(stage_size);
  const int n = first.n();
  const ChowEstimate chow0 = linear_robust_chow(first, eps, options.filter);
  const double mean = chow0.chi(0);
  const double theta = threshold_from_mean(mean);
  const std::size_t holdout_size = options.holdout > 0 ? options.holdout : stage_size;

  LTFResult res{ConstantHypothesis(n, mean >= 0.0 ? 1.0 : -1.0)};
  res.theta = theta;
  res.branch = "constant";
  if (1.0 - std::abs(ltf_mean(theta)) <= options.c_constant * eps) return res;
  try {
    res.weak = weak_from_chow(chow0);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::ZeroChowVector) throw;
    return res;
  }
  res.candidates.push_back({res.weak->ltf, "weak"});

  const double stat0 = std::sqrt((n + 1.0) / static_cast<double>(chow0.provenance.survivors));
  const double e = std::max(eps, 1e-12);
  double delta = options.c_delta * eps * std::sqrt(std::max(1.0, std::log(1.0 / e))) + stat0;
  res.delta_schedule.push_back(delta);
  const double tail = std::exp(-theta * theta / 2.0);
  const double cutoff = eps > 0.0 ? options.kappa * std::sqrt(std::max(1.0, std::log(1.0 / eps))) / eps
                                  : std::numeric_limits<double>::infinity();
  RefineParams rparams = options.extreme.refine;
  rparams.filter = options.filter;
  rparams.sigma_min =
      std::max(rparams.sigma_min, options.min_accepted_per_dim * (n + 1.0) / (static_cast<double>(stage_size) * tail));

  if (std::abs(theta) * std::exp(theta * theta / 2.0) < cutoff) {
    res.branch = "moderate";
    Vector v = res.weak->ltf.v;
    for (std::size_t i = 0; i < options.max_moderate_iterations; ++i) {
      const LabeledSampleSet batch = source(stage_size);
      RefineResult r;
      try {
        r = refine_moderate(batch, v, theta, delta, eps, derive_seed(seed, 100 + i), rparams);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::AcceptanceTooLow && err.kind() != ErrorKind::ZeroChowVector) throw;
        break;
      }
      ++res.iterations;
      v = r.chow / r.chow.norm();
      res.candidates.push_back({LTF::normalized(v, theta), "moderate-" + std::to_string(i + 1)});
      const double stat = std::sqrt((n + 1.0) * r.sigma * tail / static_cast<double>(stage_size));
      const double next = options.c_delta * eps * std::sqrt(std::max(1.0, std::log(delta / e))) + stat;
      res.delta_schedule.push_back(next);
      if (next >= delta / 2.0) break;
      delta = next;
    }
  } else {
    res.branch = "extreme";
    const LabeledSampleSet batch = source(stage_size);
    ExtremeParams ep = options.extreme;
    ep.refine = rparams;
    const auto found = refine_extreme(batch, res.weak->u, theta, eps, derive_seed(seed, 7), ep);
    res.iterations = found.size();
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (found[i].chow.norm() == 0.0) continue;
      res.candidates.push_back({LTF::normalized(found[i].chow, theta), "extreme-" + std::to_string(i)});
    }
  }

  const LabeledSampleSet holdout = source(holdout_size);
  res.selection = select_hypothesis(res.candidates, holdout);
  res.hypothesis = res.candidates[res.selection.index].hypothesis;
  return res;
}

LTFResult learn_ltf(const LabeledSampleSet& corrupted, double eps, std::uint64_t seed, std::size_t stages,
                    const LTFOptions& options) {
  require(stages >= 3, ErrorKind::InvalidArgument, "the LTF learner needs at least three stages");
  const std::size_t stage = corrupted.size() / stages;
  require(stage > 0, ErrorKind::InvalidArgument, "too few samples for the requested stages");
  LTFOptions opts = options;
  opts.max_moderate_iterations = std::min(opts.max_moderate_iterations, stages - 2);
  opts.holdout = stage;
  return learn_ltf(pool_source(corrupted), stage, eps, seed, opts);
}

}  // namespace rchow
