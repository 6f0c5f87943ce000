#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "rchow/linalg.hpp"
#include "rchow/polybasis.hpp"
#include "rchow/types.hpp"

namespace rchow {

enum class TailFamily { GaussianChaos, HypercubeChaos, LogConcaveChaos, Custom };

std::string to_string(TailFamily family);
TailFamily parse_tail_family(const std::string& name);

/// Q(T) = min{1, exp(offset - scale * T^power)}.
struct TailConstants {
  double scale = 0.0;
  double offset = 2.0;
};

/// Upper bound Q_d(T) on Pr[|p(X)| >= T] over normalized degree-<=d polynomials.
class TailBound {
 public:
  TailBound() = default;

  static TailBound exponential(TailFamily family, int d, double power, TailConstants constants);
  static TailBound exact_gaussian_linear();
  static TailBound custom(int d, std::function<double(double)> q);

  TailFamily family() const { return family_; }
  int degree() const { return degree_; }
  double power() const { return power_; }
  const TailConstants& constants() const { return constants_; }
  /// exp(-T^2/2) for degree-1 Gaussian; closed forms apply.
  bool is_exact_gaussian() const { return exact_gaussian_; }

  double operator()(double t) const;

 private:
  TailFamily family_ = TailFamily::GaussianChaos;
  int degree_ = 1;
  double power_ = 2.0;
  TailConstants constants_{};
  bool exact_gaussian_ = false;
  std::function<double(double)> custom_;
};

/// Defaults: gaussian/hypercube scale d/(2e) with T^{2/d}; log-concave
/// scale 1/(2e) with T^{1/d}; degree-1 gaussian uses exp(-T^2/2).
TailBound make_tail_bound(TailFamily family, int d, std::optional<TailConstants> constants = std::nullopt);

/// Integral of T * min{eps, Q(T)} over [0, inf).
double compute_delta(const TailBound& tail, double eps);

/// Smallest T >= sqrt(ell) with Q(T / (2 sqrt(ell))) <= eps / (10 ell);
/// exactly sqrt(ell) for the hypercube.
double compute_tmax(const TailBound& tail, double eps, std::size_t ell);

/// Analytic E[m_i m_j] under N(0, I).
Matrix gaussian_moment_matrix(const MonomialBasis& basis);
/// Identity; throws NonMultilinearBasis unless every exponent is <= 1.
Matrix hypercube_moment_matrix(const MonomialBasis& basis);

/// Draws count points in R^n from a stream seeded by seed.
using Sampler = std::function<PointMatrix(std::size_t count, std::uint64_t seed)>;

PointMatrix sample_gaussian(int n, std::size_t count, std::uint64_t seed);
PointMatrix sample_hypercube(int n, std::size_t count, std::uint64_t seed);

struct DistributionOptions {
  std::optional<TailConstants> tail_constants;
  std::size_t size_cap = kDefaultBasisCap;
};

/// Distribution descriptor: moments, tail bound and the constants delta and
/// T_max derived for a working corruption rate. Immutable once built.
class ReasonableDistribution {
 public:
  ReasonableDistribution(std::string name, BasisPtr basis, Matrix sigma, double gamma, TailBound tail,
                         double eps, bool prune_enabled, Sampler sampler);

  const std::string& name() const { return name_; }
  int n() const { return basis_->n(); }
  int d() const { return basis_->d(); }
  const MonomialBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const MomentGeometry& geometry() const { return *geometry_; }
  const std::shared_ptr<const MomentGeometry>& geometry_ptr() const { return geometry_; }
  const Matrix& sigma() const { return geometry_->sigma(); }
  double gamma() const { return gamma_; }
  const TailBound& tail() const { return tail_; }
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  double t_max() const { return t_max_; }
  bool prune_enabled() const { return prune_enabled_; }
  bool has_sampler() const { return static_cast<bool>(sampler_); }
  const Sampler& sampler() const { return sampler_; }

  PointMatrix sample(std::size_t count, std::uint64_t seed) const;

  /// Same distribution with delta and T_max recomputed for another rate.
  ReasonableDistribution at_eps(double eps) const;
  /// Same moments and tail, on a degree-d basis over the same n.
  ReasonableDistribution with_degree(int d) const;

 private:
  std::string name_;
  BasisPtr basis_;
  std::shared_ptr<const MomentGeometry> geometry_;
  double gamma_;
  TailBound tail_;
  double eps_;
  double delta_;
  double t_max_;
  bool prune_enabled_;
  Sampler sampler_;
};

ReasonableDistribution make_gaussian(int n, int d, double eps, const DistributionOptions& options = {});
ReasonableDistribution make_hypercube(int n, int d, double eps, const DistributionOptions& options = {});

/// Wraps a supplied moment table (relative error gamma) with the log-concave
/// tail. Samples come from the optional sampler or from the caller.
ReasonableDistribution log_concave_descriptor(BasisPtr basis, Matrix moment_table, double gamma, double eps,
                                              Sampler sampler = {}, const DistributionOptions& options = {});

/// Loads a row-major CSV matrix (no header).
Matrix load_matrix_csv(const std::string& path);

}  // namespace rchow
