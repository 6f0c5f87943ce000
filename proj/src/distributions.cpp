#include "rchow/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rchow/error.hpp"

namespace rchow {

std::string to_string(TailFamily family) {
  switch (family) {
    case TailFamily::GaussianChaos: return "gaussian-chaos";
    case TailFamily::HypercubeChaos: return "hypercube-chaos";
    case TailFamily::LogConcaveChaos: return "log-concave-chaos";
    case TailFamily::Custom: return "custom";
  }
  return "custom";
}

TailFamily parse_tail_family(const std::string& name) {
  if (name == "gaussian-chaos" || name == "gaussian") return TailFamily::GaussianChaos;
  if (name == "hypercube-chaos" || name == "hypercube") return TailFamily::HypercubeChaos;
  if (name == "log-concave-chaos" || name == "log-concave") return TailFamily::LogConcaveChaos;
  fail(ErrorKind::UnknownFamily, "unknown tail family '" + name + "'");
}

TailBound TailBound::exponential(TailFamily family, int d, double power, TailConstants constants) {
  require(d >= 1, ErrorKind::InvalidArgument, "tail bound degree must be >= 1");
  require(constants.scale > 0.0 && power > 0.0, ErrorKind::InvalidArgument, "tail constants must be positive");
  TailBound out;
  out.family_ = family;
  out.degree_ = d;
  out.power_ = power;
  out.constants_ = constants;
  return out;
}

TailBound TailBound::exact_gaussian_linear() {
  TailBound out = exponential(TailFamily::GaussianChaos, 1, 2.0, {0.5, 0.0});
  out.exact_gaussian_ = true;
  return out;
}

TailBound TailBound::custom(int d, std::function<double(double)> q) {
  require(static_cast<bool>(q), ErrorKind::InvalidArgument, "custom tail needs a function");
  TailBound out;
  out.family_ = TailFamily::Custom;
  out.degree_ = d;
  out.custom_ = std::move(q);
  return out;
}

double TailBound::operator()(double t) const {
  if (t <= 0.0) return 1.0;
  if (family_ == TailFamily::Custom) return std::clamp(custom_(t), 0.0, 1.0);
  const double exponent = constants_.offset - constants_.scale * std::pow(t, power_);
  return std::min(1.0, std::exp(exponent));
}

TailBound make_tail_bound(TailFamily family, int d, std::optional<TailConstants> constants) {
  require(d >= 1, ErrorKind::InvalidArgument, "tail bound degree must be >= 1");
  const double e = std::exp(1.0);
  switch (family) {
    case TailFamily::GaussianChaos:
      if (d == 1 && !constants) return TailBound::exact_gaussian_linear();
      [[fallthrough]];
    case TailFamily::HypercubeChaos:
      return TailBound::exponential(family, d, 2.0 / d, constants.value_or(TailConstants{d / (2.0 * e), 2.0}));
    case TailFamily::LogConcaveChaos:
      return TailBound::exponential(family, d, 1.0 / d, constants.value_or(TailConstants{1.0 / (2.0 * e), 2.0}));
    case TailFamily::Custom:
      break;
  }
  fail(ErrorKind::UnknownFamily, "make_tail_bound cannot build a " + to_string(family) + " tail");
}

namespace {

/// Smallest t with q(t) <= target (q non-increasing), to relative 1e-12.
double crossing_point(const TailBound& q, double target) {
  if (q(0.0) <= target) return 0.0;
  double hi = 1.0;
  while (q(hi) > target) {
    hi *= 2.0;
    require(hi < 1e12, ErrorKind::IntegralDiverges, "tail bound does not decay below the target");
  }
  double lo = hi / 2.0;
  if (q(lo) <= target) lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (q(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

double compute_delta(const TailBound& tail, double eps) {
  require(eps > 0.0 && eps <= 0.5, ErrorKind::InvalidArgument, "compute_delta needs eps in (0, 1/2]");
  if (tail.is_exact_gaussian()) return eps * (1.0 + std::log(1.0 / eps));
  const double t0 = crossing_point(tail, eps);
  const double head = 0.5 * eps * t0 * t0;
  if (tail.family() != TailFamily::Custom) {
    // Upper incomplete gamma closed form of the exponential tail beyond t0.
    const double p = tail.power();
    const double c = tail.constants().scale;
    const double a = tail.constants().offset;
    const double upper = boost::math::tgamma(2.0 / p, c * std::pow(t0, p));
    return head + std::exp(a) / (p * std::pow(c, 2.0 / p)) * upper;
  }
  const double upper_limit = crossing_point(tail, 1e-12);
  if (upper_limit <= t0) return head;
  double error = 0.0;
  const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double t) { return t * tail(t); }, t0, upper_limit, 25, 1e-6, &error);
  require(std::isfinite(body) && error <= 1e-6 * std::max(body, 1e-300) + 1e-15, ErrorKind::IntegralDiverges,
          "quadrature of the tail contribution did not converge");
  return head + body;
}

double compute_tmax(const TailBound& tail, double eps, std::size_t ell) {
  require(eps > 0.0 && eps <= 0.5, ErrorKind::InvalidArgument, "compute_tmax needs eps in (0, 1/2]");
  require(ell >= 1, ErrorKind::InvalidArgument, "compute_tmax needs ell >= 1");
  const double root = std::sqrt(static_cast<double>(ell));
  if (tail.family() == TailFamily::HypercubeChaos) return root;
  const double target = eps / (10.0 * static_cast<double>(ell));
  double t = 0.0;
  if (tail.is_exact_gaussian()) {
    t = std::sqrt(2.0 * std::log(1.0 / target));
  } else {
    t = crossing_point(tail, target);
  }
  return std::max(root, 2.0 * root * t);
}

namespace {

double odd_double_factorial(int k) {
  // (k-1)!! for even k, i.e. E[g^k].
  double out = 1.0;
  for (int j = k - 1; j > 1; j -= 2) out *= j;
  return out;
}

}  // namespace

Matrix gaussian_moment_matrix(const MonomialBasis& basis) {
  const auto ell = static_cast<Eigen::Index>(basis.size());
  Matrix out(ell, ell);
  for (Eigen::Index i = 0; i < ell; ++i) {
    const auto& a = basis.index(static_cast<std::size_t>(i));
    for (Eigen::Index j = i; j < ell; ++j) {
      const auto& b = basis.index(static_cast<std::size_t>(j));
      double value = 1.0;
      for (std::size_t k = 0; k < a.size() && value != 0.0; ++k) {
        const int s = a[k] + b[k];
        value = (s % 2 != 0) ? 0.0 : value * odd_double_factorial(s);
      }
      out(i, j) = value;
      out(j, i) = value;
    }
  }
  return out;
}

Matrix hypercube_moment_matrix(const MonomialBasis& basis) {
  for (const auto& a : basis.indices()) {
    for (int e : a) require(e <= 1, ErrorKind::NonMultilinearBasis, "hypercube moments need a multilinear basis");
  }
  const auto ell = static_cast<Eigen::Index>(basis.size());
  return Matrix::Identity(ell, ell);
}

PointMatrix sample_gaussian(int n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  PointMatrix out(static_cast<Eigen::Index>(count), n);
  double* data = out.data();
  for (Eigen::Index i = 0; i < out.size(); ++i) data[i] = normal(rng);
  return out;
}

PointMatrix sample_hypercube(int n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PointMatrix out(static_cast<Eigen::Index>(count), n);
  double* data = out.data();
  std::uint64_t bits = 0;
  int left = 0;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (left == 0) {
      bits = rng();
      left = 64;
    }
    data[i] = (bits & 1U) ? 1.0 : -1.0;
    bits >>= 1U;
    --left;
  }
  return out;
}

ReasonableDistribution::ReasonableDistribution(std::string name, BasisPtr basis, Matrix sigma, double gamma,
                                               TailBound tail, double eps, bool prune_enabled, Sampler sampler)
    : name_(std::move(name)),
      basis_(std::move(basis)),
      gamma_(gamma),
      tail_(std::move(tail)),
      eps_(eps),
      prune_enabled_(prune_enabled),
      sampler_(std::move(sampler)) {
  require(basis_ != nullptr, ErrorKind::InvalidArgument, "distribution needs a basis");
  require(static_cast<std::size_t>(sigma.rows()) == basis_->size(), ErrorKind::DimensionMismatch,
          "moment matrix size does not match basis");
  require(gamma_ >= 0.0, ErrorKind::InvalidArgument, "gamma must be non-negative");
  require(eps_ >= 0.0 && eps_ <= 0.5, ErrorKind::InvalidArgument, "working eps must lie in [0, 1/2]");
  geometry_ = std::make_shared<const MomentGeometry>(std::move(sigma));
  // eps = 0 keeps a finite prune radius that only rejects absurd points.
  const double tmax_eps = eps_ > 0.0 ? eps_ : 1e-9;
  delta_ = eps_ > 0.0 ? compute_delta(tail_, eps_) : 0.0;
  t_max_ = compute_tmax(tail_, tmax_eps, basis_->size());
  const double root = std::sqrt(static_cast<double>(basis_->size()));
  require(t_max_ >= root, ErrorKind::InvalidArgument, "T_max below sqrt(ell)");
  if (tail_.family() != TailFamily::HypercubeChaos) {
    require(tail_(t_max_ / (2.0 * root)) <= tmax_eps / (10.0 * basis_->size()) * (1.0 + 1e-9),
            ErrorKind::InvalidArgument, "T_max fails the tail condition");
  }
}

PointMatrix ReasonableDistribution::sample(std::size_t count, std::uint64_t seed) const {
  require(has_sampler(), ErrorKind::InvalidArgument, "distribution '" + name_ + "' has no sampler");
  require(count >= 1, ErrorKind::InvalidArgument, "sample count must be >= 1");
  return sampler_(count, seed);
}

ReasonableDistribution ReasonableDistribution::at_eps(double eps) const {
  ReasonableDistribution out = *this;
  require(eps >= 0.0 && eps <= 0.5, ErrorKind::InvalidArgument, "working eps must lie in [0, 1/2]");
  out.eps_ = eps;
  const double tmax_eps = eps > 0.0 ? eps : 1e-9;
  out.delta_ = eps > 0.0 ? compute_delta(tail_, eps) : 0.0;
  out.t_max_ = compute_tmax(tail_, tmax_eps, basis_->size());
  return out;
}

ReasonableDistribution ReasonableDistribution::with_degree(int d) const {
  DistributionOptions options;
  if (tail_.family() != TailFamily::Custom && !tail_.is_exact_gaussian()) {
    // Only carry constants that were overridden away from the defaults.
    const TailBound defaults = make_tail_bound(tail_.family(), tail_.degree());
    if (defaults.constants().scale != tail_.constants().scale ||
        defaults.constants().offset != tail_.constants().offset) {
      options.tail_constants = tail_.constants();
    }
  }
  if (name_ == "gaussian") return make_gaussian(n(), d, eps_, options);
  if (name_ == "hypercube") return make_hypercube(n(), d, eps_, options);
  fail(ErrorKind::InvalidArgument, "distribution '" + name_ + "' cannot change degree without a new moment table");
}

ReasonableDistribution make_gaussian(int n, int d, double eps, const DistributionOptions& options) {
  auto basis = enumerate_basis(n, d, BasisKind::Full, options.size_cap);
  Matrix sigma = gaussian_moment_matrix(*basis);
  auto tail = make_tail_bound(TailFamily::GaussianChaos, d, options.tail_constants);
  Sampler sampler = [n](std::size_t count, std::uint64_t seed) { return sample_gaussian(n, count, seed); };
  return {"gaussian", std::move(basis), std::move(sigma), 0.0, std::move(tail), eps, true, std::move(sampler)};
}

ReasonableDistribution make_hypercube(int n, int d, double eps, const DistributionOptions& options) {
  auto basis = enumerate_basis(n, d, BasisKind::Multilinear, options.size_cap);
  Matrix sigma = hypercube_moment_matrix(*basis);
  auto tail = make_tail_bound(TailFamily::HypercubeChaos, d, options.tail_constants);
  Sampler sampler = [n](std::size_t count, std::uint64_t seed) { return sample_hypercube(n, count, seed); };
  return {"hypercube", std::move(basis), std::move(sigma), 0.0, std::move(tail), eps, false, std::move(sampler)};
}

ReasonableDistribution log_concave_descriptor(BasisPtr basis, Matrix moment_table, double gamma, double eps,
                                              Sampler sampler, const DistributionOptions& options) {
  require(basis != nullptr, ErrorKind::InvalidArgument, "log-concave descriptor needs a basis");
  const int d = basis->d();
  auto tail = make_tail_bound(TailFamily::LogConcaveChaos, d, options.tail_constants);
  return {"log-concave", std::move(basis), std::move(moment_table), gamma, std::move(tail), eps, true,
          std::move(sampler)};
}

Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::IoError, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorKind::IoError, "non-numeric cell '" + cell + "' in '" + path + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::IoError, "empty matrix file '" + path + "'");
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.front().size());
  Matrix out(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    require(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) == c, ErrorKind::IoError,
            "ragged matrix file '" + path + "'");
    for (Eigen::Index j = 0; j < c; ++j) out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace rchow
