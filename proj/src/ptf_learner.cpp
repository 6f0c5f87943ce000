#include "rchow/ptf_learner.hpp"

#include <cmath>
#include <memory>

#include "rchow/error.hpp"
#include "rchow/numeric.hpp"

namespace rchow {

namespace {

/// Survivor monomial features, kept for repeated relabeling.
struct FeaturePool {
  Matrix features;  // survivors x ell
  Provenance provenance;
};

FeaturePool build_pool(const PointMatrix& points, const ReasonableDistribution& dist, const FilterParams& params) {
  const FilterRun run = filter_points(points, dist, params);
  FeaturePool pool;
  pool.provenance = run.provenance;
  PointMatrix kept(static_cast<Eigen::Index>(run.survivors.size()), points.cols());
  for (std::size_t i = 0; i < run.survivors.size(); ++i) {
    kept.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(run.survivors[i]));
  }
  pool.features = dist.basis().eval_rows(kept);
  return pool;
}

ChowEstimate query(const FeaturePool& pool, const PBF& h, const ReasonableDistribution& dist) {
  require(h.q.basis().same_as(dist.basis()), ErrorKind::BasisMismatch, "hypothesis basis differs from oracle basis");
  require(pool.features.rows() > 0, ErrorKind::OracleFailure, "oracle pool is empty");
  Vector values = pool.features * h.q.coeffs();
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = project_p1(values(i));
  ChowEstimate est;
  est.basis = dist.basis_ptr();
  est.geometry = dist.geometry_ptr();
  est.chi = pool.features.transpose() * values / static_cast<double>(pool.features.rows());
  est.provenance = pool.provenance;
  return est;
}

}  // namespace

ChowOracle pool_oracle(const PointMatrix& points, const ReasonableDistribution& dist, const FilterParams& params) {
  auto pool = std::make_shared<FeaturePool>(build_pool(points, dist, params));
  return [pool, dist](const PBF& h) { return query(*pool, h, dist); };
}

ChowOracle fresh_oracle(SampleSource source, std::size_t batch, const ReasonableDistribution& dist,
                        const FilterParams& params) {
  require(static_cast<bool>(source) && batch > 0, ErrorKind::InvalidArgument, "fresh oracle needs a source and batch");
  return [source, batch, dist, params](const PBF& h) {
    LabeledSampleSet fresh;
    try {
      fresh = source(batch);
    } catch (const Error& e) {
      fail(ErrorKind::OracleFailure, e.what());
    }
    return query(build_pool(fresh.points, dist, params), h, dist);
  };
}

Vector round_to_grid(const Vector& c, double step) {
  require(step > 0.0, ErrorKind::InvalidArgument, "grid step must be positive");
  Vector out(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) out(i) = std::nearbyint(c(i) / step) * step;
  return out;
}

ReconstructResult chow_reconstruct(const ChowEstimate& target, const ReasonableDistribution& dist, double xi,
                                   const ChowOracle& oracle, const ReconstructParams& params) {
  require(xi > 0.0 && xi < 1.0, ErrorKind::InvalidArgument, "xi must lie in (0, 1)");
  require(target.basis && target.basis->same_as(dist.basis()), ErrorKind::BasisMismatch,
          "target and distribution use different bases");
  require(params.c_stop > 0.0, ErrorKind::InvalidArgument, "c_stop must be positive");
  const std::size_t cap =
      params.max_iterations ? *params.max_iterations : static_cast<std::size_t>(4.0 / (xi * xi)) + 16;
  const double step = xi / 2.0;
  const MomentGeometry& geo = dist.geometry();
  // Integer multiples of the grid step, so rounding never accumulates drift.
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dist.basis().size()));
  ReconstructResult out{PBF(Polynomial::zero(dist.basis_ptr()), xi)};
  while (true) {
    const ChowEstimate current = oracle(out.pbf);
    const Vector rho = geo.whiten(target.chi - current.chi);
    out.residual = rho.norm();
    out.residual_history.push_back(out.residual);
    if (out.residual <= params.c_stop * xi) break;
    if (out.iterations >= cap) {
      out.cap_reached = true;
      break;
    }
    const Vector update = geo.coefficients_from_orthonormal(0.5 * rho);
    Eigen::VectorXd delta(update.size());
    for (Eigen::Index i = 0; i < update.size(); ++i) delta(i) = std::nearbyint(update(i) / step);
    if (delta.cwiseAbs().maxCoeff() == 0.0) {
      out.stalled = true;
      break;
    }
    weights += delta;
    out.pbf = PBF(Polynomial(dist.basis_ptr(), weights * step), xi);
    ++out.iterations;
  }
  return out;
}

double default_ptf_xi(std::size_t ell, std::size_t m, double eps) {
  const double noise = m > 0 ? std::sqrt(static_cast<double>(ell) / static_cast<double>(m)) : 1.0;
  return std::min(0.5, std::max(0.01, 0.5 * (noise + eps)));
}

PTFResult learn_ptf(const LabeledSampleSet& corrupted, const ReasonableDistribution& dist, int d, double eps,
                    const PTFOptions& options) {
  require(corrupted.n() == dist.n(), ErrorKind::DimensionMismatch, "sample dimension does not match distribution");
  require(d >= 1, ErrorKind::InvalidArgument, "degree must be at least 1");
  require(dist.name() != "hypercube" || d == 1, ErrorKind::InvalidArgument,
          "hypercube PTF learning is supported for d = 1 only");
  const ReasonableDistribution work = (dist.d() == d ? dist : dist.with_degree(d)).at_eps(eps);
  FilterParams fp = options.filter;
  fp.eps = eps;

  ChowEstimate target = robust_chow(corrupted, work, fp);
  const double xi = options.xi ? *options.xi : default_ptf_xi(work.basis().size(), corrupted.size(), eps);

  ChowOracle oracle;
  if (options.reuse_pool) {
    oracle = pool_oracle(corrupted.points, work, fp);
  } else {
    const std::size_t batch = options.fresh_batch > 0 ? options.fresh_batch : corrupted.size();
    oracle = fresh_oracle(options.fresh_source, batch, work, fp);
  }
  ReconstructResult rec = chow_reconstruct(target, work, xi, oracle, options.reconstruct);

  Polynomial q = rec.pbf.q;
  if (q.coeffs().cwiseAbs().maxCoeff() == 0.0) q.coeffs()(0) = 1.0;
  PBF pbf = rec.pbf;
  return PTFResult{PTF(std::move(q)), std::move(pbf), std::move(target), std::move(rec), xi};
}

}  // namespace rchow
