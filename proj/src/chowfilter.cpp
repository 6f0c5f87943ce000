#include "rchow/chowfilter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rchow/error.hpp"
#include "rchow/numeric.hpp"

namespace rchow {

namespace {

constexpr std::size_t kBlock = 4096;

struct Workspace {
  PointMatrix z;                    // whitened monomial vectors, one per row
  std::vector<std::size_t> origin;  // input row of each z row
};

ReasonableDistribution working_distribution(const ReasonableDistribution& dist, const FilterParams& params) {
  require(params.c_break > 0.0, ErrorKind::InvalidArgument, "c_break must be positive");
  require(params.max_iterations >= 1, ErrorKind::InvalidArgument, "iteration cap must be at least 1");
  if (params.eps && *params.eps != dist.eps()) return dist.at_eps(*params.eps);
  return dist;
}

/// Whitened features of the selected rows; when keep is non-null, also
/// reports which rows pass the prune test.
PointMatrix whitened_rows(const PointMatrix& points, const std::vector<std::size_t>& rows,
                          const ReasonableDistribution& dist, std::vector<char>* keep) {
  const MonomialBasis& basis = dist.basis();
  const MomentGeometry& geo = dist.geometry();
  const Matrix& w = geo.whitener();
  const Matrix& null = geo.null_basis();
  const auto ell = static_cast<Eigen::Index>(basis.size());
  const auto r = static_cast<Eigen::Index>(geo.rank());
  const double radius2 = 0.5 * dist.t_max() * dist.t_max();
  const std::size_t count = rows.size();
  PointMatrix z(static_cast<Eigen::Index>(count), r);
  if (keep) keep->assign(count, 1);
  const std::size_t blocks = (count + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t begin = b * kBlock;
    const std::size_t end = std::min(count, begin + kBlock);
    PointMatrix f(static_cast<Eigen::Index>(end - begin), ell);
    for (std::size_t i = begin; i < end; ++i) {
      basis.eval_into(points.row(static_cast<Eigen::Index>(rows[i])).transpose(),
                      f.row(static_cast<Eigen::Index>(i - begin)).transpose());
    }
    z.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)).noalias() =
        f * w.transpose();
    if (!keep || !dist.prune_enabled()) return;
    for (std::size_t i = begin; i < end; ++i) {
      const auto li = static_cast<Eigen::Index>(i - begin);
      bool ok = z.row(static_cast<Eigen::Index>(i)).squaredNorm() < radius2;
      if (ok && null.cols() > 0) {
        const double scale = std::max(1.0, f.row(li).norm());
        ok = (f.row(li) * null).norm() <= 1e-6 * scale;
      }
      (*keep)[i] = ok ? 1 : 0;
    }
  });
  return z;
}

Matrix second_moment(const PointMatrix& z) {
  const auto r = z.cols();
  const auto count = static_cast<std::size_t>(z.rows());
  Matrix sum = block_reduce(
      count, kBlock,
      [&](std::size_t begin, std::size_t end) {
        const auto blk = z.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
        Matrix part = Matrix::Zero(r, r);
        part.selfadjointView<Eigen::Lower>().rankUpdate(blk.transpose());
        return part;
      },
      Matrix(Matrix::Zero(r, r)));
  Matrix full = sum.selfadjointView<Eigen::Lower>();
  return full / static_cast<double>(count);
}

void keep_rows(Workspace& ws, const std::vector<char>& keep) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < ws.origin.size(); ++i) {
    if (!keep[i]) continue;
    if (out != i) {
      ws.z.row(static_cast<Eigen::Index>(out)) = ws.z.row(static_cast<Eigen::Index>(i));
      ws.origin[out] = ws.origin[i];
    }
    ++out;
  }
  ws.z.conservativeResize(static_cast<Eigen::Index>(out), Eigen::NoChange);
  ws.origin.resize(out);
}

FilterIterationResult iterate(Workspace& ws, const ReasonableDistribution& dist, const FilterParams& params,
                              double break_threshold, std::vector<std::size_t>* removed) {
  FilterIterationResult res;
  res.break_threshold = break_threshold;
  const auto r = ws.z.cols();
  const std::size_t count = ws.origin.size();
  Matrix m = second_moment(ws.z);
  m -= Matrix::Identity(r, r);
  EigenPair top = top_eigenpair(m, params.dense_limit);
  res.lambda_star = top.value;
  res.direction = top.vector;
  if (top.value <= break_threshold) {
    res.outcome = FilterOutcome::Converged;
    return res;
  }

  const Vector p = ws.z * top.vector;
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(p(static_cast<Eigen::Index>(a))) > std::abs(p(static_cast<Eigen::Index>(b)));
  });
  const double eps = dist.eps();
  const double tmax2 = dist.t_max() * dist.t_max();
  const double total = static_cast<double>(count);
  std::size_t cut = 0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < count;) {
    const double t = std::abs(p(static_cast<Eigen::Index>(order[j])));
    std::size_t end = j + 1;
    while (end < count && std::abs(p(static_cast<Eigen::Index>(order[end]))) >= t) ++end;
    if (t > 0.0 && static_cast<double>(end) / total >= 4.0 * dist.tail()(t) + 3.0 * eps / tmax2) {
      cut = end;
      threshold = t;
      break;
    }
    j = end;
  }
  if (cut == 0) {
    res.outcome = FilterOutcome::NoThreshold;
    return res;
  }
  std::vector<char> keep(count, 1);
  for (std::size_t j = 0; j < cut; ++j) {
    keep[order[j]] = 0;
    if (removed) removed->push_back(ws.origin[order[j]]);
  }
  keep_rows(ws, keep);
  res.outcome = FilterOutcome::Filtered;
  res.threshold = threshold;
  res.removed = cut;
  return res;
}

double break_level(const ReasonableDistribution& dist, const FilterParams& params, std::size_t samples) {
  const double tol =
      params.eigen_tol ? *params.eigen_tol : default_eigen_tol(dist.basis().size(), samples, dist.d());
  return params.c_break * (dist.gamma() + dist.delta() + dist.eps()) + tol;
}

std::vector<std::size_t> all_rows(std::size_t count) {
  std::vector<std::size_t> rows(count);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

double default_eigen_tol(std::size_t ell, std::size_t samples, int d) {
  if (samples == 0) return 0.0;
  return 4.0 * d * std::sqrt(static_cast<double>(ell) / static_cast<double>(samples));
}

double ChowEstimate::apply(const Polynomial& p) const {
  require(p.basis().same_as(*basis), ErrorKind::BasisMismatch, "polynomial basis differs from the estimate's");
  return p.coeffs().dot(chi);
}

std::vector<std::size_t> prune_indices(const PointMatrix& points, const ReasonableDistribution& dist) {
  require(points.cols() == dist.n(), ErrorKind::DimensionMismatch, "point dimension does not match distribution");
  const std::vector<std::size_t> rows = all_rows(static_cast<std::size_t>(points.rows()));
  if (!dist.prune_enabled()) return rows;
  std::vector<char> keep;
  whitened_rows(points, rows, dist, &keep);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

LabeledSampleSet prune(const LabeledSampleSet& s, const ReasonableDistribution& dist) {
  const auto kept = prune_indices(s.points, dist);
  require(!kept.empty() || s.empty(), ErrorKind::AllPointsPruned, "every point was pruned");
  return s.subset(kept);
}

FilterIterationResult filter_iteration(LabeledSampleSet& s, const ReasonableDistribution& dist,
                                       const FilterParams& params) {
  require(!s.empty(), ErrorKind::InvalidArgument, "filter_iteration needs a non-empty sample");
  const ReasonableDistribution work = working_distribution(dist, params);
  Workspace ws;
  ws.origin = all_rows(s.size());
  ws.z = whitened_rows(s.points, ws.origin, work, nullptr);
  std::vector<std::size_t> removed;
  FilterIterationResult res = iterate(ws, work, params, break_level(work, params, s.size()), &removed);
  if (res.outcome == FilterOutcome::Filtered) s = s.subset(ws.origin);
  return res;
}

FilterRun filter_points(const PointMatrix& points, const ReasonableDistribution& dist, const FilterParams& params) {
  require(points.cols() == dist.n(), ErrorKind::DimensionMismatch, "point dimension does not match distribution");
  const ReasonableDistribution work = working_distribution(dist, params);
  FilterRun run;
  Workspace ws;
  ws.origin = all_rows(static_cast<std::size_t>(points.rows()));
  std::vector<char> keep;
  ws.z = whitened_rows(points, ws.origin, work, &keep);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) run.pruned.push_back(i);
  }
  keep_rows(ws, keep);
  require(!ws.origin.empty(), ErrorKind::AllPointsPruned, "every point was pruned");

  Provenance& prov = run.provenance;
  prov.samples_in = static_cast<std::size_t>(points.rows());
  prov.pruned = run.pruned.size();
  prov.break_threshold = break_level(work, params, ws.origin.size());
  while (true) {
    if (prov.iterations >= params.max_iterations) {
      prov.cap_reached = true;
      break;
    }
    FilterIterationResult res = iterate(ws, work, params, prov.break_threshold, &run.removed);
    ++prov.iterations;
    prov.final_lambda = res.lambda_star;
    const FilterOutcome outcome = res.outcome;
    run.iterations.push_back(std::move(res));
    if (outcome == FilterOutcome::Converged) {
      prov.converged = true;
      break;
    }
    if (outcome == FilterOutcome::NoThreshold) {
      prov.no_threshold = true;
      break;
    }
    if (ws.origin.empty()) fail(ErrorKind::AllPointsPruned, "the filter removed every point");
  }
  prov.removed_by_filter = run.removed.size();
  run.survivors = ws.origin;
  std::sort(run.survivors.begin(), run.survivors.end());
  prov.survivors = run.survivors.size();
  return run;
}

Vector mean_label_moments(const PointMatrix& points, const Vector& labels, const MonomialBasis& basis,
                          const std::vector<std::size_t>* rows) {
  require(points.rows() == labels.size(), ErrorKind::DimensionMismatch, "points and labels differ in length");
  const std::size_t count = rows ? rows->size() : static_cast<std::size_t>(points.rows());
  const auto ell = static_cast<Eigen::Index>(basis.size());
  require(count > 0, ErrorKind::InvalidArgument, "no samples to average");
  Vector sum = block_reduce(
      count, kBlock,
      [&](std::size_t begin, std::size_t end) {
        Vector part = Vector::Zero(ell);
        Vector buf(ell);
        for (std::size_t i = begin; i < end; ++i) {
          const auto row = static_cast<Eigen::Index>(rows ? (*rows)[i] : i);
          basis.eval_into(points.row(row).transpose(), buf);
          part += labels(row) * buf;
        }
        return part;
      },
      Vector(Vector::Zero(ell)));
  return sum / static_cast<double>(count);
}

ChowEstimate chow_from_run(const FilterRun& run, const PointMatrix& points, const Vector& labels,
                           const ReasonableDistribution& dist) {
  ChowEstimate est;
  est.basis = dist.basis_ptr();
  est.geometry = dist.geometry_ptr();
  est.chi = mean_label_moments(points, labels, dist.basis(), &run.survivors);
  est.provenance = run.provenance;
  return est;
}

ChowEstimate robust_chow(const LabeledSampleSet& corrupted, const ReasonableDistribution& dist,
                         const FilterParams& params) {
  require(!corrupted.empty(), ErrorKind::InvalidArgument, "robust_chow needs samples");
  const FilterRun run = filter_points(corrupted.points, dist, params);
  return chow_from_run(run, corrupted.points, corrupted.labels, dist);
}

ChowEstimate empirical_chow(const LabeledSampleSet& s, const ReasonableDistribution& dist) {
  require(!s.empty(), ErrorKind::InvalidArgument, "empirical_chow needs samples");
  ChowEstimate est;
  est.basis = dist.basis_ptr();
  est.geometry = dist.geometry_ptr();
  est.chi = mean_label_moments(s.points, s.labels, dist.basis(), nullptr);
  est.provenance.samples_in = s.size();
  est.provenance.survivors = s.size();
  est.provenance.filtered = false;
  return est;
}

double chow_distance(const ChowEstimate& a, const ChowEstimate& b) {
  require(a.basis && b.basis && a.basis->same_as(*b.basis), ErrorKind::BasisMismatch, "Chow estimates use different bases");
  require(a.geometry && b.geometry, ErrorKind::BasisMismatch, "Chow estimate without moment geometry");
  if (a.geometry != b.geometry) {
    require(a.geometry->sigma().rows() == b.geometry->sigma().rows() &&
                (a.geometry->sigma() - b.geometry->sigma()).cwiseAbs().maxCoeff() <= 1e-12,
            ErrorKind::BasisMismatch, "Chow estimates use different moment matrices");
  }
  return a.geometry->whiten(a.chi - b.chi).norm();
}

ChowEstimate make_chow(const ReasonableDistribution& dist, Vector chi) {
  require(static_cast<std::size_t>(chi.size()) == dist.basis().size(), ErrorKind::DimensionMismatch,
          "Chow vector length does not match basis");
  ChowEstimate est;
  est.basis = dist.basis_ptr();
  est.geometry = dist.geometry_ptr();
  est.chi = std::move(chi);
  est.provenance.filtered = false;
  return est;
}

}  // namespace rchow
