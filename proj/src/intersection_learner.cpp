#include "rchow/intersection_learner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>

#include "rchow/distributions.hpp"
#include "rchow/error.hpp"
#include "rchow/numeric.hpp"

namespace rchow {

namespace {

using Bits = std::vector<std::uint64_t>;

std::size_t words_for(std::size_t m) { return (m + 63) / 64; }

/// (false negatives, false positives) of prediction a against labels p.
std::pair<std::size_t, std::size_t> confusion(const std::uint64_t* a, const std::uint64_t* p, std::size_t words) {
  std::size_t fn = 0;
  std::size_t fp = 0;
  for (std::size_t w = 0; w < words; ++w) {
    fn += static_cast<std::size_t>(std::popcount(p[w] & ~a[w]));
    fp += static_cast<std::size_t>(std::popcount(a[w] & ~p[w]));
  }
  return {fn, fp};
}

struct Tuple {
  std::vector<std::size_t> members;
  Bits bits;
  double score = 0.0;
};

/// Binomial(n + k - 1, k), saturating.
std::size_t multiset_count(std::size_t n, int k) {
  long double c = 1.0L;
  for (int i = 0; i < k; ++i) {
    c = c * static_cast<long double>(n + static_cast<std::size_t>(i)) / static_cast<long double>(i + 1);
    if (c > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2)) {
      return std::numeric_limits<std::size_t>::max() / 2;
    }
  }
  return static_cast<std::size_t>(std::llround(static_cast<double>(c)));
}

class Refiner {
 public:
  Refiner(const Matrix& z, const Vector& labels) : z_(z), positive_(static_cast<std::size_t>(labels.size())) {
    for (Eigen::Index i = 0; i < labels.size(); ++i) positive_[static_cast<std::size_t>(i)] = labels(i) > 0.0;
  }

  std::size_t error(const std::vector<LTF>& hs) const {
    std::vector<std::vector<char>> cols;
    cols.reserve(hs.size());
    for (const auto& h : hs) cols.push_back(column(h));
    return count(cols);
  }

  /// Coordinate search on every member's direction and threshold with the
  /// step halving from `start` down to `finest`.
  std::vector<LTF> refine(std::vector<LTF> hs, double start, double finest, std::size_t max_sweeps,
                          std::size_t* final_error) const {
    const int dim = hs.empty() ? 0 : hs.front().n();
    std::vector<std::vector<char>> cols;
    for (const auto& h : hs) cols.push_back(column(h));
    std::size_t best = count(cols);
    for (double step = start; step >= finest * 0.999; step *= 0.5) {
      for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool improved = false;
        for (std::size_t j = 0; j < hs.size(); ++j) {
          std::vector<LTF> moves;
          for (int c = 0; c < dim; ++c) {
            for (double s : {step, -step}) {
              Vector v = hs[j].v;
              v(c) += s;
              if (v.norm() > 1e-12) moves.push_back(LTF::normalized(v, hs[j].theta));
            }
          }
          moves.emplace_back(hs[j].v, hs[j].theta + step);
          moves.emplace_back(hs[j].v, hs[j].theta - step);
          for (const auto& mv : moves) {
            std::vector<char> col = column(mv);
            std::swap(cols[j], col);
            const std::size_t e = count(cols);
            if (e < best) {
              best = e;
              hs[j] = mv;
              improved = true;
            } else {
              std::swap(cols[j], col);
            }
          }
        }
        if (!improved) break;
      }
    }
    if (final_error) *final_error = best;
    return hs;
  }

 private:
  std::vector<char> column(const LTF& h) const {
    std::vector<char> col(positive_.size());
    for (std::size_t i = 0; i < col.size(); ++i) {
      col[i] = z_.row(static_cast<Eigen::Index>(i)).dot(h.v) + h.theta >= 0.0 ? 1 : 0;
    }
    return col;
  }

  std::size_t count(const std::vector<std::vector<char>>& cols) const {
    std::size_t e = 0;
    for (std::size_t i = 0; i < positive_.size(); ++i) {
      bool pred = true;
      for (const auto& col : cols) pred = pred && col[i];
      e += pred != positive_[i];
    }
    return e;
  }

  const Matrix& z_;
  std::vector<bool> positive_;
};

}  // namespace

Degree2ChowMatrix build_degree2(const ChowEstimate& chow) {
  const MonomialBasis& basis = *chow.basis;
  require(basis.d() >= 2 && !basis.multilinear(), ErrorKind::BasisMismatch,
          "degree-2 Chow matrix needs a full basis of degree >= 2");
  const int n = basis.n();
  Degree2ChowMatrix out{Vector(n), Matrix(n, n)};
  const double chi0 = chow.chi(0);
  for (int i = 0; i < n; ++i) {
    out.vec1(i) = chow.chi(static_cast<Eigen::Index>(basis.linear_slot(i)));
    for (int j = i; j < n; ++j) {
      MultiIndex a(static_cast<std::size_t>(n), 0);
      ++a[static_cast<std::size_t>(i)];
      ++a[static_cast<std::size_t>(j)];
      const std::ptrdiff_t slot = basis.find(a);
      double value = chow.chi(static_cast<Eigen::Index>(slot));
      if (i == j) value -= chi0;
      out.mat2(i, j) = value;
      out.mat2(j, i) = value;
    }
  }
  return out;
}

Subspace extract_subspace(const Degree2ChowMatrix& d2, int k, double noise_floor) {
  const auto n = d2.vec1.size();
  require(d2.mat2.rows() == n && d2.mat2.cols() == n, ErrorKind::DimensionMismatch, "degree-2 block has wrong shape");
  require(k >= 1, ErrorKind::InvalidArgument, "k must be positive");
  require(noise_floor >= 0.0, ErrorKind::InvalidArgument, "noise floor must be non-negative");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (d2.mat2 + d2.mat2.transpose()));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(solver.eigenvalues()(a)) > std::abs(solver.eigenvalues()(b));
  });

  std::vector<Vector> cols;
  for (int t = 0; t < k && t < static_cast<int>(n); ++t) {
    const Eigen::Index i = order[static_cast<std::size_t>(t)];
    if (std::abs(solver.eigenvalues()(i)) > noise_floor) cols.push_back(solver.eigenvectors().col(i));
  }
  Vector r = d2.vec1;
  for (const auto& c : cols) r -= c.dot(r) * c;
  if (r.norm() > noise_floor) cols.insert(cols.begin(), r / r.norm());

  Matrix b(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = cols[j];
  if (b.cols() > 0) b = orthonormalize_columns(b);
  return {b};
}

double default_noise_floor(double eps, std::size_t ell, std::size_t m) {
  require(m > 0, ErrorKind::InvalidArgument, "sample count must be positive");
  double corruption = 0.0;
  if (eps > 0.0) corruption = eps * std::sqrt(2.0 * std::max(1.0, std::log(1.0 / eps)));
  return corruption + 3.0 * std::sqrt(static_cast<double>(ell) / static_cast<double>(m));
}

LTF HalfspaceNet::member(std::size_t i) const {
  require(i < size(), ErrorKind::InvalidArgument, "net index out of range");
  return {directions[i / thresholds.size()], thresholds[i % thresholds.size()]};
}

LTF HalfspaceNet::nearest(const LTF& h) const {
  require(h.n() == dim, ErrorKind::DimensionMismatch, "halfspace dimension does not match net");
  std::size_t best = 0;
  double best_dot = -2.0;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const double d = directions[i].dot(h.v);
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  const auto t = std::min_element(thresholds.begin(), thresholds.end(), [&](double a, double b) {
    return std::abs(a - h.theta) < std::abs(b - h.theta);
  });
  return {directions[best], *t};
}

HalfspaceNet make_halfspace_net(int dim, double resolution, double bound) {
  require(dim >= 1, ErrorKind::InvalidArgument, "net dimension must be positive");
  require(resolution > 0.0 && std::isfinite(resolution), ErrorKind::InvalidArgument, "resolution must be positive");
  require(bound >= 0.0 && std::isfinite(bound), ErrorKind::InvalidArgument, "threshold bound must be finite");
  HalfspaceNet net;
  net.dim = dim;
  if (dim == 1) {
    net.directions = {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};
  } else if (dim == 2) {
    const auto count = static_cast<std::size_t>(std::ceil(2.0 * kPi / resolution));
    for (std::size_t j = 0; j < count; ++j) {
      const double a = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(count);
      Vector v(2);
      v << std::cos(a), std::sin(a);
      net.directions.push_back(v);
    }
  } else {
    // Grid on the faces of [-1, 1]^dim, projected to the sphere.
    const double h = 2.0 * resolution / std::sqrt(static_cast<double>(dim - 1));
    const auto g = static_cast<std::size_t>(std::ceil(2.0 / h)) + 1;
    std::size_t total = 1;
    for (int t = 0; t < dim - 1; ++t) {
      total *= g;
      require(total <= 10000000, ErrorKind::CoverTooLarge, "direction net too large");
    }
    for (int axis = 0; axis < dim; ++axis) {
      for (double sign : {1.0, -1.0}) {
        for (std::size_t idx = 0; idx < total; ++idx) {
          Vector v(dim);
          std::size_t rest = idx;
          bool duplicate = false;
          for (int c = 0; c < dim; ++c) {
            if (c == axis) {
              v(c) = sign;
              continue;
            }
            const double value = -1.0 + 2.0 * static_cast<double>(rest % g) / static_cast<double>(g - 1);
            rest /= g;
            v(c) = value;
            if (std::abs(value) == 1.0 && c < axis) duplicate = true;
          }
          if (!duplicate) net.directions.push_back(v / v.norm());
        }
      }
    }
  }
  const auto steps = static_cast<std::size_t>(std::ceil(bound / resolution));
  if (steps == 0) {
    net.thresholds = {0.0};
  } else {
    for (std::size_t i = 0; i <= 2 * steps; ++i) {
      net.thresholds.push_back(-bound + bound * static_cast<double>(i) / static_cast<double>(steps));
    }
  }
  return net;
}

HalfspaceNet cover_net(int k, int dim, double delta) {
  require(k >= 1, ErrorKind::InvalidArgument, "k must be positive");
  require(delta > 0.0 && delta < 1.0, ErrorKind::InvalidArgument, "delta must lie in (0, 1)");
  const double resolution = delta / (4.0 * k);
  return make_halfspace_net(dim, resolution, normal_quantile(1.0 - delta / (8.0 * k)));
}

std::size_t cover_size(int k, int dim, double delta) {
  return multiset_count(cover_net(k, dim, delta).size(), k) + 2;
}

std::vector<Intersection> make_cover(int k, int dim, double delta, std::size_t cap) {
  const HalfspaceNet net = cover_net(k, dim, delta);
  const std::size_t total = multiset_count(net.size(), k) + 2;
  require(total <= cap, ErrorKind::CoverTooLarge,
          "cover has " + std::to_string(total) + " members, above the cap of " + std::to_string(cap));
  std::vector<Intersection> out;
  out.reserve(total);
  out.emplace_back(std::vector<LTF>{}, dim);
  const LTF first = net.member(0);
  out.emplace_back(std::vector<LTF>{first, first.negated()}, dim);
  std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
  while (true) {
    std::vector<LTF> members;
    members.reserve(idx.size());
    for (std::size_t i : idx) members.push_back(net.member(i));
    out.emplace_back(std::move(members), dim);
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] + 1 == net.size()) --pos;
    if (pos < 0) break;
    const std::size_t next = idx[static_cast<std::size_t>(pos)] + 1;
    for (int p = pos; p < k; ++p) idx[static_cast<std::size_t>(p)] = next;
  }
  return out;
}

double default_cover_delta(double eps, int k, double c) {
  require(k >= 1, ErrorKind::InvalidArgument, "k must be positive");
  if (eps <= 0.0) return 0.05;
  const double rate = c * std::pow(eps, 1.0 / 11.0) * std::pow(static_cast<double>(k), 4.0 / 11.0) *
                      std::pow(std::log(static_cast<double>(k) / eps), 3.0 / 11.0);
  return std::clamp(rate, 0.05, 0.5);
}

IntersectionResult learn_intersection(const LabeledSampleSet& chow_batch, const LabeledSampleSet& selection_batch,
                                      int k, double eps, const IntersectionOptions& options) {
  require(k >= 1, ErrorKind::InvalidArgument, "k must be positive");
  require(!chow_batch.empty(), ErrorKind::InvalidArgument, "empty Chow batch");
  require(!selection_batch.empty(), ErrorKind::EmptyHoldout, "empty selection batch");
  require(selection_batch.n() == chow_batch.n(), ErrorKind::DimensionMismatch, "batches differ in dimension");
  const int n = chow_batch.n();

  const ReasonableDistribution dist = make_gaussian(n, 2, eps);
  ChowEstimate chow = robust_chow(chow_batch, dist, options.filter);
  Degree2ChowMatrix d2 = build_degree2(chow);
  const double floor = options.noise_floor
                           ? *options.noise_floor
                           : default_noise_floor(eps, dist.basis().size(),
                                                 std::max<std::size_t>(1, chow.provenance.survivors));
  Subspace sub = extract_subspace(d2, k, floor);
  const double delta = options.delta ? *options.delta : default_cover_delta(eps, k);
  require(delta > 0.0 && delta < 1.0, ErrorKind::InvalidArgument, "delta must lie in (0, 1)");
  const int dim = sub.dim();

  std::vector<Candidate> candidates;
  candidates.push_back({ConstantHypothesis(n, 1.0), "constant+"});
  candidates.push_back({ConstantHypothesis(n, -1.0), "constant-"});
  std::size_t coarse_count = 0;

  if (dim > 0) {
    const Matrix z = selection_batch.points * sub.basis;
    const std::size_t m = selection_batch.size();
    const std::size_t mc = std::min(m, std::max<std::size_t>(64, options.coarse_points));
    const std::size_t words = words_for(mc);
    const double bound = normal_quantile(1.0 - delta / (8.0 * k));
    const HalfspaceNet net = make_halfspace_net(dim, options.coarse_resolution, bound);
    const std::size_t h_count = net.size();
    coarse_count = h_count;

    Bits labels(words, 0);
    for (std::size_t i = 0; i < mc; ++i) {
      if (selection_batch.label(i) > 0.0) labels[i / 64] |= std::uint64_t{1} << (i % 64);
    }
    std::vector<std::uint64_t> table(h_count * words, 0);
    parallel_for(h_count, [&](std::size_t h) {
      const LTF ltf = net.member(h);
      std::uint64_t* row = table.data() + h * words;
      for (std::size_t i = 0; i < mc; ++i) {
        if (z.row(static_cast<Eigen::Index>(i)).dot(ltf.v) + ltf.theta >= 0.0) {
          row[i / 64] |= std::uint64_t{1} << (i % 64);
        }
      }
    });

    // Partial tuples are ranked by k FN + FP, since every member of the
    // target contains all of its positives; full tuples by plain error.
    auto score_of = [&](const std::uint64_t* bits, bool last) {
      const auto [fn, fp] = confusion(bits, labels.data(), words);
      return last ? static_cast<double>(fn + fp) : static_cast<double>(k) * fn + fp;
    };

    std::vector<Tuple> beam;
    for (std::size_t h = 0; h < h_count; ++h) {
      Tuple t;
      t.members = {h};
      t.bits.assign(table.begin() + static_cast<std::ptrdiff_t>(h * words),
                    table.begin() + static_cast<std::ptrdiff_t>((h + 1) * words));
      t.score = score_of(t.bits.data(), k == 1);
      beam.push_back(std::move(t));
    }
    const std::size_t keep_final = 4;
    for (int level = 2; level <= k; ++level) {
      const bool last = level == k;
      std::size_t width = std::max<std::size_t>(1, options.pair_budget / std::max<std::size_t>(1, h_count));
      width = std::min(width, beam.size());
      std::partial_sort(beam.begin(), beam.begin() + static_cast<std::ptrdiff_t>(width), beam.end(),
                        [](const Tuple& a, const Tuple& b) { return a.score < b.score; });
      beam.resize(width);
      const std::size_t per_parent = last ? keep_final : std::max<std::size_t>(1, 64 / width + 1);
      std::vector<std::vector<Tuple>> grown(beam.size());
      parallel_for(beam.size(), [&](std::size_t b) {
        const Tuple& parent = beam[b];
        std::vector<std::pair<double, std::size_t>> scores;
        scores.reserve(h_count);
        Bits tmp(words);
        for (std::size_t h = 0; h < h_count; ++h) {
          const std::uint64_t* row = table.data() + h * words;
          for (std::size_t w = 0; w < words; ++w) tmp[w] = parent.bits[w] & row[w];
          scores.emplace_back(score_of(tmp.data(), last), h);
        }
        const std::size_t top = std::min(per_parent * 4, scores.size());
        std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(top), scores.end());
        for (std::size_t t = 0; t < top; ++t) {
          Tuple child;
          child.members = parent.members;
          child.members.push_back(scores[t].second);
          child.bits.resize(words);
          const std::uint64_t* row = table.data() + scores[t].second * words;
          for (std::size_t w = 0; w < words; ++w) child.bits[w] = parent.bits[w] & row[w];
          child.score = scores[t].first;
          grown[b].push_back(std::move(child));
        }
      });
      beam.clear();
      for (auto& g : grown) {
        for (auto& t : g) beam.push_back(std::move(t));
      }
    }
    std::stable_sort(beam.begin(), beam.end(), [](const Tuple& a, const Tuple& b) { return a.score < b.score; });

    const Refiner refiner(z, selection_batch.labels);
    const double finest = delta / (4.0 * k);
    std::vector<std::vector<std::size_t>> seen;
    for (const Tuple& t : beam) {
      if (seen.size() >= keep_final) break;
      std::vector<std::size_t> key = t.members;
      std::sort(key.begin(), key.end());
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
      seen.push_back(key);
      std::vector<LTF> hs;
      for (std::size_t h : t.members) hs.push_back(net.member(h));
      hs = refiner.refine(std::move(hs), options.coarse_resolution / 2.0, finest, options.max_refine_sweeps, nullptr);
      candidates.push_back({Intersection(std::move(hs), sub.basis), "refined"});
    }
  }

  const Selection sel = select_hypothesis(candidates, selection_batch);
  IntersectionResult out{candidates[sel.index].hypothesis, std::move(sub), std::move(d2), std::move(chow),
                         delta, sel.error, coarse_count};
  return out;
}

IntersectionResult learn_intersection(const LabeledSampleSet& corrupted, int k, double eps,
                                      const IntersectionOptions& options) {
  require(options.chow_fraction > 0.0 && options.chow_fraction < 1.0, ErrorKind::InvalidArgument,
          "chow_fraction must lie in (0, 1)");
  const std::size_t m = corrupted.size();
  const auto split = static_cast<std::size_t>(std::floor(options.chow_fraction * static_cast<double>(m)));
  require(split > 0 && split < m, ErrorKind::InvalidArgument, "too few samples to split");
  return learn_intersection(corrupted.slice(0, split), corrupted.slice(split, m), k, eps, options);
}

double direction_correlation(const LabeledSampleSet& samples, const Vector& v) {
  require(!samples.empty(), ErrorKind::InvalidArgument, "no samples");
  require(v.size() == samples.n(), ErrorKind::DimensionMismatch, "direction has the wrong dimension");
  require(v.norm() > 0.0, ErrorKind::InvalidArgument, "direction is zero");
  const Vector u = v / v.norm();
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples.label(i) <= 0.0) continue;
    const double t = samples.points.row(static_cast<Eigen::Index>(i)).dot(u);
    first += t;
    second += t * t - 1.0;
  }
  const double m = static_cast<double>(samples.size());
  first /= m;
  second /= m * std::sqrt(2.0);
  return std::sqrt(first * first + second * second);
}

double resampling_variation(const Hypothesis& f, const Vector& v, std::size_t count, std::uint64_t seed) {
  require(count > 0, ErrorKind::InvalidArgument, "count must be positive");
  const int n = input_dim(f);
  require(v.size() == n, ErrorKind::DimensionMismatch, "direction has the wrong dimension");
  require(v.norm() > 0.0, ErrorKind::InvalidArgument, "direction is zero");
  const Vector u = v / v.norm();
  std::mt19937_64 rng(mix_seed(seed));
  std::normal_distribution<double> gauss;
  PointMatrix a(static_cast<Eigen::Index>(count), n);
  PointMatrix b(static_cast<Eigen::Index>(count), n);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
    const double fresh = gauss(rng);
    const double along = a.row(i).dot(u);
    b.row(i) = a.row(i) + (fresh - along) * u.transpose();
  }
  const Vector fa = evaluate_rows(f, a);
  const Vector fb = evaluate_rows(f, b);
  std::size_t diff = 0;
  for (Eigen::Index i = 0; i < fa.size(); ++i) diff += (fa(i) > 0.0) != (fb(i) > 0.0);
  return static_cast<double>(diff) / static_cast<double>(count);
}

}  // namespace rchow
