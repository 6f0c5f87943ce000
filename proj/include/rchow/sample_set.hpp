#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rchow/types.hpp"

namespace rchow {

/// Points in R^n with labels in [-1, 1]. The corruption mask exists only in
/// synthetic runs and is never read by a learner.
struct LabeledSampleSet {
  PointMatrix points;
  Vector labels;
  std::optional<std::vector<bool>> corrupted;

  LabeledSampleSet() = default;
  LabeledSampleSet(PointMatrix pts, Vector lbls, std::optional<std::vector<bool>> mask = std::nullopt);

  std::size_t size() const { return static_cast<std::size_t>(labels.size()); }
  bool empty() const { return size() == 0; }
  int n() const { return static_cast<int>(points.cols()); }
  auto point(std::size_t i) const { return points.row(static_cast<Eigen::Index>(i)).transpose(); }
  double label(std::size_t i) const { return labels(static_cast<Eigen::Index>(i)); }
  bool is_corrupted(std::size_t i) const { return corrupted && (*corrupted)[i]; }
  std::size_t corrupted_count() const;

  /// Rows at the given positions, in the given order.
  LabeledSampleSet subset(const std::vector<std::size_t>& rows) const;
  /// Rows [begin, end).
  LabeledSampleSet slice(std::size_t begin, std::size_t end) const;

  /// Throws unless shapes agree and every label is finite with |label| <= 1.
  void validate() const;
};

/// Header x1..xn,y[,corrupted]; one row per sample.
void write_samples_csv(const LabeledSampleSet& s, const std::string& path);
LabeledSampleSet read_samples_csv(const std::string& path);

/// Supplies fresh batches of (possibly corrupted) labeled samples on demand.
/// Each call advances the source; batches never overlap.
using SampleSource = std::function<LabeledSampleSet(std::size_t count)>;

/// Serves consecutive disjoint slices of a fixed pool; throws once exhausted.
SampleSource pool_source(LabeledSampleSet pool);

}  // namespace rchow
