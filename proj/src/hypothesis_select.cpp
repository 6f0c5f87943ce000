#include "rchow/hypothesis_select.hpp"

#include "rchow/error.hpp"
#include "rchow/numeric.hpp"

namespace rchow {

Selection select_hypothesis(const std::vector<Hypothesis>& candidates, const LabeledSampleSet& holdout) {
  require(!holdout.empty(), ErrorKind::EmptyHoldout, "hypothesis selection needs a non-empty holdout");
  require(!candidates.empty(), ErrorKind::InvalidArgument, "hypothesis selection needs candidates");
  Selection out;
  out.errors.assign(candidates.size(), 0.0);
  parallel_for(candidates.size(), [&](std::size_t i) {
    out.errors[i] = empirical_error(candidates[i], holdout.points, holdout.labels);
  });
  out.index = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (out.errors[i] < out.errors[out.index]) out.index = i;
  }
  out.error = out.errors[out.index];
  return out;
}

Selection select_hypothesis(const std::vector<Candidate>& candidates, const LabeledSampleSet& holdout) {
  std::vector<Hypothesis> hs;
  hs.reserve(candidates.size());
  for (const auto& c : candidates) hs.push_back(c.hypothesis);
  return select_hypothesis(hs, holdout);
}

}  // namespace rchow
