#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rchow/hypothesis.hpp"
#include "rchow/sample_set.hpp"

namespace rchow {

struct Candidate {
  Hypothesis hypothesis;
  std::string label;
};

struct Selection {
  std::size_t index = 0;
  double error = 0.0;
  std::vector<double> errors;
};

/// Empirical risk minimization over the holdout; ties go to the lowest index.
/// Throws EmptyHoldout on an empty holdout and InvalidArgument on no candidates.
Selection select_hypothesis(const std::vector<Candidate>& candidates, const LabeledSampleSet& holdout);
Selection select_hypothesis(const std::vector<Hypothesis>& candidates, const LabeledSampleSet& holdout);

}  // namespace rchow
