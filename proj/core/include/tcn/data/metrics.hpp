#pragma once

#include <span>

namespace tcn::data {

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

/// Binary micro-F1 (global counts over both classes, i.e. accuracy) and
/// macro-F1 (unweighted mean of the two per-class F1 scores). A class with
/// no true and no predicted members scores 0.
F1Scores micro_macro_f1(std::span<const int> predictions, std::span<const int> ground_truth);

}  // namespace tcn::data
