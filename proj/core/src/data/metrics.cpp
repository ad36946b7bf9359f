#include "tcn/data/metrics.hpp"

#include "tcn/errors.hpp"

namespace tcn::data {

F1Scores micro_macro_f1(std::span<const int> predictions, std::span<const int> ground_truth) {
  if (predictions.empty()) throw UsageError("micro_macro_f1: empty input");
  if (predictions.size() != ground_truth.size()) throw UsageError("micro_macro_f1: length mismatch");
  long tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i], t = ground_truth[i];
    if ((p != 0 && p != 1) || (t != 0 && t != 1)) throw UsageError("micro_macro_f1: labels must be 0/1");
    if (p == t) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  F1Scores s;
  long tp_all = 0, fp_all = 0, fn_all = 0;
  for (int c = 0; c < 2; ++c) {
    const long denom = 2 * tp[c] + fp[c] + fn[c];
    s.macro += denom > 0 ? 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom) : 0.0;
    tp_all += tp[c];
    fp_all += fp[c];
    fn_all += fn[c];
  }
  s.macro /= 2.0;
  s.micro = 2.0 * static_cast<double>(tp_all) / static_cast<double>(2 * tp_all + fp_all + fn_all);
  return s;
}

}  // namespace tcn::data
