#pragma once

#include <span>

#include "tcn/nn/tensor.hpp"

namespace tcn::nn {

/// Row-wise softmax, shifted by the row max.
Matrix softmax_rows(const Matrix& logits);

/// Mean over rows of -log softmax(logits)[target]. When `grad_logits` is
/// non-null it receives dLoss/dLogits, already divided by the batch size.
double cross_entropy(const Matrix& logits, std::span<const int> targets,
                     Matrix* grad_logits = nullptr);

}  // namespace tcn::nn
