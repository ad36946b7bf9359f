#include "tcn/nn/loss.hpp"

#include <cmath>
#include <string>

#include "tcn/errors.hpp"

namespace tcn::nn {

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

double cross_entropy(const Matrix& logits, std::span<const int> targets, Matrix* grad_logits) {
  const Eigen::Index n = logits.rows();
  const Eigen::Index k = logits.cols();
  if (k < 2) throw ConfigError("cross_entropy: need at least two classes");
  if (n < 1 || static_cast<std::size_t>(n) != targets.size())
    throw ConfigError("cross_entropy: target count does not match batch");
  if (!logits.allFinite()) throw NumericError("cross_entropy: non-finite logits");

  double total = 0.0;
  if (grad_logits) grad_logits->resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= k) throw ConfigError("cross_entropy: target index " + std::to_string(t) + " out of range");
    const double mx = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) sum += std::exp(logits(i, j) - mx);
    const double log_z = mx + std::log(sum);
    total += log_z - logits(i, t);
    if (grad_logits) {
      for (Eigen::Index j = 0; j < k; ++j) (*grad_logits)(i, j) = std::exp(logits(i, j) - log_z);
      (*grad_logits)(i, t) -= 1.0;
    }
  }
  if (grad_logits) *grad_logits /= static_cast<double>(n);
  return total / static_cast<double>(n);
}

}  // namespace tcn::nn
