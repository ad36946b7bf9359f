#pragma once

#include <span>
#include <vector>

#include "tcn/nn/tensor.hpp"

namespace tcn::svm {

using nn::Matrix;
using nn::Vector;

struct SvmConfig {
  double regularization = 1.0;
  int epochs = 200;
};

struct LinearSvmModel {
  Vector weights;
  double bias = 0.0;
  double regularization = 1.0;
  /// Objective after each epoch (index 0 is the starting point w = 0, b = 0).
  std::vector<double> objective_history;
};

/// (lambda/2)|w|^2 + mean_i max(0, 1 - y_i (w.x_i + b)); the bias is not regularized.
double svm_objective(const Matrix& features, std::span<const int> labels, const Vector& weights, double bias,
                     double regularization);

/// Full-batch subgradient descent with the Pegasos step size 1/(lambda t).
/// A step is only taken if it lowers the objective (the step is halved until
/// it does, or skipped), so the objective history is non-increasing.
/// Labels are +1/-1 and both classes must be present.
LinearSvmModel fit_svm(const Matrix& features, std::span<const int> labels, const SvmConfig& config = {});

/// sign(w.x + b) per row; an exact 0 maps to +1.
std::vector<int> predict_svm(const LinearSvmModel& model, const Matrix& features);

}  // namespace tcn::svm
