#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tcn/nn/tensor.hpp"

namespace tcn::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are sized lazily on the first
/// step from the parameter list and must stay congruent afterwards.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config) : config_(config) {}

  /// Descends along `grads`. All gradients are validated before any
  /// parameter is touched; a non-finite entry throws NumericError naming it.
  void step(std::span<const ParameterView> params, std::span<const std::span<const double>> grads);

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Vector>& first_moment() const { return m_; }
  const std::vector<Vector>& second_moment() const { return v_; }
  void reset();

 private:
  AdamConfig config_;
  std::int64_t step_count_ = 0;
  std::vector<Vector> m_;
  std::vector<Vector> v_;
};

}  // namespace tcn::nn
