#include "tcn/nn/adam.hpp"

#include <cmath>

#include "tcn/errors.hpp"

namespace tcn::nn {

void Adam::step(std::span<const ParameterView> params,
                std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size()) throw ConfigError("adam: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].values.size() != grads[i].size())
      throw ConfigError("adam: gradient shape mismatch for " + params[i].name);
    for (double g : grads[i])
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient in " + params[i].name);
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Vector::Zero(static_cast<Eigen::Index>(p.values.size())));
      v_.push_back(Vector::Zero(static_cast<Eigen::Index>(p.values.size())));
    }
  } else if (m_.size() != params.size()) {
    throw ConfigError("adam: parameter list changed between steps");
  }

  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto values = params[i].values;
    auto g = grads[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < values.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      m[jj] = config_.beta1 * m[jj] + (1.0 - config_.beta1) * g[j];
      v[jj] = config_.beta2 * v[jj] + (1.0 - config_.beta2) * g[j] * g[j];
      const double m_hat = m[jj] / c1;
      const double v_hat = v[jj] / c2;
      values[j] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Adam::reset() {
  step_count_ = 0;
  m_.clear();
  v_.clear();
}

}  // namespace tcn::nn
