#include "tcn/nn/mlp.hpp"

#include <cmath>
#include <sstream>

#include "tcn/errors.hpp"

namespace tcn::nn {

DenseLayer::DenseLayer(int in_dim, int out_dim)
    : weights(Matrix::Zero(out_dim, in_dim)), bias(Vector::Zero(out_dim)) {}

BatchNormLayer::BatchNormLayer(int dim)
    : gamma(Vector::Ones(dim)),
      beta(Vector::Zero(dim)),
      running_mean(Vector::Zero(dim)),
      running_var(Vector::Ones(dim)) {}

void MlpGradients::set_zero() {
  for (auto& b : blocks) {
    b.weights.setZero();
    b.bias.setZero();
    b.gamma.setZero();
    b.beta.setZero();
  }
}

std::vector<std::span<const double>> MlpGradients::views() const {
  std::vector<std::span<const double>> out;
  for (const auto& b : blocks) {
    out.push_back(flat(b.weights));
    out.push_back(flat(b.bias));
    if (b.gamma.size() > 0) {
      out.push_back(flat(b.gamma));
      out.push_back(flat(b.beta));
    }
  }
  return out;
}

bool MlpGradients::all_finite() const {
  for (const auto& b : blocks) {
    if (!b.weights.allFinite() || !b.bias.allFinite() || !b.gamma.allFinite() ||
        !b.beta.allFinite()) {
      return false;
    }
  }
  return true;
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& other) {
  if (other.blocks.size() != blocks.size()) throw ConfigError("gradient shape mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks[i].weights += other.blocks[i].weights;
    blocks[i].bias += other.blocks[i].bias;
    blocks[i].gamma += other.blocks[i].gamma;
    blocks[i].beta += other.blocks[i].beta;
  }
  return *this;
}

MlpGradients& MlpGradients::operator*=(double scale) {
  for (auto& b : blocks) {
    b.weights *= scale;
    b.bias *= scale;
    b.gamma *= scale;
    b.beta *= scale;
  }
  return *this;
}

Mlp::Mlp(std::string name, int in_dim, const std::vector<LayerSpec>& specs)
    : name_(std::move(name)), in_dim_(in_dim) {
  if (in_dim <= 0) throw ConfigError(name_ + ": input dimension must be positive");
  if (specs.empty()) throw ConfigError(name_ + ": at least one layer required");
  int prev = in_dim;
  for (const auto& s : specs) {
    if (s.out_dim <= 0) throw ConfigError(name_ + ": layer width must be positive");
    Block block{DenseLayer(prev, s.out_dim), std::nullopt, s.activation};
    if (s.batch_norm) block.norm.emplace(s.out_dim);
    blocks_.push_back(std::move(block));
    prev = s.out_dim;
  }
}

int Mlp::out_dim() const { return blocks_.empty() ? 0 : blocks_.back().dense.out_dim(); }

void Mlp::initialize(Rng& rng) {
  for (auto& b : blocks_) {
    const double bound = std::sqrt(6.0 / b.dense.in_dim());
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index c = 0; c < b.dense.weights.cols(); ++c)
      for (Eigen::Index r = 0; r < b.dense.weights.rows(); ++r) b.dense.weights(r, c) = dist(rng);
    b.dense.bias.setZero();
    if (b.norm) *b.norm = BatchNormLayer(b.dense.out_dim());
  }
}

Matrix Mlp::forward(const Matrix& input, Mode mode, MlpTape* tape) const {
  if (input.cols() != in_dim_) {
    std::ostringstream msg;
    msg << name_ << ": expected " << in_dim_ << " input columns, got " << input.cols();
    throw ConfigError(msg.str());
  }
  if (input.rows() < 1) throw ConfigError(name_ + ": empty batch");
  if (!input.allFinite()) throw NumericError(name_ + ": non-finite input");

  if (tape) {
    tape->blocks.clear();
    tape->blocks.reserve(blocks_.size());
  }
  const Eigen::Index n = input.rows();
  Matrix x = input;
  for (const auto& b : blocks_) {
    MlpTape::Block rec;
    Matrix z = x * b.dense.weights.transpose();
    z.rowwise() += b.dense.bias.transpose();
    Matrix y;
    if (b.norm) {
      const auto& bn = *b.norm;
      // A single-row batch has no variance to normalize by; fall back to running stats.
      const bool batch_stats = mode == Mode::kTrain && n > 1;
      Vector mean, var;
      if (batch_stats) {
        mean = z.colwise().mean().transpose();
        var = (z.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
      } else {
        mean = bn.running_mean;
        var = bn.running_var;
      }
      const Vector inv_std = (var.array() + bn.epsilon).rsqrt().matrix();
      Matrix xhat = (z.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array();
      y = (xhat.array().rowwise() * bn.gamma.transpose().array()).matrix();
      y.rowwise() += bn.beta.transpose();
      if (tape) {
        rec.normalized = std::move(xhat);
        rec.mean = std::move(mean);
        rec.var = std::move(var);
        rec.batch_statistics = batch_stats;
      }
    } else {
      y = z;
    }
    if (b.activation == Activation::kRelu) y = y.cwiseMax(0.0);
    if (tape) {
      rec.input = std::move(x);
      rec.linear = std::move(z);
      rec.output = y;
      tape->blocks.push_back(std::move(rec));
    }
    x = std::move(y);
  }
  if (tape) tape->recorded = true;
  return x;
}

Matrix Mlp::backward(const MlpTape& tape, const Matrix& grad_output, MlpGradients& grads) const {
  if (!tape.recorded || tape.blocks.size() != blocks_.size())
    throw UsageError(name_ + ": backward called without a recorded forward pass");
  if (grads.blocks.size() != blocks_.size())
    throw ConfigError(name_ + ": gradient buffers do not match network");
  const Eigen::Index n = tape.blocks.front().input.rows();
  if (grad_output.rows() != n || grad_output.cols() != out_dim())
    throw ConfigError(name_ + ": upstream gradient shape mismatch");

  Matrix g = grad_output;
  for (std::size_t k = blocks_.size(); k-- > 0;) {
    const auto& b = blocks_[k];
    const auto& rec = tape.blocks[k];
    auto& gb = grads.blocks[k];
    if (b.activation == Activation::kRelu) g = (rec.output.array() > 0.0).select(g, 0.0);
    if (b.norm) {
      const auto& bn = *b.norm;
      gb.gamma += (g.array() * rec.normalized.array()).colwise().sum().transpose().matrix();
      gb.beta += g.colwise().sum().transpose();
      const Vector inv_std = (rec.var.array() + bn.epsilon).rsqrt().matrix();
      Matrix dxhat = g.array().rowwise() * bn.gamma.transpose().array();
      if (rec.batch_statistics) {
        const double nn = static_cast<double>(n);
        const RowVector sum_d = dxhat.colwise().sum();
        const RowVector sum_dx = (dxhat.array() * rec.normalized.array()).colwise().sum();
        Matrix t = (nn * dxhat).rowwise() - sum_d;
        t -= (rec.normalized.array().rowwise() * sum_dx.array()).matrix();
        g = (t.array().rowwise() * (inv_std.transpose().array() / nn)).matrix();
      } else {
        g = (dxhat.array().rowwise() * inv_std.transpose().array()).matrix();
      }
    }
    gb.weights += g.transpose() * rec.input;
    gb.bias += g.colwise().sum().transpose();
    g = g * b.dense.weights;
  }
  return g;
}

void Mlp::update_running_stats(const MlpTape& tape) {
  if (!tape.recorded || tape.blocks.size() != blocks_.size())
    throw UsageError(name_ + ": no recorded forward pass to take statistics from");
  const double n = static_cast<double>(tape.blocks.front().input.rows());
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    auto& b = blocks_[k];
    const auto& rec = tape.blocks[k];
    if (!b.norm || !rec.batch_statistics) continue;
    auto& bn = *b.norm;
    const Vector unbiased = rec.var * (n / (n - 1.0));
    bn.running_mean = (1.0 - bn.momentum) * bn.running_mean + bn.momentum * rec.mean;
    bn.running_var = (1.0 - bn.momentum) * bn.running_var + bn.momentum * unbiased;
  }
}

std::vector<ParameterView> Mlp::parameters() {
  std::vector<ParameterView> out;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    auto& b = blocks_[k];
    const std::string prefix = name_ + ".block" + std::to_string(k);
    out.push_back({prefix + ".weight", flat(b.dense.weights)});
    out.push_back({prefix + ".bias", flat(b.dense.bias)});
    if (b.norm) {
      out.push_back({prefix + ".bn.gamma", flat(b.norm->gamma)});
      out.push_back({prefix + ".bn.beta", flat(b.norm->beta)});
    }
  }
  return out;
}

MlpGradients Mlp::make_gradients() const {
  MlpGradients g;
  for (const auto& b : blocks_) {
    MlpGradients::Block gb;
    gb.weights = Matrix::Zero(b.dense.out_dim(), b.dense.in_dim());
    gb.bias = Vector::Zero(b.dense.out_dim());
    if (b.norm) {
      gb.gamma = Vector::Zero(b.dense.out_dim());
      gb.beta = Vector::Zero(b.dense.out_dim());
    }
    g.blocks.push_back(std::move(gb));
  }
  return g;
}

void Mlp::zero_output_layer() {
  if (blocks_.empty()) return;
  blocks_.back().dense.weights.setZero();
  blocks_.back().dense.bias.setZero();
}

void Mlp::zero_all() {
  for (auto& b : blocks_) {
    b.dense.weights.setZero();
    b.dense.bias.setZero();
  }
}

}  // namespace tcn::nn
