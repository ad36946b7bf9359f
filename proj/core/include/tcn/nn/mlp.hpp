#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcn/nn/tensor.hpp"

namespace tcn::nn {

enum class Activation { kIdentity, kRelu };

struct DenseLayer {
  Matrix weights;  // out_dim x in_dim
  Vector bias;     // out_dim

  DenseLayer(int in_dim, int out_dim);
  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }
};

struct BatchNormLayer {
  Vector gamma;
  Vector beta;
  Vector running_mean;
  Vector running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;

  explicit BatchNormLayer(int dim);
};

/// One dense -> [batchnorm] -> activation block.
struct LayerSpec {
  int out_dim = 0;
  bool batch_norm = false;
  Activation activation = Activation::kIdentity;
};

/// Everything the backward pass needs from one forward evaluation.
struct MlpTape {
  struct Block {
    Matrix input;
    Matrix linear;      // X W^T + b
    Matrix normalized;  // xhat (batch norm blocks only)
    Vector mean;        // statistics actually used for normalization
    Vector var;
    bool batch_statistics = false;
    Matrix output;
  };
  std::vector<Block> blocks;
  bool recorded = false;
};

/// Gradient buffers shape-congruent with an Mlp's parameters.
struct MlpGradients {
  struct Block {
    Matrix weights;
    Vector bias;
    Vector gamma;
    Vector beta;
  };
  std::vector<Block> blocks;

  void set_zero();
  /// Flat views in the same order as Mlp::parameters().
  std::vector<std::span<const double>> views() const;
  bool all_finite() const;
  MlpGradients& operator+=(const MlpGradients& other);
  MlpGradients& operator*=(double scale);
};

/// Fully connected network built from LayerSpec blocks.
///
/// forward() is const: batch statistics are recorded in the tape and only
/// folded into the running averages by update_running_stats(), so a network
/// evaluated in train mode but not being optimized stays bit-identical.
class Mlp {
 public:
  struct Block {
    DenseLayer dense;
    std::optional<BatchNormLayer> norm;
    Activation activation = Activation::kIdentity;
  };

  Mlp() = default;
  Mlp(std::string name, int in_dim, const std::vector<LayerSpec>& specs);

  /// Uniform He (fan-in) weights, zero biases, unit gamma, zero beta.
  void initialize(Rng& rng);

  Matrix forward(const Matrix& input, Mode mode, MlpTape* tape = nullptr) const;

  /// Accumulates parameter gradients into `grads` and returns dLoss/dInput.
  Matrix backward(const MlpTape& tape, const Matrix& grad_output, MlpGradients& grads) const;

  void update_running_stats(const MlpTape& tape);

  std::vector<ParameterView> parameters();
  MlpGradients make_gradients() const;

  /// Zeroes weights and bias of the last dense layer (uniform logits).
  void zero_output_layer();
  /// Zeroes every weight and bias.
  void zero_all();

  const std::string& name() const { return name_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const;
  std::vector<Block>& blocks() { return blocks_; }
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  std::string name_;
  int in_dim_ = 0;
  std::vector<Block> blocks_;
};

}  // namespace tcn::nn
