#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tcn/nn/mlp.hpp"

namespace tcn {

using nn::Matrix;
using nn::Mode;
using nn::Rng;
using nn::Vector;

/// Hidden sizes of every network. The defaults are small on purpose: the
/// datasets this targets have a few thousand rows and tens of features.
struct ArchitectureConfig {
  int rep_dim = 16;
  int interpreter_hidden = 64;
  int discriminator_hidden = 32;
  int classifier_hidden = 32;
  int reconstructor_hidden = 64;
};

struct ModelConfig {
  std::vector<int> modality_dims;
  ArchitectureConfig arch;
  bool with_reconstructors = false;
  /// Let gradients flow through the noise modality's mean and variance.
  bool noise_reparam = false;
  double noise_variance_floor = 1e-12;

  int num_modalities() const { return static_cast<int>(modality_dims.size()); }
};

/// One modality's latent vector for one sample. modality_index is 1-based.
struct Representation {
  Vector values;
  int modality_index = 0;
  std::size_t sample_id = 0;
};

struct NoiseRepresentation {
  Vector values;
  Vector mean_source;
  Vector var_source;
};

/// Interpreters I_1..M, discriminator D over M+1 classes (the last one is
/// the noise modality), classifier C over [v_1, ..., v_M], and optional
/// reconstructors R_1..M.
class ConsensusModel {
 public:
  ConsensusModel(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  int num_modalities() const { return config_.num_modalities(); }
  int rep_dim() const { return config_.arch.rep_dim; }
  bool has_reconstructors() const { return !reconstructors_.empty(); }
  int noise_class() const { return num_modalities(); }  // 0-based index of class M+1

  std::vector<nn::Mlp>& interpreters() { return interpreters_; }
  const std::vector<nn::Mlp>& interpreters() const { return interpreters_; }
  nn::Mlp& discriminator() { return discriminator_; }
  const nn::Mlp& discriminator() const { return discriminator_; }
  nn::Mlp& classifier() { return classifier_; }
  const nn::Mlp& classifier() const { return classifier_; }
  std::vector<nn::Mlp>& reconstructors() { return reconstructors_; }
  const std::vector<nn::Mlp>& reconstructors() const { return reconstructors_; }

  /// Every network, interpreters first, then D, C, reconstructors.
  std::vector<nn::Mlp*> networks();
  std::vector<const nn::Mlp*> networks() const;

  void reinitialize(std::uint64_t seed);

 private:
  ModelConfig config_;
  std::vector<nn::Mlp> interpreters_;
  nn::Mlp discriminator_;
  nn::Mlp classifier_;
  std::vector<nn::Mlp> reconstructors_;
};

/// Row-aligned per-modality feature blocks for one minibatch.
using ModalityBatch = std::vector<Matrix>;

enum class ParameterGroup : unsigned {
  kNone = 0,
  kInterpreters = 1u << 0,
  kDiscriminator = 1u << 1,
  kClassifier = 1u << 2,
  kReconstructors = 1u << 3,
};
constexpr ParameterGroup operator|(ParameterGroup a, ParameterGroup b) {
  return static_cast<ParameterGroup>(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr bool has_group(ParameterGroup set, ParameterGroup g) {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(g)) != 0;
}

struct ModelGradients {
  std::vector<nn::MlpGradients> interpreters;
  nn::MlpGradients discriminator;
  nn::MlpGradients classifier;
  std::vector<nn::MlpGradients> reconstructors;

  static ModelGradients zeros_like(const ConsensusModel& model);
};

struct ModelTapes {
  std::vector<nn::MlpTape> interpreters;
  nn::MlpTape discriminator;
  nn::MlpTape classifier;
  std::vector<nn::MlpTape> reconstructors;
};

struct LossRequest {
  Mode mode = Mode::kEval;
  /// Networks whose parameter gradients should be computed.
  ParameterGroup gradients = ParameterGroup::kNone;
};

struct LossEvaluation {
  double value = 0.0;
  ModelGradients gradients;  // sized like the model when gradients were requested
  ModelTapes tapes;          // forward records, for running-statistic updates
};

/// Overrides for the noise modality draw. `standard_draws` replaces the
/// N(0,1) variates (noise = mu + sigma * z); `values` replaces the noise
/// representation outright and is treated as a constant.
struct NoiseOverride {
  const Matrix* standard_draws = nullptr;
  const Matrix* values = nullptr;
};

/// Representations of a single sample, one per modality.
std::vector<Representation> interpret(const ConsensusModel& model,
                                      std::span<const Vector> sample_blocks, Mode mode = Mode::kEval,
                                      std::size_t sample_id = 0);

/// Batched interpreters; element m is (batch x rep_dim).
std::vector<Matrix> interpret_batch(const ConsensusModel& model, const ModalityBatch& batch,
                                    Mode mode, std::vector<nn::MlpTape>* tapes = nullptr);

NoiseRepresentation sample_noise_modality(std::span<const Representation> reps, Rng& rng,
                                          double variance_floor = 1e-12);

/// L_D: mean over samples and the M+1 (modality, noise) instances of the
/// discriminator's cross-entropy against the originating modality.
LossEvaluation discrimination_loss(const ConsensusModel& model, const ModalityBatch& batch,
                                   Rng& rng, const LossRequest& request,
                                   const NoiseOverride& noise = {});

/// L_C: mean cross-entropy of the classifier on labeled rows. Labels must be 0/1.
LossEvaluation classification_loss(const ConsensusModel& model, const ModalityBatch& batch,
                                   std::span<const int> labels, const LossRequest& request);

/// L_R: mean over samples and modalities of |R_m(v_m + eps) - x_m|^2,
/// eps ~ N(0, noise_scale^2).
LossEvaluation reconstruction_loss(const ConsensusModel& model, const ModalityBatch& batch,
                                   double noise_scale, Rng& rng, const LossRequest& request);

/// Class probabilities (p0, p1) for one sample.
std::array<double, 2> predict(const ConsensusModel& model, std::span<const Vector> sample_blocks);

/// Class probabilities, one row per sample.
Matrix predict_batch(const ConsensusModel& model, const ModalityBatch& batch);

/// Concatenation [v_1, ..., v_M] in modality order, eval mode.
Matrix concatenated_representations(const ConsensusModel& model, const ModalityBatch& batch);

/// Folds batch statistics recorded in `tapes` into the running averages of
/// the networks in `groups`.
void apply_running_stats(ConsensusModel& model, const ModelTapes& tapes, ParameterGroup groups);

}  // namespace tcn
