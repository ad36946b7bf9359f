#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tcn/data/dataset.hpp"
#include "tcn/data/metrics.hpp"
#include "tcn/linear_svm.hpp"
#include "tcn/model/consensus_model.hpp"
#include "tcn/nn/adam.hpp"
#include "tcn/training/config.hpp"
#include "tcn/training/trace.hpp"

namespace tcn::training {

/// Separate Adam state for every (step type, network) pair, so e.g. the
/// interpreters' I-step moments never mix with their CI-step moments.
struct OptimizerStates {
  std::vector<nn::Adam> interpreter_adversarial;  // I step
  nn::Adam discriminator;                         // D step
  std::vector<nn::Adam> interpreter_classification;  // CI step
  nn::Adam classifier;                            // CI step
  std::vector<nn::Adam> interpreter_reconstruction;  // RI step
  std::vector<nn::Adam> reconstructors;           // RI step

  static OptimizerStates create(const ConsensusModel& model, const TrainingConfig& config);
};

/// Single-minibatch updates. Each evaluates its loss in train mode, steps
/// only its own networks and folds batch statistics into those networks'
/// running averages only. Return the pre-update loss.
double update_interpreters_adversarial(ConsensusModel& model, const ModalityBatch& batch, Rng& noise_rng,
                                       OptimizerStates& opt);
double update_discriminator(ConsensusModel& model, const ModalityBatch& batch, Rng& noise_rng,
                            OptimizerStates& opt);
double update_classification(ConsensusModel& model, const ModalityBatch& batch, std::span<const int> labels,
                             OptimizerStates& opt);
double update_reconstruction(ConsensusModel& model, const ModalityBatch& batch, double noise_scale,
                             Rng& noise_rng, OptimizerStates& opt);

/// Shuffled minibatch partition of `rows`; the last batch may be short.
std::vector<std::vector<std::size_t>> minibatches(std::span<const std::size_t> rows, int batch_size,
                                                  std::uint64_t seed);

/// Epoch-level steps over a dataset. The session owns the RNG streams and
/// optimizer states of one training attempt.
class TrainingSession {
 public:
  TrainingSession(ConsensusModel& model, const data::MultimodalDataset& dataset, const TrainingConfig& config,
                  std::uint64_t attempt_seed);

  /// One epoch each; return the mean pre-update minibatch loss.
  double step_interpreters();     // I: ascend L_D over interpreters
  double step_discriminator();    // D: descend L_D over D
  double step_classification();   // CI: descend L_C over C and interpreters, X_L only
  double step_reconstruction();   // RI: descend L_R over interpreters and reconstructors

  /// Rows the adversarial and reconstruction steps iterate over.
  const std::vector<std::size_t>& unsupervised_rows() const { return unsupervised_rows_; }
  const std::vector<std::size_t>& labeled_rows() const { return labeled_rows_; }
  OptimizerStates& optimizers() { return opt_; }

 private:
  std::uint64_t next_epoch_seed(int stream);

  ConsensusModel& model_;
  const data::MultimodalDataset& dataset_;
  const TrainingConfig& config_;
  std::uint64_t seed_;
  OptimizerStates opt_;
  std::vector<std::size_t> unsupervised_rows_;
  std::vector<std::size_t> labeled_rows_;
  std::vector<int> labels_;
  Rng noise_rng_;
  Rng recon_rng_;
  std::array<int, 4> epochs_{};
};

/// Scores predictions for unlabeled rows; may return nullopt when no ground
/// truth is available. This is the only place ground truth is read.
using Evaluator =
    std::function<std::optional<data::F1Scores>(std::span<const std::size_t> rows, std::span<const int> predicted)>;

/// Evaluator reading the dataset's hidden ground truth.
Evaluator ground_truth_evaluator(const data::MultimodalDataset& dataset);

struct TrainingHooks {
  /// Runs after the model is (re)initialized, before the attempt's first step.
  std::function<void(ConsensusModel&)> on_init;
  Evaluator evaluator;
};

struct TrainingResult {
  TrainingTrace trace;
  /// TCN-svm only: SVM over concatenated representations of X_L.
  std::optional<svm::LinearSvmModel> svm;
  bool failed() const { return trace.failed(); }
};

/// Model shaped for `dataset` and `config` (reconstructors for TCN-AE),
/// initialized from config.seed.
ConsensusModel make_model(const data::MultimodalDataset& dataset, const TrainingConfig& config);

/// Runs the variant's schedule on `model` in place. Restarts reinitialize
/// the model with seed + restart_count + 1 and fresh optimizer states.
/// Never reads ground truth except through hooks.evaluator.
TrainingResult train(ConsensusModel& model, const data::MultimodalDataset& dataset, const TrainingConfig& config,
                     const TrainingHooks& hooks = {});

/// Labels for `rows` from the classifier network.
std::vector<int> predict_labels(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                                std::span<const std::size_t> rows);
/// Labels for `rows` from an SVM over concatenated representations.
std::vector<int> predict_labels(const ConsensusModel& model, const svm::LinearSvmModel& svm,
                                const data::MultimodalDataset& dataset, std::span<const std::size_t> rows);
/// Fits the TCN-svm head on X_L's concatenated representations.
svm::LinearSvmModel fit_representation_svm(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                                           const TrainingConfig& config);

}  // namespace tcn::training
