#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tcn/data/dataset.hpp"
#include "tcn/nn/mlp.hpp"

namespace tcn::baselines {

/// Binary classifier over a dense feature matrix (labels 0/1).
class BinaryClassifier {
 public:
  virtual ~BinaryClassifier() = default;
  virtual void fit(const Matrix& features, std::span<const int> labels, std::uint64_t seed) = 0;
  virtual std::vector<int> predict(const Matrix& features) const = 0;
};

struct MlpClassifierConfig {
  int hidden = 30;
  int epochs = 50;
  int batch_size = 10;
  double learning_rate = 1e-3;
};

/// Single-hidden-layer perceptron: in -> dense(hidden) -> ReLU -> dense(2),
/// trained with Adam on cross-entropy.
class MlpClassifier : public BinaryClassifier {
 public:
  explicit MlpClassifier(MlpClassifierConfig config = {}) : config_(config) {}
  void fit(const Matrix& features, std::span<const int> labels, std::uint64_t seed) override;
  std::vector<int> predict(const Matrix& features) const override;

 private:
  MlpClassifierConfig config_;
  nn::Mlp net_;
  bool fitted_ = false;
};

using ClassifierFactory = std::function<std::unique_ptr<BinaryClassifier>()>;

struct TriTrainConfig {
  std::uint64_t seed = 0;
  int max_rounds = 20;
  MlpClassifierConfig member;
  /// Overrides member construction; defaults to MlpClassifier(member).
  ClassifierFactory member_factory;
};

struct TriTrainEnsemble {
  std::array<std::unique_ptr<BinaryClassifier>, 3> members;
  /// Modalities each member reads, concatenated in order.
  std::array<std::vector<int>, 3> views;
  bool per_modality_views = false;
};

struct TriTrainRound {
  std::array<std::size_t, 3> candidates{};  // unlabeled rows where the other two agree
  std::array<std::size_t, 3> accepted{};    // pseudo-labels actually used (0 = no update)
  std::array<double, 3> error{};            // joint error of the other two on X_L
};

struct TriTrainResult {
  TriTrainEnsemble ensemble;
  std::vector<TriTrainRound> rounds;
  bool converged = false;  // stopped because no member changed
};

/// Three-member tri-training over X_L and X_U. With three modalities each
/// member sees one modality; otherwise every member sees all features.
/// Members start from bootstrap samples of X_L. A member receives the
/// pseudo-labels its two peers agree on when the usual error-rate
/// condition e|L| < e'|L'| holds (with subsampling as in the original
/// scheme). Unlabeled ground truth is never read.
TriTrainResult tri_train(const data::MultimodalDataset& dataset, const TriTrainConfig& config);

/// Features a member sees for the given rows.
Matrix member_features(const data::MultimodalDataset& dataset, const std::vector<int>& view,
                       std::span<const std::size_t> rows);

/// Majority vote of the three members.
std::vector<int> tri_predict(const TriTrainEnsemble& ensemble, const data::MultimodalDataset& dataset,
                             std::span<const std::size_t> rows);

/// Majority of three 0/1 votes.
inline int majority_vote(int a, int b, int c) { return a + b + c >= 2 ? 1 : 0; }

}  // namespace tcn::baselines
