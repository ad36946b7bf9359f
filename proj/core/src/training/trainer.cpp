#include "tcn/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tcn/errors.hpp"
#include "tcn/similarity.hpp"

namespace tcn::training {

namespace {

// RNG stream ids derived from an attempt seed.
constexpr std::uint64_t kNoiseStream = 11;
constexpr std::uint64_t kReconstructionStream = 12;
constexpr std::uint64_t kEvalNoiseStream = 13;
constexpr std::uint64_t kShuffleStream = 100;

enum EpochStream { kStreamI = 0, kStreamD = 1, kStreamCI = 2, kStreamRI = 3 };

void descend(nn::Adam& opt, nn::Mlp& net, nn::MlpGradients& grads) {
  const auto params = net.parameters();
  const auto views = grads.views();
  opt.step(params, views);
}

std::vector<nn::Adam> adams(std::size_t count, double lr) {
  return std::vector<nn::Adam>(count, nn::Adam(nn::AdamConfig{lr}));
}

}  // namespace

OptimizerStates OptimizerStates::create(const ConsensusModel& model, const TrainingConfig& config) {
  const auto m = static_cast<std::size_t>(model.num_modalities());
  const double lr = config.learning_rate;
  OptimizerStates s;
  s.interpreter_adversarial = adams(m, lr);
  s.discriminator = nn::Adam(nn::AdamConfig{lr});
  s.interpreter_classification = adams(m, lr);
  s.classifier = nn::Adam(nn::AdamConfig{config.classifier_lr()});
  s.interpreter_reconstruction = adams(m, lr);
  s.reconstructors = adams(model.reconstructors().size(), lr);
  return s;
}

double update_interpreters_adversarial(ConsensusModel& model, const ModalityBatch& batch, Rng& noise_rng,
                                       OptimizerStates& opt) {
  auto ev = discrimination_loss(model, batch, noise_rng, {Mode::kTrain, ParameterGroup::kInterpreters});
  for (int k = 0; k < model.num_modalities(); ++k) {
    ev.gradients.interpreters[k] *= -1.0;  // ascend L_D
    descend(opt.interpreter_adversarial[k], model.interpreters()[k], ev.gradients.interpreters[k]);
  }
  apply_running_stats(model, ev.tapes, ParameterGroup::kInterpreters);
  return ev.value;
}

double update_discriminator(ConsensusModel& model, const ModalityBatch& batch, Rng& noise_rng,
                            OptimizerStates& opt) {
  auto ev = discrimination_loss(model, batch, noise_rng, {Mode::kTrain, ParameterGroup::kDiscriminator});
  descend(opt.discriminator, model.discriminator(), ev.gradients.discriminator);
  apply_running_stats(model, ev.tapes, ParameterGroup::kDiscriminator);
  return ev.value;
}

double update_classification(ConsensusModel& model, const ModalityBatch& batch, std::span<const int> labels,
                             OptimizerStates& opt) {
  const auto groups = ParameterGroup::kInterpreters | ParameterGroup::kClassifier;
  auto ev = classification_loss(model, batch, labels, {Mode::kTrain, groups});
  for (int k = 0; k < model.num_modalities(); ++k)
    descend(opt.interpreter_classification[k], model.interpreters()[k], ev.gradients.interpreters[k]);
  descend(opt.classifier, model.classifier(), ev.gradients.classifier);
  apply_running_stats(model, ev.tapes, groups);
  return ev.value;
}

double update_reconstruction(ConsensusModel& model, const ModalityBatch& batch, double noise_scale,
                             Rng& noise_rng, OptimizerStates& opt) {
  const auto groups = ParameterGroup::kInterpreters | ParameterGroup::kReconstructors;
  auto ev = reconstruction_loss(model, batch, noise_scale, noise_rng, {Mode::kTrain, groups});
  for (int k = 0; k < model.num_modalities(); ++k) {
    descend(opt.interpreter_reconstruction[k], model.interpreters()[k], ev.gradients.interpreters[k]);
    descend(opt.reconstructors[k], model.reconstructors()[k], ev.gradients.reconstructors[k]);
  }
  apply_running_stats(model, ev.tapes, groups);
  return ev.value;
}

std::vector<std::vector<std::size_t>> minibatches(std::span<const std::size_t> rows, int batch_size,
                                                  std::uint64_t seed) {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  std::vector<std::size_t> order(rows.begin(), rows.end());
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < order.size(); start += bs)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + bs)));
  return out;
}

TrainingSession::TrainingSession(ConsensusModel& model, const data::MultimodalDataset& dataset,
                                 const TrainingConfig& config, std::uint64_t attempt_seed)
    : model_(model),
      dataset_(dataset),
      config_(config),
      seed_(attempt_seed),
      opt_(OptimizerStates::create(model, config)),
      labeled_rows_(dataset.labeled_indices()),
      noise_rng_(nn::mix_seed(attempt_seed, kNoiseStream)),
      recon_rng_(nn::mix_seed(attempt_seed, kReconstructionStream)) {
  unsupervised_rows_ = config.variant == Variant::kCn ? labeled_rows_ : dataset.all_indices();
  labels_.assign(dataset.size(), -1);
  for (auto r : labeled_rows_) labels_[r] = dataset.label(r);
}

std::uint64_t TrainingSession::next_epoch_seed(int stream) {
  const auto epoch = static_cast<std::uint64_t>(epochs_[static_cast<std::size_t>(stream)]++);
  return nn::mix_seed(nn::mix_seed(seed_, kShuffleStream + static_cast<std::uint64_t>(stream)), epoch);
}

double TrainingSession::step_interpreters() {
  if (unsupervised_rows_.empty()) throw UsageError("adversarial step needs at least one row");
  double total = 0.0;
  const auto batches = minibatches(unsupervised_rows_, config_.batch_size, next_epoch_seed(kStreamI));
  for (const auto& rows : batches)
    total += update_interpreters_adversarial(model_, dataset_.gather(rows), noise_rng_, opt_);
  return total / static_cast<double>(batches.size());
}

double TrainingSession::step_discriminator() {
  if (unsupervised_rows_.empty()) throw UsageError("adversarial step needs at least one row");
  double total = 0.0;
  const auto batches = minibatches(unsupervised_rows_, config_.batch_size, next_epoch_seed(kStreamD));
  for (const auto& rows : batches) total += update_discriminator(model_, dataset_.gather(rows), noise_rng_, opt_);
  return total / static_cast<double>(batches.size());
}

double TrainingSession::step_classification() {
  if (labeled_rows_.empty()) throw UsageError("classification step needs a non-empty labeled set");
  double total = 0.0;
  const auto batches = minibatches(labeled_rows_, config_.batch_size, next_epoch_seed(kStreamCI));
  for (const auto& rows : batches) {
    std::vector<int> y;
    y.reserve(rows.size());
    for (auto r : rows) y.push_back(labels_[r]);
    total += update_classification(model_, dataset_.gather(rows), y, opt_);
  }
  return total / static_cast<double>(batches.size());
}

double TrainingSession::step_reconstruction() {
  if (unsupervised_rows_.empty()) throw UsageError("reconstruction step needs at least one row");
  double total = 0.0;
  const auto batches = minibatches(unsupervised_rows_, config_.batch_size, next_epoch_seed(kStreamRI));
  for (const auto& rows : batches)
    total += update_reconstruction(model_, dataset_.gather(rows), config_.noise_scale, recon_rng_, opt_);
  return total / static_cast<double>(batches.size());
}

Evaluator ground_truth_evaluator(const data::MultimodalDataset& dataset) {
  const auto* ds = &dataset;
  return [ds](std::span<const std::size_t> rows, std::span<const int> predicted) -> std::optional<data::F1Scores> {
    if (rows.empty()) return std::nullopt;
    std::vector<int> truth;
    truth.reserve(rows.size());
    for (auto r : rows) {
      const auto y = ds->ground_truth(r);
      if (!y) return std::nullopt;
      truth.push_back(*y);
    }
    return data::micro_macro_f1(predicted, truth);
  };
}

ConsensusModel make_model(const data::MultimodalDataset& dataset, const TrainingConfig& config) {
  config.validate();
  ModelConfig mc;
  mc.modality_dims = dataset.modality_dims();
  mc.arch = config.arch;
  mc.with_reconstructors = uses_reconstruction(config.variant);
  mc.noise_reparam = config.noise_reparam;
  return ConsensusModel(mc, config.seed);
}

std::vector<int> predict_labels(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                                std::span<const std::size_t> rows) {
  if (rows.empty()) return {};
  const Matrix p = predict_batch(model, dataset.gather(rows));
  std::vector<int> out(rows.size());
  for (Eigen::Index i = 0; i < p.rows(); ++i) out[static_cast<std::size_t>(i)] = p(i, 1) > p(i, 0) ? 1 : 0;
  return out;
}

std::vector<int> predict_labels(const ConsensusModel& model, const svm::LinearSvmModel& svm,
                                const data::MultimodalDataset& dataset, std::span<const std::size_t> rows) {
  if (rows.empty()) return {};
  const auto signs = svm::predict_svm(svm, concatenated_representations(model, dataset.gather(rows)));
  std::vector<int> out(signs.size());
  std::transform(signs.begin(), signs.end(), out.begin(), [](int s) { return s > 0 ? 1 : 0; });
  return out;
}

namespace {

struct SvmFit {
  svm::LinearSvmModel model;
  double objective = 0.0;
};

SvmFit fit_svm_head(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                    const TrainingConfig& config) {
  const auto rows = dataset.labeled_indices();
  if (rows.empty()) throw UsageError("TCN-svm needs a non-empty labeled set");
  const Matrix x = concatenated_representations(model, dataset.gather(rows));
  std::vector<int> y;
  y.reserve(rows.size());
  for (auto r : rows) y.push_back(dataset.label(r) == 1 ? 1 : -1);
  SvmFit fit{svm::fit_svm(x, y, {config.svm_regularization, config.svm_epochs}), 0.0};
  fit.objective = fit.model.objective_history.back();
  return fit;
}

class StepEvaluator {
 public:
  StepEvaluator(const data::MultimodalDataset& dataset, const TrainingConfig& config, const Evaluator& evaluator)
      : dataset_(dataset), config_(config), evaluator_(evaluator) {
    labeled_ = dataset.labeled_indices();
    unlabeled_ = dataset.unlabeled_indices();
    unsupervised_ = config.variant == Variant::kCn ? labeled_ : dataset.all_indices();
    for (auto r : labeled_) labels_.push_back(dataset.label(r));
  }

  StepRecord operator()(const ConsensusModel& model) const {
    StepRecord rec;
    std::optional<SvmFit> svm_head;
    if (config_.variant == Variant::kTcnSvm) {
      // The SVM objective on X_L stands in for the classification loss.
      svm_head = fit_svm_head(model, dataset_, config_);
      rec.classification_loss = svm_head->objective;
    } else {
      rec.classification_loss =
          classification_loss(model, dataset_.gather(labeled_), labels_, {Mode::kEval, ParameterGroup::kNone}).value;
    }
    Rng eval_rng(nn::mix_seed(config_.seed, kEvalNoiseStream));
    const auto rows = dataset_.gather(unsupervised_);
    rec.discrimination_loss = discrimination_loss(model, rows, eval_rng, {Mode::kEval, ParameterGroup::kNone}).value;
    if (model.has_reconstructors())
      rec.reconstruction_loss = reconstruction_loss(model, rows, 0.0, eval_rng, {}).value;

    const auto sim = dataset_similarity(model, dataset_);
    rec.similarity = sim.overall;
    for (const auto& [pair, d] : sim.per_pair) rec.pair_divergences.push_back(d);

    if (evaluator_ && !unlabeled_.empty()) {
      const auto predicted = svm_head ? predict_labels(model, svm_head->model, dataset_, unlabeled_)
                                      : predict_labels(model, dataset_, unlabeled_);
      rec.f1 = evaluator_(unlabeled_, predicted);
    }
    return rec;
  }

 private:
  const data::MultimodalDataset& dataset_;
  const TrainingConfig& config_;
  const Evaluator& evaluator_;
  std::vector<std::size_t> labeled_;
  std::vector<std::size_t> unlabeled_;
  std::vector<std::size_t> unsupervised_;
  std::vector<int> labels_;
};

}  // namespace

svm::LinearSvmModel fit_representation_svm(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                                           const TrainingConfig& config) {
  return fit_svm_head(model, dataset, config).model;
}

TrainingResult train(ConsensusModel& model, const data::MultimodalDataset& dataset, const TrainingConfig& config,
                     const TrainingHooks& hooks) {
  config.validate();
  if (model.config().modality_dims != dataset.modality_dims())
    throw ConfigError("model modality widths do not match the dataset");
  if (uses_reconstruction(config.variant) && !model.has_reconstructors())
    throw ConfigError("TCN-AE needs a model with reconstructors");
  if (dataset.labeled_indices().empty())
    throw UsageError("training needs at least one labeled sample");

  TrainingResult result;
  auto& trace = result.trace;
  trace.num_modalities = model.num_modalities();
  if (hooks.on_init) hooks.on_init(model);
  if (config.max_steps == 0) {
    trace.stop_reason = StopReason::kMaxSteps;
    return result;
  }

  const StepEvaluator evaluate(dataset, config, hooks.evaluator);
  const bool reconstruct = uses_reconstruction(config.variant);
  int step = 0;
  std::uint64_t attempt_seed = config.seed;
  for (;;) {
    TrainingSession session(model, dataset, config, attempt_seed);
    const auto record = [&](Phase phase) -> StepRecord& {
      StepRecord rec = evaluate(model);
      rec.step = step++;
      rec.attempt = trace.restart_count;
      rec.restart_count = trace.restart_count;
      rec.phase = phase;
      trace.steps.push_back(std::move(rec));
      return trace.steps.back();
    };

    bool pretrain_converged = false;
    if (has_pretraining(config.variant)) {
      std::optional<double> previous;
      for (int p = 0; p < config.pretrain_max_steps; ++p) {
        session.step_interpreters();
        session.step_discriminator();
        auto& rec = record(Phase::kPretrain);
        rec.converged = previous && std::abs(rec.discrimination_loss - *previous) < config.convergence_delta;
        previous = rec.discrimination_loss;
        if (rec.converged) {
          pretrain_converged = true;
          break;
        }
      }
    }

    if (!has_main_cycle(config.variant)) {
      result.svm = fit_representation_svm(model, dataset, config);
      trace.stop_reason = pretrain_converged ? StopReason::kConverged : StopReason::kMaxSteps;
      return result;
    }

    bool converged = false;
    std::optional<double> previous;
    for (int s = 0; s < config.max_steps; ++s) {
      session.step_interpreters();
      session.step_discriminator();
      if (reconstruct) session.step_reconstruction();
      session.step_classification();
      auto& rec = record(Phase::kMain);
      rec.converged = previous && std::abs(rec.classification_loss - *previous) < config.convergence_delta;
      previous = rec.classification_loss;
      if (rec.converged) {
        converged = true;
        break;
      }
    }

    if (converged && trace.steps.back().classification_loss > config.restart_threshold) {
      if (trace.restart_count >= config.max_restarts) {
        trace.stop_reason = StopReason::kRestartsExhausted;
        return result;
      }
      trace.steps.back().restart_after = true;
      attempt_seed = config.seed + static_cast<std::uint64_t>(trace.restart_count) + 1;
      ++trace.restart_count;
      model.reinitialize(attempt_seed);
      if (hooks.on_init) hooks.on_init(model);
      continue;
    }

    const bool restarted = trace.restart_count > 0;
    if (converged)
      trace.stop_reason = restarted ? StopReason::kRestartedThenConverged : StopReason::kConverged;
    else
      trace.stop_reason = restarted ? StopReason::kRestartedThenMaxSteps : StopReason::kMaxSteps;
    return result;
  }
}

}  // namespace tcn::training
