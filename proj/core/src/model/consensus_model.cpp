#include "tcn/model/consensus_model.hpp"

#include "tcn/errors.hpp"

namespace tcn {

using nn::Activation;
using nn::LayerSpec;

ConsensusModel::ConsensusModel(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  const int m = config_.num_modalities();
  const auto& a = config_.arch;
  if (m < 2) throw ConfigError("consensus model needs at least two modalities");
  if (a.rep_dim <= 0) throw ConfigError("rep_dim must be positive");
  for (int d : config_.modality_dims)
    if (d <= 0) throw ConfigError("modality dimensions must be positive");

  for (int i = 0; i < m; ++i) {
    interpreters_.emplace_back("interpreter" + std::to_string(i + 1), config_.modality_dims[i],
                               std::vector<LayerSpec>{{a.interpreter_hidden, true, Activation::kRelu},
                                                      {a.rep_dim, false, Activation::kRelu}});
  }
  discriminator_ = nn::Mlp("discriminator", a.rep_dim,
                           {{a.discriminator_hidden, true, Activation::kRelu},
                            {m + 1, false, Activation::kIdentity}});
  classifier_ = nn::Mlp("classifier", m * a.rep_dim,
                        {{a.classifier_hidden, true, Activation::kRelu}, {2, false, Activation::kIdentity}});
  if (config_.with_reconstructors) {
    for (int i = 0; i < m; ++i) {
      reconstructors_.emplace_back(
          "reconstructor" + std::to_string(i + 1), a.rep_dim,
          std::vector<LayerSpec>{{a.reconstructor_hidden, true, Activation::kRelu},
                                 {config_.modality_dims[i], false, Activation::kIdentity}});
    }
  }
  reinitialize(seed);
}

std::vector<nn::Mlp*> ConsensusModel::networks() {
  std::vector<nn::Mlp*> out;
  for (auto& n : interpreters_) out.push_back(&n);
  out.push_back(&discriminator_);
  out.push_back(&classifier_);
  for (auto& n : reconstructors_) out.push_back(&n);
  return out;
}

std::vector<const nn::Mlp*> ConsensusModel::networks() const {
  std::vector<const nn::Mlp*> out;
  for (const auto& n : interpreters_) out.push_back(&n);
  out.push_back(&discriminator_);
  out.push_back(&classifier_);
  for (const auto& n : reconstructors_) out.push_back(&n);
  return out;
}

void ConsensusModel::reinitialize(std::uint64_t seed) {
  Rng rng(nn::mix_seed(seed, 0));
  for (auto* net : networks()) net->initialize(rng);
}

ModelGradients ModelGradients::zeros_like(const ConsensusModel& model) {
  ModelGradients g;
  for (const auto& n : model.interpreters()) g.interpreters.push_back(n.make_gradients());
  g.discriminator = model.discriminator().make_gradients();
  g.classifier = model.classifier().make_gradients();
  for (const auto& n : model.reconstructors()) g.reconstructors.push_back(n.make_gradients());
  return g;
}

void apply_running_stats(ConsensusModel& model, const ModelTapes& tapes, ParameterGroup groups) {
  if (has_group(groups, ParameterGroup::kInterpreters)) {
    for (std::size_t i = 0; i < tapes.interpreters.size(); ++i)
      model.interpreters()[i].update_running_stats(tapes.interpreters[i]);
  }
  if (has_group(groups, ParameterGroup::kDiscriminator) && tapes.discriminator.recorded)
    model.discriminator().update_running_stats(tapes.discriminator);
  if (has_group(groups, ParameterGroup::kClassifier) && tapes.classifier.recorded)
    model.classifier().update_running_stats(tapes.classifier);
  if (has_group(groups, ParameterGroup::kReconstructors)) {
    for (std::size_t i = 0; i < tapes.reconstructors.size(); ++i)
      model.reconstructors()[i].update_running_stats(tapes.reconstructors[i]);
  }
}

}  // namespace tcn
