#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tcn/model/consensus_model.hpp"

namespace tcn::training {

enum class Variant { kTcn, kTcnEmbed, kTcnSvm, kTcnAe, kCn };

std::string_view variant_name(Variant v);
/// Accepts "TCN", "TCN-embed", "TCN-svm", "TCN-AE", "CN" (case-insensitive).
/// Throws ConfigError otherwise.
Variant parse_variant(std::string_view name);

struct TrainingConfig {
  Variant variant = Variant::kTcn;
  int batch_size = 10;
  double learning_rate = 1e-3;
  /// Learning rate for the classifier network only; defaults to learning_rate.
  std::optional<double> classifier_learning_rate;
  /// Main-cycle steps per attempt. 0 returns the initialized model untouched.
  int max_steps = 100;
  int pretrain_max_steps = 20;
  double convergence_delta = 1e-5;
  double restart_threshold = std::log(2.0);
  int max_restarts = 10;
  std::uint64_t seed = 0;
  /// Std-dev of the Gaussian perturbation fed to reconstructors.
  double noise_scale = 0.1;
  ArchitectureConfig arch;
  bool noise_reparam = false;
  /// Linear SVM regularization for TCN-svm.
  double svm_regularization = 1.0;
  int svm_epochs = 200;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  double classifier_lr() const { return classifier_learning_rate.value_or(learning_rate); }
};

bool has_pretraining(Variant v);
bool has_main_cycle(Variant v);
bool uses_reconstruction(Variant v);

}  // namespace tcn::training
