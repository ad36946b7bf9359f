#include "tcn/training/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "tcn/errors.hpp"

namespace tcn::training {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 5> kVariants{{
    {Variant::kTcn, "TCN"},
    {Variant::kTcnEmbed, "TCN-embed"},
    {Variant::kTcnSvm, "TCN-svm"},
    {Variant::kTcnAe, "TCN-AE"},
    {Variant::kCn, "CN"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& [value, name] : kVariants)
    if (value == v) return name;
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [value, text] : kVariants)
    if (iequals(text, name)) return value;
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

bool has_pretraining(Variant v) { return v == Variant::kTcnEmbed || v == Variant::kTcnSvm; }
bool has_main_cycle(Variant v) { return v != Variant::kTcnSvm; }
bool uses_reconstruction(Variant v) { return v == Variant::kTcnAe; }

void TrainingConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (max_steps < 0) throw ConfigError("max_steps must be non-negative");
  if (pretrain_max_steps < 0) throw ConfigError("pretrain_max_steps must be non-negative");
  if (!(convergence_delta > 0.0)) throw ConfigError("convergence_delta must be positive");
  if (max_restarts < 0) throw ConfigError("max_restarts must be non-negative");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (classifier_learning_rate && !(*classifier_learning_rate >= 0.0))
    throw ConfigError("classifier_learning_rate must be non-negative");
  if (!(noise_scale >= 0.0)) throw ConfigError("noise_scale must be non-negative");
  if (!(svm_regularization > 0.0)) throw ConfigError("svm_regularization must be positive");
  if (arch.rep_dim < 1 || arch.interpreter_hidden < 1 || arch.discriminator_hidden < 1 ||
      arch.classifier_hidden < 1 || arch.reconstructor_hidden < 1)
    throw ConfigError("network widths must be positive");
}

}  // namespace tcn::training
