#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcn/baselines/tri_training.hpp"
#include "tcn/data/bank_marketing.hpp"
#include "tcn/data/synthetic.hpp"
#include "tcn/training/config.hpp"

namespace tcn::experiment {

enum class DatasetKind { kSynthetic, kBankMarketing, kCsv };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kSynthetic;
  std::filesystem::path path;  // bank_marketing and csv
  data::SyntheticSpec synthetic;
  data::BankOptions bank;
};

/// A grid column: a TCN-family variant or the tri-training baseline.
struct Method {
  bool tri_training = false;
  training::Variant variant = training::Variant::kTcn;

  std::string name() const;
  bool operator==(const Method&) const = default;
};

/// Accepts the training variant names and "tri-training". Throws ConfigError.
Method parse_method(std::string_view name);

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<std::size_t> label_budgets;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds;
  training::TrainingConfig training;  // seed and variant are set per cell
  int tri_training_max_rounds = 20;
  baselines::MlpClassifierConfig tri_training_member;
  std::filesystem::path output_dir;
  /// Worker threads; 0 means one per hardware thread.
  int parallelism = 0;

  /// Throws ConfigError for empty grids or invalid training settings.
  void validate() const;
};

/// Parses the key = value format (see README). Lines are `key = value`,
/// `#` starts a comment, keys are dotted (dataset.synthetic.noise,
/// training.max_steps, ...). Lists are comma-separated. Unknown keys are
/// errors. Relative paths resolve against `base_dir`. When output_dir is
/// absent it defaults to $TCN_OUTPUT_ROOT/<config stem> or ./runs/<stem>.
ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir,
                                         const std::string& stem = "experiment");
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Canonical key = value rendering; parses back to an equal config.
std::string render_experiment_config(const ExperimentConfig& config);

}  // namespace tcn::experiment
