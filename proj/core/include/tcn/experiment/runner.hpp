#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tcn/data/dataset.hpp"
#include "tcn/data/metrics.hpp"
#include "tcn/experiment/config.hpp"

namespace tcn::experiment {

struct RunResult {
  Method method;
  std::uint64_t seed = 0;
  std::size_t label_budget = 0;
  bool failed = false;
  std::string error;  // exception text or stop reason for failed runs
  std::optional<data::F1Scores> f1;  // on X_U
  double wall_seconds = 0.0;
  int restart_count = 0;
  std::string stop_reason;
  std::size_t steps = 0;
  /// Relative to the output directory.
  std::filesystem::path run_dir;
  std::filesystem::path trace_csv;
  std::filesystem::path similarity_csv;
};

struct AggregateRow {
  std::string method;
  std::size_t label_budget = 0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  double macro_median = 0.0, macro_q1 = 0.0, macro_q3 = 0.0, macro_mean = 0.0;
  double micro_median = 0.0, micro_q1 = 0.0, micro_q3 = 0.0, micro_mean = 0.0;
};

struct ExperimentReport {
  std::vector<RunResult> runs;  // grid order: method, budget, seed
  std::vector<AggregateRow> aggregate;
  bool all_succeeded() const;
};

/// Loads the configured dataset. Errors carry the path or spec in context.
data::MultimodalDataset load_dataset(const DatasetSpec& spec);

/// Runs one grid cell and writes its artifacts under output_dir/run_dir.
RunResult run_cell(const ExperimentConfig& config, const data::MultimodalDataset& dataset, const Method& method,
                   std::uint64_t seed, std::size_t label_budget);

/// Whole grid on a worker pool, then aggregate.csv, results.csv,
/// similarity_curves.csv, config.txt and manifest.json. Output does not
/// depend on scheduling order.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Median / quartiles (linear interpolation) and mean of successful runs.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

/// Long-format concatenation of every run's trace: variant,seed,budget,
/// step,similarity,L_C,L_D,L_R.
std::string similarity_curves_csv(const ExperimentConfig& config, const std::vector<RunResult>& runs);

/// Rebuilds aggregate.csv, similarity_curves.csv and the manifest from the
/// per-run summaries already on disk. Returns the aggregate rows.
std::vector<AggregateRow> rebuild_report(const std::filesystem::path& output_dir);

/// Lists every regular file under `dir` (except the manifest itself) with
/// its byte size and SHA-256, sorted by relative path.
void write_manifest(const std::filesystem::path& dir);

std::string sha256_hex(const std::filesystem::path& file);

/// One row per (sample, modality): sample_id,modality,v_1..v_rep_dim,
/// eval-mode representations.
void dump_representations(const ConsensusModel& model, const data::MultimodalDataset& dataset, std::ostream& out);

}  // namespace tcn::experiment
