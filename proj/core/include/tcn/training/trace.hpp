#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcn/data/metrics.hpp"
#include "tcn/training/config.hpp"

namespace tcn::training {

enum class Phase { kPretrain, kMain };

enum class StopReason {
  kConverged,
  kMaxSteps,
  kRestartedThenConverged,
  kRestartedThenMaxSteps,
  kRestartsExhausted,
};

std::string_view phase_name(Phase p);
std::string_view stop_reason_name(StopReason r);

/// Metrics evaluated after one executed step. Losses are eval-mode means:
/// classification over X_L, discrimination over the rows the variant trains
/// on, reconstruction over the same rows without perturbation.
struct StepRecord {
  int step = 0;      // global, strictly increasing across restarts
  int attempt = 0;   // 0 for the first run, k after the k-th restart
  Phase phase = Phase::kMain;
  double classification_loss = 0.0;
  double discrimination_loss = 0.0;
  std::optional<double> reconstruction_loss;
  double similarity = 0.0;
  std::vector<double> pair_divergences;  // similarity_pair_columns() order
  std::optional<data::F1Scores> f1;
  int restart_count = 0;
  bool converged = false;      // convergence test fired after this step
  bool restart_after = false;  // a restart followed this step
};

struct TrainingTrace {
  int num_modalities = 0;
  std::vector<StepRecord> steps;
  StopReason stop_reason = StopReason::kMaxSteps;
  int restart_count = 0;

  bool failed() const { return stop_reason == StopReason::kRestartsExhausted; }
  const StepRecord* last() const { return steps.empty() ? nullptr : &steps.back(); }
};

/// One row per step: step,attempt,phase,L_C,L_D,L_R,similarity,micro_f1,
/// macro_f1,restart_count,converged. Absent values are empty cells.
void write_trace_csv(const TrainingTrace& trace, std::ostream& out);
/// step,overall,d_1_2,... one row per step.
void write_similarity_csv(const TrainingTrace& trace, std::ostream& out);
/// Final metrics, stop reason, restart count and the config echo.
std::string trace_summary_json(const TrainingTrace& trace, const TrainingConfig& config);
/// Config echo as a single-line JSON object.
std::string config_json(const TrainingConfig& config);

}  // namespace tcn::training
