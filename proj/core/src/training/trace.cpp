#include "tcn/training/trace.hpp"

#include <ostream>

#include <json.hpp>

#include "tcn/data/csv.hpp"
#include "tcn/similarity.hpp"

namespace tcn::training {

using data::format_double;

std::string_view phase_name(Phase p) { return p == Phase::kPretrain ? "pretrain" : "main"; }

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::kConverged: return "converged";
    case StopReason::kMaxSteps: return "max_steps";
    case StopReason::kRestartedThenConverged: return "restarted_then_converged";
    case StopReason::kRestartedThenMaxSteps: return "restarted_then_max_steps";
    case StopReason::kRestartsExhausted: return "restarts_exhausted";
  }
  return "unknown";
}

void write_trace_csv(const TrainingTrace& trace, std::ostream& out) {
  out << "step,attempt,phase,L_C,L_D,L_R,similarity,micro_f1,macro_f1,restart_count,converged\n";
  for (const auto& s : trace.steps) {
    out << s.step << ',' << s.attempt << ',' << phase_name(s.phase) << ',' << format_double(s.classification_loss)
        << ',' << format_double(s.discrimination_loss) << ','
        << (s.reconstruction_loss ? format_double(*s.reconstruction_loss) : "") << ','
        << format_double(s.similarity) << ',' << (s.f1 ? format_double(s.f1->micro) : "") << ','
        << (s.f1 ? format_double(s.f1->macro) : "") << ',' << s.restart_count << ',' << (s.converged ? 1 : 0)
        << '\n';
  }
}

void write_similarity_csv(const TrainingTrace& trace, std::ostream& out) {
  out << "step,overall";
  for (const auto& c : similarity_pair_columns(trace.num_modalities)) out << ',' << c;
  out << '\n';
  for (const auto& s : trace.steps) {
    out << s.step << ',' << format_double(s.similarity);
    for (double d : s.pair_divergences) out << ',' << format_double(d);
    out << '\n';
  }
}

namespace {

nlohmann::ordered_json config_object(const TrainingConfig& c) {
  nlohmann::ordered_json j;
  j["variant"] = variant_name(c.variant);
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["classifier_learning_rate"] = c.classifier_lr();
  j["max_steps"] = c.max_steps;
  j["pretrain_max_steps"] = c.pretrain_max_steps;
  j["convergence_delta"] = c.convergence_delta;
  j["restart_threshold"] = c.restart_threshold;
  j["max_restarts"] = c.max_restarts;
  j["seed"] = c.seed;
  j["noise_scale"] = c.noise_scale;
  j["noise_reparam"] = c.noise_reparam;
  j["svm_regularization"] = c.svm_regularization;
  j["svm_epochs"] = c.svm_epochs;
  j["arch"] = {{"rep_dim", c.arch.rep_dim},
               {"interpreter_hidden", c.arch.interpreter_hidden},
               {"discriminator_hidden", c.arch.discriminator_hidden},
               {"classifier_hidden", c.arch.classifier_hidden},
               {"reconstructor_hidden", c.arch.reconstructor_hidden}};
  return j;
}

}  // namespace

std::string config_json(const TrainingConfig& config) { return config_object(config).dump(); }

std::string trace_summary_json(const TrainingTrace& trace, const TrainingConfig& config) {
  nlohmann::ordered_json j;
  j["stop_reason"] = stop_reason_name(trace.stop_reason);
  j["failed"] = trace.failed();
  j["restart_count"] = trace.restart_count;
  j["steps"] = trace.steps.size();
  if (const auto* s = trace.last()) {
    j["final"] = {{"step", s->step},
                  {"L_C", s->classification_loss},
                  {"L_D", s->discrimination_loss},
                  {"similarity", s->similarity}};
    if (s->reconstruction_loss) j["final"]["L_R"] = *s->reconstruction_loss;
    if (s->f1) {
      j["final"]["micro_f1"] = s->f1->micro;
      j["final"]["macro_f1"] = s->f1->macro;
    }
  } else {
    j["final"] = nullptr;
  }
  j["config"] = config_object(config);
  return j.dump(2);
}

}  // namespace tcn::training
