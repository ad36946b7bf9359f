#include "tcn/experiment/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <openssl/evp.h>

#include "tcn/baselines/tri_training.hpp"
#include "tcn/data/bank_marketing.hpp"
#include "tcn/data/csv.hpp"
#include "tcn/data/synthetic.hpp"
#include "tcn/errors.hpp"
#include "tcn/model/checkpoint.hpp"
#include "tcn/training/trainer.hpp"

namespace tcn::experiment {

namespace fs = std::filesystem;
using data::format_double;
using json = nlohmann::ordered_json;

bool ExperimentReport::all_succeeded() const {
  return std::none_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.failed; });
}

data::MultimodalDataset load_dataset(const DatasetSpec& spec) {
  try {
    switch (spec.kind) {
      case DatasetKind::kSynthetic: return data::generate_synthetic(spec.synthetic);
      case DatasetKind::kBankMarketing: return data::load_bank_marketing(spec.path, spec.bank);
      case DatasetKind::kCsv: return data::read_multimodal_csv(spec.path);
    }
  } catch (const std::exception& e) {
    const std::string source = spec.kind == DatasetKind::kSynthetic ? "synthetic generator" : spec.path.string();
    throw DatasetError("loading dataset from " + source + ": " + e.what());
  }
  throw DatasetError("unknown dataset kind");
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path cell_dir(const Method& method, std::uint64_t seed, std::size_t budget) {
  return fs::path("runs") / (method.name() + "_b" + std::to_string(budget) + "_s" + std::to_string(seed));
}

std::string tri_trace_csv(const baselines::TriTrainResult& result) {
  std::ostringstream out;
  out << "round";
  for (const char* col : {"candidates", "accepted", "error"})
    for (int i = 1; i <= 3; ++i) out << ',' << col << '_' << i;
  out << '\n';
  for (std::size_t r = 0; r < result.rounds.size(); ++r) {
    const auto& round = result.rounds[r];
    out << r;
    for (auto c : round.candidates) out << ',' << c;
    for (auto a : round.accepted) out << ',' << a;
    for (auto e : round.error) out << ',' << format_double(e);
    out << '\n';
  }
  return out.str();
}

json f1_json(const std::optional<data::F1Scores>& f1, bool micro) {
  if (!f1) return nullptr;
  return micro ? f1->micro : f1->macro;
}

void write_summary(const fs::path& dir, const RunResult& r, const json& details) {
  json j;
  j["method"] = r.method.name();
  j["seed"] = r.seed;
  j["label_budget"] = r.label_budget;
  j["failed"] = r.failed;
  j["error"] = r.error;
  j["micro_f1"] = f1_json(r.f1, true);
  j["macro_f1"] = f1_json(r.f1, false);
  j["restart_count"] = r.restart_count;
  j["stop_reason"] = r.stop_reason;
  j["steps"] = r.steps;
  j["wall_seconds"] = r.wall_seconds;
  j["trace_csv"] = r.trace_csv.generic_string();
  j["similarity_csv"] = r.similarity_csv.empty() ? json(nullptr) : json(r.similarity_csv.generic_string());
  j["details"] = details;
  write_text(dir / "summary.json", j.dump(2) + "\n");
}

RunResult summary_from_json(const json& j, const fs::path& run_dir) {
  RunResult r;
  r.method = parse_method(j.at("method").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.label_budget = j.at("label_budget").get<std::size_t>();
  r.failed = j.at("failed").get<bool>();
  r.error = j.at("error").get<std::string>();
  if (!j.at("micro_f1").is_null())
    r.f1 = data::F1Scores{j.at("micro_f1").get<double>(), j.at("macro_f1").get<double>()};
  r.restart_count = j.at("restart_count").get<int>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  r.steps = j.at("steps").get<std::size_t>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.run_dir = run_dir;
  r.trace_csv = j.at("trace_csv").get<std::string>();
  if (!j.at("similarity_csv").is_null()) r.similarity_csv = j.at("similarity_csv").get<std::string>();
  return r;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

bool grid_less(const RunResult& a, const RunResult& b) {
  const auto ka = a.method.name();
  const auto kb = b.method.name();
  if (ka != kb) return ka < kb;
  if (a.label_budget != b.label_budget) return a.label_budget < b.label_budget;
  return a.seed < b.seed;
}

std::string similarity_curves_from(const fs::path& root, std::vector<RunResult> runs) {
  std::sort(runs.begin(), runs.end(), grid_less);
  std::ostringstream out;
  out << "variant,seed,budget,step,similarity,L_C,L_D,L_R\n";
  for (const auto& r : runs) {
    if (r.method.tri_training || !fs::exists(root / r.trace_csv)) continue;
    std::istringstream in(read_text(root / r.trace_csv));
    std::string line;
    if (!std::getline(in, line)) continue;
    const auto header = data::split_delimited(line, ',');
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = data::split_delimited(line, ',');
      out << r.method.name() << ',' << r.seed << ',' << r.label_budget << ',' << f.at(col.at("step")) << ','
          << f.at(col.at("similarity")) << ',' << f.at(col.at("L_C")) << ',' << f.at(col.at("L_D")) << ','
          << f.at(col.at("L_R")) << '\n';
    }
  }
  return out.str();
}

void write_reports(const fs::path& root, const std::vector<RunResult>& runs) {
  write_text(root / "aggregate.csv", aggregate_csv(aggregate_runs(runs)));
  write_text(root / "similarity_curves.csv", similarity_curves_from(root, runs));

  std::vector<RunResult> sorted = runs;
  std::sort(sorted.begin(), sorted.end(), grid_less);
  std::ostringstream res;
  res << "variant,seed,budget,status,micro_f1,macro_f1,restart_count,stop_reason,steps,wall_seconds,run_dir\n";
  for (const auto& r : sorted) {
    res << r.method.name() << ',' << r.seed << ',' << r.label_budget << ',' << (r.failed ? "failed" : "ok") << ','
        << (r.f1 ? format_double(r.f1->micro) : "") << ',' << (r.f1 ? format_double(r.f1->macro) : "") << ','
        << r.restart_count << ',' << r.stop_reason << ',' << r.steps << ',' << format_double(r.wall_seconds) << ','
        << r.run_dir.generic_string() << '\n';
  }
  write_text(root / "results.csv", res.str());
  write_manifest(root);
}

}  // namespace

RunResult run_cell(const ExperimentConfig& config, const data::MultimodalDataset& dataset, const Method& method,
                   std::uint64_t seed, std::size_t label_budget) {
  RunResult r;
  r.method = method;
  r.seed = seed;
  r.label_budget = label_budget;
  r.run_dir = cell_dir(method, seed, label_budget);
  r.trace_csv = r.run_dir / "trace.csv";
  const fs::path dir = config.output_dir / r.run_dir;
  fs::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  json details = json::object();

  try {
    const auto split = data::split_labels(dataset, label_budget, seed);
    const auto unlabeled = split.unlabeled_indices();
    const auto evaluator = training::ground_truth_evaluator(split);
    if (method.tri_training) {
      baselines::TriTrainConfig tc;
      tc.seed = seed;
      tc.max_rounds = config.tri_training_max_rounds;
      tc.member = config.tri_training_member;
      const auto result = baselines::tri_train(split, tc);
      write_text(dir / "trace.csv", tri_trace_csv(result));
      if (!unlabeled.empty()) r.f1 = evaluator(unlabeled, baselines::tri_predict(result.ensemble, split, unlabeled));
      r.steps = result.rounds.size();
      r.stop_reason = result.converged ? "converged" : "max_rounds";
      details["views"] = result.ensemble.per_modality_views ? "per-modality" : "all-features";
      details["rounds"] = result.rounds.size();
    } else {
      auto tc = config.training;
      tc.variant = method.variant;
      tc.seed = seed;
      auto model = training::make_model(split, tc);
      const auto result = training::train(model, split, tc, {nullptr, evaluator});
      {
        std::ofstream out(dir / "trace.csv", std::ios::binary);
        training::write_trace_csv(result.trace, out);
      }
      {
        std::ofstream out(dir / "similarity.csv", std::ios::binary);
        training::write_similarity_csv(result.trace, out);
      }
      r.similarity_csv = r.run_dir / "similarity.csv";
      save_checkpoint(model, dir / "model.ckpt");
      if (!unlabeled.empty()) {
        const auto predicted = result.svm ? training::predict_labels(model, *result.svm, split, unlabeled)
                                          : training::predict_labels(model, split, unlabeled);
        r.f1 = evaluator(unlabeled, predicted);
      }
      r.steps = result.trace.steps.size();
      r.restart_count = result.trace.restart_count;
      r.stop_reason = std::string(training::stop_reason_name(result.trace.stop_reason));
      r.failed = result.failed();
      if (r.failed) r.error = "restarts exhausted with classification loss above threshold";
      details = json::parse(training::trace_summary_json(result.trace, tc));
    }
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
    r.stop_reason = "error";
    if (!fs::exists(dir / "trace.csv")) write_text(dir / "trace.csv", "");
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_summary(dir, r, details);
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto dataset = load_dataset(config.dataset);
  fs::create_directories(config.output_dir);
  write_text(config.output_dir / "config.txt", render_experiment_config(config));

  struct Cell {
    Method method;
    std::size_t budget;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& m : config.methods)
    for (auto b : config.label_budgets)
      for (auto s : config.seeds) cells.push_back({m, b, s});

  ExperimentReport report;
  report.runs.resize(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++)
      report.runs[i] = run_cell(config, dataset, cells[i].method, cells[i].seed, cells[i].budget);
  };
  unsigned threads = config.parallelism > 0 ? static_cast<unsigned>(config.parallelism)
                                            : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  write_reports(config.output_dir, report.runs);
  report.aggregate = aggregate_runs(report.runs);
  return report;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs) {
  std::map<std::pair<std::string, std::size_t>, std::vector<const RunResult*>> groups;
  for (const auto& r : runs) groups[{r.method.name(), r.label_budget}].push_back(&r);
  std::vector<AggregateRow> out;
  for (const auto& [key, members] : groups) {
    AggregateRow row;
    row.method = key.first;
    row.label_budget = key.second;
    row.runs = members.size();
    std::vector<double> macro, micro;
    for (const auto* r : members) {
      if (r->failed || !r->f1) {
        if (r->failed) ++row.failures;
        continue;
      }
      macro.push_back(r->f1->macro);
      micro.push_back(r->f1->micro);
    }
    row.macro_median = quantile(macro, 0.5);
    row.macro_q1 = quantile(macro, 0.25);
    row.macro_q3 = quantile(macro, 0.75);
    row.macro_mean = mean(macro);
    row.micro_median = quantile(micro, 0.5);
    row.micro_q1 = quantile(micro, 0.25);
    row.micro_q3 = quantile(micro, 0.75);
    row.micro_mean = mean(micro);
    out.push_back(row);
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "variant,budget,runs,failures,macro_f1_median,macro_f1_q1,macro_f1_q3,macro_f1_iqr,macro_f1_mean,"
         "micro_f1_median,micro_f1_q1,micro_f1_q3,micro_f1_iqr,micro_f1_mean\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.label_budget << ',' << r.runs << ',' << r.failures << ','
        << format_double(r.macro_median) << ',' << format_double(r.macro_q1) << ',' << format_double(r.macro_q3)
        << ',' << format_double(r.macro_q3 - r.macro_q1) << ',' << format_double(r.macro_mean) << ','
        << format_double(r.micro_median) << ',' << format_double(r.micro_q1) << ',' << format_double(r.micro_q3)
        << ',' << format_double(r.micro_q3 - r.micro_q1) << ',' << format_double(r.micro_mean) << '\n';
  }
  return out.str();
}

std::string similarity_curves_csv(const ExperimentConfig& config, const std::vector<RunResult>& runs) {
  return similarity_curves_from(config.output_dir, runs);
}

std::vector<AggregateRow> rebuild_report(const fs::path& output_dir) {
  const fs::path runs_dir = output_dir / "runs";
  if (!fs::is_directory(runs_dir)) throw UsageError("no runs/ directory under " + output_dir.string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "summary.json")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<RunResult> runs;
  for (const auto& d : dirs)
    runs.push_back(summary_from_json(json::parse(read_text(d / "summary.json")), fs::relative(d, output_dir)));
  write_reports(output_dir, runs);
  return aggregate_runs(runs);
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 initialization failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

void write_manifest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir);
    if (rel == "manifest.json") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  json j;
  j["files"] = json::array();
  for (const auto& f : files) {
    j["files"].push_back({{"path", f.generic_string()},
                          {"bytes", fs::file_size(dir / f)},
                          {"sha256", sha256_hex(dir / f)}});
  }
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

void dump_representations(const ConsensusModel& model, const data::MultimodalDataset& dataset, std::ostream& out) {
  const auto rows = dataset.all_indices();
  out << "sample_id,modality";
  for (int j = 1; j <= model.rep_dim(); ++j) out << ",v_" << j;
  out << '\n';
  if (rows.empty()) return;
  const auto reps = interpret_batch(model, dataset.gather(rows), Mode::kEval);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t m = 0; m < reps.size(); ++m) {
      out << rows[i] << ',' << m + 1;
      for (Eigen::Index j = 0; j < reps[m].cols(); ++j)
        out << ',' << format_double(reps[m](static_cast<Eigen::Index>(i), j));
      out << '\n';
    }
  }
}

}  // namespace tcn::experiment
