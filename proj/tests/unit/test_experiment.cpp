#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tcn/data/csv.hpp"
#include "tcn/data/synthetic.hpp"
#include "tcn/errors.hpp"
#include "tcn/experiment/runner.hpp"
#include "tcn/model/checkpoint.hpp"
#include "tcn/training/trainer.hpp"

namespace tcn::experiment {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("tcn_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

const char* kSmallConfig = R"(# tiny grid
dataset = synthetic
dataset.synthetic.dims = 4,4,4
dataset.synthetic.num_samples = 40
dataset.synthetic.class_separation = 3
variants = TCN, TCN-svm, tri-training
seeds = 0
label_budgets = 10
parallelism = 1
training.max_steps = 3
training.pretrain_max_steps = 2
training.svm_epochs = 20
tri_training.max_rounds = 2
tri_training.epochs = 5
)";

ExperimentConfig small_config(const fs::path& out) {
  std::istringstream in(kSmallConfig);
  auto c = parse_experiment_config(in, out, "small");
  c.output_dir = out;
  return c;
}

TEST(Config, ParsesKeysAndDefaults) {
  std::istringstream in(kSmallConfig);
  const auto c = parse_experiment_config(in, "/base", "small");
  EXPECT_EQ(c.dataset.kind, DatasetKind::kSynthetic);
  EXPECT_EQ(c.dataset.synthetic.dims, (std::vector<int>{4, 4, 4}));
  ASSERT_EQ(c.methods.size(), 3u);
  EXPECT_TRUE(c.methods[2].tri_training);
  EXPECT_EQ(c.methods[1].variant, training::Variant::kTcnSvm);
  EXPECT_EQ(c.training.max_steps, 3);
  EXPECT_EQ(c.training.batch_size, 10);
  EXPECT_EQ(c.tri_training_member.epochs, 5);
  EXPECT_EQ(c.output_dir.filename(), "small");
}

TEST(Config, RenderRoundTrips) {
  const auto c = small_config("/tmp/x");
  const auto text = render_experiment_config(c);
  std::istringstream in(text);
  const auto back = parse_experiment_config(in, "/", "other");
  EXPECT_EQ(render_experiment_config(back), text);
  EXPECT_EQ(back.output_dir, c.output_dir);
}

TEST(Config, RejectsBadInput) {
  const auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_experiment_config(in, "/", "x");
  };
  EXPECT_THROW(parse(std::string(kSmallConfig) + "training.momentum = 3\n"), ConfigError);
  EXPECT_THROW(parse(std::string(kSmallConfig) + "seeds = 1\n"), ConfigError);
  EXPECT_THROW(parse("variants = TCN, GAN\nseeds = 0\nlabel_budgets = 5\n"), ConfigError);
  EXPECT_THROW(parse("variants = TCN\nseeds = 0\nlabel_budgets = 5\ntraining.max_steps = many\n"), ConfigError);
  EXPECT_THROW(parse("variants = TCN\nseeds = 0\nlabel_budgets = 5\nno equals sign\n"), ConfigError);
  EXPECT_THROW(parse("variants = TCN\nseeds = 0\n"), ConfigError);
  EXPECT_THROW(load_experiment_config("/nonexistent/grid.cfg"), UsageError);
}

TEST(Config, MethodNames) {
  EXPECT_EQ(parse_method("tri-training").name(), "tri-training");
  EXPECT_EQ(parse_method("tcn-embed").name(), "TCN-embed");
  EXPECT_THROW(parse_method("svm"), ConfigError);
}

TEST(Runner, SingletonGridWritesOneRun) {
  const auto out = scratch("singleton");
  auto c = small_config(out);
  c.methods = {parse_method("TCN")};
  const auto report = run_experiment(c);
  ASSERT_EQ(report.runs.size(), 1u);
  EXPECT_TRUE(report.all_succeeded());
  const auto& run = report.runs[0];
  EXPECT_EQ(run.run_dir, fs::path("runs/TCN_b10_s0"));
  for (const char* f : {"trace.csv", "similarity.csv", "summary.json", "model.ckpt"})
    EXPECT_TRUE(fs::exists(out / run.run_dir / f)) << f;
  for (const char* f : {"aggregate.csv", "results.csv", "similarity_curves.csv", "config.txt", "manifest.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  ASSERT_TRUE(run.f1.has_value());
  EXPECT_EQ(count_lines(slurp(out / run.trace_csv)), run.steps + 1);
  fs::remove_all(out);
}

TEST(Runner, RerunIsByteIdenticalAndManifestIsComplete) {
  const auto out = scratch("rerun");
  auto c = small_config(out);
  const auto first = run_experiment(c);
  const auto aggregate = slurp(out / "aggregate.csv");
  const auto curves = slurp(out / "similarity_curves.csv");
  const auto trace = slurp(out / first.runs[0].trace_csv);
  c.parallelism = 3;
  run_experiment(c);
  EXPECT_EQ(slurp(out / "aggregate.csv"), aggregate);
  EXPECT_EQ(slurp(out / "similarity_curves.csv"), curves);
  EXPECT_EQ(slurp(out / first.runs[0].trace_csv), trace);

  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) {
    const fs::path p = out / f["path"].get<std::string>();
    listed.insert(f["path"].get<std::string>());
    EXPECT_EQ(f["bytes"].get<std::uintmax_t>(), fs::file_size(p));
    EXPECT_EQ(f["sha256"].get<std::string>(), sha256_hex(p));
  }
  std::size_t on_disk = 0;
  for (const auto& e : fs::recursive_directory_iterator(out))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") {
      ++on_disk;
      EXPECT_TRUE(listed.count(fs::relative(e.path(), out).generic_string())) << e.path();
    }
  EXPECT_EQ(listed.size(), on_disk);
  fs::remove_all(out);
}

TEST(Runner, CurvesHaveOneRowPerStep) {
  const auto out = scratch("curves");
  auto c = small_config(out);
  const auto report = run_experiment(c);
  std::size_t steps = 0;
  for (const auto& r : report.runs)
    if (!r.method.tri_training) steps += r.steps;
  EXPECT_EQ(count_lines(slurp(out / "similarity_curves.csv")), steps + 1);
  // TCN-svm only pretrains, so its row count is bounded by the pretraining budget.
  for (const auto& r : report.runs)
    if (!r.method.tri_training && r.method.variant == training::Variant::kTcnSvm) {
      EXPECT_LE(r.steps, 2u);
      EXPECT_NE(slurp(out / r.trace_csv).find(",pretrain,"), std::string::npos);
      EXPECT_EQ(slurp(out / r.trace_csv).find(",main,"), std::string::npos);
    }
  fs::remove_all(out);
}

TEST(Runner, FailingCellDoesNotStopTheGrid) {
  const auto out = scratch("crash");
  auto c = small_config(out);
  c.label_budgets = {10, 1000};  // second budget exceeds the 40 samples
  c.methods = {parse_method("TCN")};
  const auto report = run_experiment(c);
  ASSERT_EQ(report.runs.size(), 2u);
  EXPECT_FALSE(report.runs[0].failed);
  EXPECT_TRUE(report.runs[1].failed);
  EXPECT_EQ(report.runs[1].stop_reason, "error");
  EXPECT_FALSE(report.runs[1].error.empty());
  EXPECT_TRUE(fs::exists(out / report.runs[1].run_dir / "trace.csv"));
  EXPECT_FALSE(report.all_succeeded());
  const auto agg = slurp(out / "aggregate.csv");
  EXPECT_NE(agg.find("TCN,1000,1,1,"), std::string::npos);
  fs::remove_all(out);
}

TEST(Runner, RestartExhaustionIsRecordedAsAFailedRun) {
  const auto out = scratch("exhausted");
  auto c = small_config(out);
  c.methods = {parse_method("TCN"), parse_method("tri-training")};
  // Converges on the second step with L_C above a zero threshold and no restarts left.
  c.training.convergence_delta = 100.0;
  c.training.restart_threshold = 0.0;
  c.training.max_restarts = 0;
  const auto report = run_experiment(c);
  ASSERT_EQ(report.runs.size(), 2u);
  EXPECT_TRUE(report.runs[0].failed);
  EXPECT_EQ(report.runs[0].stop_reason, "restarts_exhausted");
  EXPECT_GT(count_lines(slurp(out / report.runs[0].trace_csv)), 1u);
  EXPECT_FALSE(report.runs[1].failed);
  fs::remove_all(out);
}

TEST(Runner, RebuildReportMatchesOriginal) {
  const auto out = scratch("rebuild");
  auto c = small_config(out);
  run_experiment(c);
  const auto aggregate = slurp(out / "aggregate.csv");
  fs::remove(out / "aggregate.csv");
  fs::remove(out / "similarity_curves.csv");
  const auto rows = rebuild_report(out);
  EXPECT_EQ(rows.size(), 3u);
  EXPECT_EQ(slurp(out / "aggregate.csv"), aggregate);
  EXPECT_THROW(rebuild_report(out / "missing"), UsageError);
  fs::remove_all(out);
}

TEST(Aggregate, QuartilesOfKnownValues) {
  std::vector<RunResult> runs;
  for (double v : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    RunResult r;
    r.method = parse_method("TCN");
    r.label_budget = 5;
    r.f1 = data::F1Scores{v, v};
    runs.push_back(r);
  }
  RunResult failed;
  failed.method = parse_method("TCN");
  failed.label_budget = 5;
  failed.failed = true;
  runs.push_back(failed);
  const auto rows = aggregate_runs(runs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].runs, 6u);
  EXPECT_EQ(rows[0].failures, 1u);
  EXPECT_NEAR(rows[0].macro_median, 0.3, 1e-12);
  EXPECT_NEAR(rows[0].macro_q1, 0.2, 1e-12);
  EXPECT_NEAR(rows[0].macro_q3, 0.4, 1e-12);
  EXPECT_NEAR(rows[0].micro_mean, 0.3, 1e-12);
}

data::MultimodalDataset ten_samples() {
  data::SyntheticSpec spec;
  spec.dims = {3, 4, 5};
  spec.num_samples = 10;
  return data::generate_synthetic(spec);
}

TEST(Dump, ShapeAndHeader) {
  const auto ds = ten_samples();
  training::TrainingConfig tc;
  const auto model = training::make_model(ds, tc);
  std::ostringstream out;
  dump_representations(model, ds, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  const auto header = data::split_delimited(line, ',');
  ASSERT_EQ(header.size(), 18u);
  EXPECT_EQ(header[0], "sample_id");
  EXPECT_EQ(header[1], "modality");
  EXPECT_EQ(header[2], "v_1");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(data::split_delimited(line, ',').size(), 18u);
    ++rows;
  }
  EXPECT_EQ(rows, 30u);
}

TEST(Dump, SilencedInterpretersGiveZeroColumns) {
  const auto ds = ten_samples();
  auto model = training::make_model(ds, {});
  for (auto& n : model.interpreters()) n.zero_all();
  std::ostringstream out;
  dump_representations(model, ds, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = data::split_delimited(line, ',');
    for (std::size_t j = 2; j < f.size(); ++j) EXPECT_EQ(std::stod(f[j]), 0.0);
  }
}

TEST(Dump, CheckpointRoundTripGivesSameDump) {
  const auto ds = ten_samples();
  const auto model = training::make_model(ds, {});
  std::stringstream ckpt;
  save_checkpoint(model, ckpt);
  const auto restored = load_checkpoint(ckpt);
  std::ostringstream a, b;
  dump_representations(model, ds, a);
  dump_representations(restored, ds, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Dataset, LoadErrorsNameTheSource) {
  DatasetSpec spec;
  spec.kind = DatasetKind::kBankMarketing;
  spec.path = "/nonexistent/bank.csv";
  try {
    load_dataset(spec);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/bank.csv"), std::string::npos);
  }
}

}  // namespace
}  // namespace tcn::experiment
