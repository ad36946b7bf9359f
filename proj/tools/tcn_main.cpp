#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tcn/data/bank_marketing.hpp"
#include "tcn/data/csv.hpp"
#include "tcn/errors.hpp"
#include "tcn/experiment/config.hpp"
#include "tcn/experiment/runner.hpp"
#include "tcn/model/checkpoint.hpp"

namespace {

namespace fs = std::filesystem;
using namespace tcn;

void print_aggregate(const std::vector<experiment::AggregateRow>& rows) {
  std::cout << experiment::aggregate_csv(rows);
}

int cmd_run(const fs::path& config_path, const std::string& output_dir, int parallelism) {
  auto config = experiment::load_experiment_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (parallelism >= 0) config.parallelism = parallelism;
  const auto report = experiment::run_experiment(config);
  for (const auto& r : report.runs) {
    if (r.failed)
      std::cerr << "failed: " << r.method.name() << " seed " << r.seed << " budget " << r.label_budget << ": "
                << r.error << '\n';
  }
  print_aggregate(report.aggregate);
  std::cerr << "wrote " << config.output_dir.string() << '\n';
  return report.all_succeeded() ? 0 : 1;
}

int cmd_report(const fs::path& output_dir) {
  print_aggregate(experiment::rebuild_report(output_dir));
  return 0;
}

int cmd_dump(const fs::path& checkpoint, const fs::path& dataset_csv, const std::string& out_path) {
  const auto model = load_checkpoint(checkpoint);
  const auto dataset = data::read_multimodal_csv(dataset_csv);
  if (out_path.empty()) {
    experiment::dump_representations(model, dataset, std::cout);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    experiment::dump_representations(model, dataset, out);
  }
  return 0;
}

int cmd_prepare_bank(const fs::path& uci_csv, const fs::path& out_csv, const data::BankOptions& options) {
  const auto dataset = data::load_bank_marketing(uci_csv, options);
  data::write_multimodal_csv(dataset, out_csv);
  const auto dims = dataset.modality_dims();
  std::cerr << "wrote " << dataset.size() << " rows, modality widths";
  for (int d : dims) std::cerr << ' ' << d;
  std::cerr << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transductive consensus network experiments"};
  app.require_subcommand(1);

  fs::path config_path;
  std::string output_dir;
  int parallelism = -1;
  auto* run = app.add_subcommand("run", "Run the experiment grid described by a config file");
  run->add_option("config", config_path, "Config file (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", output_dir, "Override output_dir");
  run->add_option("--parallelism", parallelism, "Worker threads (0 = hardware threads)");

  fs::path report_dir;
  auto* report = app.add_subcommand("report", "Rebuild aggregate tables and manifest from run summaries");
  report->add_option("output_dir", report_dir, "Experiment output directory")->required()->check(CLI::ExistingDirectory);

  fs::path checkpoint, dataset_csv;
  std::string dump_out;
  auto* dump = app.add_subcommand("dump-reps", "Write eval-mode representations for every sample and modality");
  dump->add_option("checkpoint", checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  dump->add_option("dataset", dataset_csv, "Multimodal CSV")->required()->check(CLI::ExistingFile);
  dump->add_option("-o,--out", dump_out, "Output CSV (default stdout)");

  fs::path uci_csv, bank_out;
  data::BankOptions bank;
  auto* prep = app.add_subcommand("prepare-bank", "Encode the UCI bank-additional CSV into a multimodal CSV");
  prep->add_option("uci_csv", uci_csv, "bank-additional-full.csv")->required()->check(CLI::ExistingFile);
  prep->add_option("out_csv", bank_out, "Output multimodal CSV")->required();
  prep->add_option("--negatives", bank.negatives, "Negative rows to keep");
  prep->add_option("--balance-seed", bank.balance_seed, "Seed for negative sampling");
  prep->add_flag("--drop-duration", bank.drop_duration, "Drop the call duration column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every command-line mistake is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (*run) return cmd_run(config_path, output_dir, parallelism);
    if (*report) return cmd_report(report_dir);
    if (*dump) return cmd_dump(checkpoint, dataset_csv, dump_out);
    if (*prep) return cmd_prepare_bank(uci_csv, bank_out, bank);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
