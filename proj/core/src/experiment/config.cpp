#include "tcn/experiment/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tcn/data/csv.hpp"
#include "tcn/errors.hpp"

namespace tcn::experiment {

using data::format_double;

std::string Method::name() const {
  return tri_training ? "tri-training" : std::string(training::variant_name(variant));
}

Method parse_method(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "tri-training") return {true, training::Variant::kTcn};
  return {false, training::parse_variant(name)};
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("variants must not be empty");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (label_budgets.empty()) throw ConfigError("label_budgets must not be empty");
  for (auto b : label_budgets)
    if (b < 2) throw ConfigError("label budgets must be at least 2 (one per class)");
  if (parallelism < 0) throw ConfigError("parallelism must be non-negative");
  if (tri_training_max_rounds < 0) throw ConfigError("tri_training.max_rounds must be non-negative");
  if (tri_training_member.hidden < 1 || tri_training_member.epochs < 0 || tri_training_member.batch_size < 1)
    throw ConfigError("tri_training member settings out of range");
  if (dataset.kind != DatasetKind::kSynthetic && dataset.path.empty())
    throw ConfigError("dataset.path is required for this dataset kind");
  if (dataset.kind == DatasetKind::kSynthetic && dataset.synthetic.dims.size() < 2)
    throw ConfigError("synthetic data needs at least two modalities");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  training.validate();
}

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  for (const auto& item : data::split_delimited(value, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError("config key '" + key + "': cannot parse '" + std::string(text) + "'");
  return value;
}

bool parse_bool(const std::string& key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + std::string(text) + "'");
}

std::string_view kind_name(DatasetKind k) {
  switch (k) {
    case DatasetKind::kSynthetic: return "synthetic";
    case DatasetKind::kBankMarketing: return "bank_marketing";
    case DatasetKind::kCsv: return "csv";
  }
  return "synthetic";
}

DatasetKind parse_kind(std::string_view v) {
  if (v == "synthetic") return DatasetKind::kSynthetic;
  if (v == "bank_marketing") return DatasetKind::kBankMarketing;
  if (v == "csv") return DatasetKind::kCsv;
  throw ConfigError("unknown dataset kind '" + std::string(v) + "'");
}

struct Context {
  ExperimentConfig& cfg;
  const std::filesystem::path& base;
};

using Setter = std::function<void(Context&, const std::string& key, const std::string& value)>;

template <typename T>
Setter number(T ExperimentConfig::*field) {
  return [field](Context& c, const std::string& k, const std::string& v) { c.cfg.*field = parse_number<T>(k, v); };
}

#define TCN_TRAINING_NUMBER(member)                                                                     \
  [](Context& c, const std::string& k, const std::string& v) {                                          \
    c.cfg.training.member = parse_number<decltype(c.cfg.training.member)>(k, v);                        \
  }
#define TCN_ARCH_NUMBER(member)                                                                         \
  [](Context& c, const std::string& k, const std::string& v) {                                          \
    c.cfg.training.arch.member = parse_number<int>(k, v);                                               \
  }

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"output_dir", [](Context& c, const std::string&, const std::string& v) { c.cfg.output_dir = c.base / v; }},
      {"parallelism", number(&ExperimentConfig::parallelism)},
      {"variants",
       [](Context& c, const std::string&, const std::string& v) {
         c.cfg.methods.clear();
         for (const auto& name : split_list(v)) c.cfg.methods.push_back(parse_method(name));
       }},
      {"seeds",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.seeds.clear();
         for (const auto& s : split_list(v)) c.cfg.seeds.push_back(parse_number<std::uint64_t>(k, s));
       }},
      {"label_budgets",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.label_budgets.clear();
         for (const auto& s : split_list(v)) c.cfg.label_budgets.push_back(parse_number<std::size_t>(k, s));
       }},
      {"dataset", [](Context& c, const std::string&, const std::string& v) { c.cfg.dataset.kind = parse_kind(v); }},
      {"dataset.path", [](Context& c, const std::string&, const std::string& v) { c.cfg.dataset.path = c.base / v; }},
      {"dataset.synthetic.dims",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.dataset.synthetic.dims.clear();
         for (const auto& s : split_list(v)) c.cfg.dataset.synthetic.dims.push_back(parse_number<int>(k, s));
       }},
      {"dataset.synthetic.num_samples",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.dataset.synthetic.num_samples = parse_number<std::size_t>(k, v);
       }},
      {"dataset.synthetic.class_separation",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.dataset.synthetic.class_separation = parse_number<double>(k, v);
       }},
      {"dataset.synthetic.noise",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.dataset.synthetic.noise = parse_number<double>(k, v);
       }},
      {"dataset.synthetic.seed",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.dataset.synthetic.seed = parse_number<std::uint64_t>(k, v);
       }},
      {"dataset.bank.negatives",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.dataset.bank.negatives = parse_number<std::size_t>(k, v);
       }},
      {"dataset.bank.balance_seed",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.dataset.bank.balance_seed = parse_number<std::uint64_t>(k, v);
       }},
      {"dataset.bank.drop_duration",
       [](Context& c, const std::string& k, const std::string& v) { c.cfg.dataset.bank.drop_duration = parse_bool(k, v); }},
      {"dataset.bank.standardize",
       [](Context& c, const std::string& k, const std::string& v) { c.cfg.dataset.bank.standardize = parse_bool(k, v); }},
      {"training.batch_size", TCN_TRAINING_NUMBER(batch_size)},
      {"training.learning_rate", TCN_TRAINING_NUMBER(learning_rate)},
      {"training.classifier_learning_rate",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.training.classifier_learning_rate = parse_number<double>(k, v);
       }},
      {"training.max_steps", TCN_TRAINING_NUMBER(max_steps)},
      {"training.pretrain_max_steps", TCN_TRAINING_NUMBER(pretrain_max_steps)},
      {"training.convergence_delta", TCN_TRAINING_NUMBER(convergence_delta)},
      {"training.restart_threshold", TCN_TRAINING_NUMBER(restart_threshold)},
      {"training.max_restarts", TCN_TRAINING_NUMBER(max_restarts)},
      {"training.noise_scale", TCN_TRAINING_NUMBER(noise_scale)},
      {"training.noise_reparam",
       [](Context& c, const std::string& k, const std::string& v) { c.cfg.training.noise_reparam = parse_bool(k, v); }},
      {"training.svm_regularization", TCN_TRAINING_NUMBER(svm_regularization)},
      {"training.svm_epochs", TCN_TRAINING_NUMBER(svm_epochs)},
      {"training.arch.rep_dim", TCN_ARCH_NUMBER(rep_dim)},
      {"training.arch.interpreter_hidden", TCN_ARCH_NUMBER(interpreter_hidden)},
      {"training.arch.discriminator_hidden", TCN_ARCH_NUMBER(discriminator_hidden)},
      {"training.arch.classifier_hidden", TCN_ARCH_NUMBER(classifier_hidden)},
      {"training.arch.reconstructor_hidden", TCN_ARCH_NUMBER(reconstructor_hidden)},
      {"tri_training.max_rounds", number(&ExperimentConfig::tri_training_max_rounds)},
      {"tri_training.hidden",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.tri_training_member.hidden = parse_number<int>(k, v);
       }},
      {"tri_training.epochs",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.tri_training_member.epochs = parse_number<int>(k, v);
       }},
      {"tri_training.batch_size",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.tri_training_member.batch_size = parse_number<int>(k, v);
       }},
      {"tri_training.learning_rate",
       [](Context& c, const std::string& k, const std::string& v) {
         c.cfg.tri_training_member.learning_rate = parse_number<double>(k, v);
       }},
  };
  return table;
}

#undef TCN_TRAINING_NUMBER
#undef TCN_ARCH_NUMBER

std::filesystem::path default_output_dir(const std::string& stem) {
  if (const char* root = std::getenv("TCN_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / stem;
  return std::filesystem::path("runs") / stem;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir,
                                         const std::string& stem) {
  ExperimentConfig cfg;
  Context ctx{cfg, base_dir};
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    it->second(ctx, key, value);
  }
  if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir(stem);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  return parse_experiment_config(in, path.parent_path(), path.stem().string());
}

std::string render_experiment_config(const ExperimentConfig& c) {
  std::ostringstream out;
  const auto join = [](const auto& items, auto fn) {
    std::string s;
    for (const auto& item : items) {
      if (!s.empty()) s += ", ";
      s += fn(item);
    }
    return s;
  };
  const auto& t = c.training;
  out << "output_dir = " << c.output_dir.string() << '\n'
      << "parallelism = " << c.parallelism << '\n'
      << "variants = " << join(c.methods, [](const Method& m) { return m.name(); }) << '\n'
      << "seeds = " << join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }) << '\n'
      << "label_budgets = " << join(c.label_budgets, [](std::size_t b) { return std::to_string(b); }) << '\n'
      << "dataset = " << kind_name(c.dataset.kind) << '\n';
  if (!c.dataset.path.empty()) out << "dataset.path = " << c.dataset.path.string() << '\n';
  out << "dataset.synthetic.dims = " << join(c.dataset.synthetic.dims, [](int d) { return std::to_string(d); })
      << '\n'
      << "dataset.synthetic.num_samples = " << c.dataset.synthetic.num_samples << '\n'
      << "dataset.synthetic.class_separation = " << format_double(c.dataset.synthetic.class_separation) << '\n'
      << "dataset.synthetic.noise = " << format_double(c.dataset.synthetic.noise) << '\n'
      << "dataset.synthetic.seed = " << c.dataset.synthetic.seed << '\n'
      << "dataset.bank.negatives = " << c.dataset.bank.negatives << '\n'
      << "dataset.bank.balance_seed = " << c.dataset.bank.balance_seed << '\n'
      << "dataset.bank.drop_duration = " << (c.dataset.bank.drop_duration ? "true" : "false") << '\n'
      << "dataset.bank.standardize = " << (c.dataset.bank.standardize ? "true" : "false") << '\n'
      << "training.batch_size = " << t.batch_size << '\n'
      << "training.learning_rate = " << format_double(t.learning_rate) << '\n';
  if (t.classifier_learning_rate)
    out << "training.classifier_learning_rate = " << format_double(*t.classifier_learning_rate) << '\n';
  out << "training.max_steps = " << t.max_steps << '\n'
      << "training.pretrain_max_steps = " << t.pretrain_max_steps << '\n'
      << "training.convergence_delta = " << format_double(t.convergence_delta) << '\n'
      << "training.restart_threshold = " << format_double(t.restart_threshold) << '\n'
      << "training.max_restarts = " << t.max_restarts << '\n'
      << "training.noise_scale = " << format_double(t.noise_scale) << '\n'
      << "training.noise_reparam = " << (t.noise_reparam ? "true" : "false") << '\n'
      << "training.svm_regularization = " << format_double(t.svm_regularization) << '\n'
      << "training.svm_epochs = " << t.svm_epochs << '\n'
      << "training.arch.rep_dim = " << t.arch.rep_dim << '\n'
      << "training.arch.interpreter_hidden = " << t.arch.interpreter_hidden << '\n'
      << "training.arch.discriminator_hidden = " << t.arch.discriminator_hidden << '\n'
      << "training.arch.classifier_hidden = " << t.arch.classifier_hidden << '\n'
      << "training.arch.reconstructor_hidden = " << t.arch.reconstructor_hidden << '\n'
      << "tri_training.max_rounds = " << c.tri_training_max_rounds << '\n'
      << "tri_training.hidden = " << c.tri_training_member.hidden << '\n'
      << "tri_training.epochs = " << c.tri_training_member.epochs << '\n'
      << "tri_training.batch_size = " << c.tri_training_member.batch_size << '\n'
      << "tri_training.learning_rate = " << format_double(c.tri_training_member.learning_rate) << '\n';
  return out.str();
}

}  // namespace tcn::experiment
