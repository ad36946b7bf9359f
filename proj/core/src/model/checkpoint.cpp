#include "tcn/model/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tcn/errors.hpp"

namespace tcn {

namespace {

constexpr int kVersion = 1;

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"modality_dims", c.modality_dims},
          {"rep_dim", c.arch.rep_dim},
          {"interpreter_hidden", c.arch.interpreter_hidden},
          {"discriminator_hidden", c.arch.discriminator_hidden},
          {"classifier_hidden", c.arch.classifier_hidden},
          {"reconstructor_hidden", c.arch.reconstructor_hidden},
          {"with_reconstructors", c.with_reconstructors},
          {"noise_reparam", c.noise_reparam},
          {"noise_variance_floor", c.noise_variance_floor}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.modality_dims = j.at("modality_dims").get<std::vector<int>>();
  c.arch.rep_dim = j.at("rep_dim");
  c.arch.interpreter_hidden = j.at("interpreter_hidden");
  c.arch.discriminator_hidden = j.at("discriminator_hidden");
  c.arch.classifier_hidden = j.at("classifier_hidden");
  c.arch.reconstructor_hidden = j.at("reconstructor_hidden");
  c.with_reconstructors = j.at("with_reconstructors");
  c.noise_reparam = j.at("noise_reparam");
  c.noise_variance_floor = j.at("noise_variance_floor");
  return c;
}

template <typename Fn>
void for_each_tensor(const ConsensusModel& model, Fn&& fn) {
  for (const auto* net : model.networks()) {
    for (std::size_t k = 0; k < net->blocks().size(); ++k) {
      const auto& b = net->blocks()[k];
      const std::string p = net->name() + ".block" + std::to_string(k);
      fn(p + ".weight", b.dense.weights);
      fn(p + ".bias", b.dense.bias);
      if (b.norm) {
        fn(p + ".bn.gamma", b.norm->gamma);
        fn(p + ".bn.beta", b.norm->beta);
        fn(p + ".bn.running_mean", b.norm->running_mean);
        fn(p + ".bn.running_var", b.norm->running_var);
      }
    }
  }
}

template <typename Derived>
void write_tensor(std::ostream& out, const std::string& name, const Eigen::PlainObjectBase<Derived>& t) {
  out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    auto res = std::to_chars(buf, buf + sizeof(buf), t.data()[i]);
    if (i) out << ' ';
    out.write(buf, res.ptr - buf);
  }
  out << '\n';
}

}  // namespace

void save_checkpoint(const ConsensusModel& model, std::ostream& out) {
  out << "tcn-checkpoint " << kVersion << '\n';
  out << "config " << config_to_json(model.config()).dump() << '\n';
  for_each_tensor(model, [&](const std::string& name, const auto& t) { write_tensor(out, name, t); });
  out << "end\n";
}

void save_checkpoint(const ConsensusModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open checkpoint for writing: " + path.string());
  save_checkpoint(model, out);
}

ConsensusModel load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("checkpoint: empty input");
  {
    std::istringstream hs(line);
    std::string magic;
    int version = 0;
    hs >> magic >> version;
    if (magic != "tcn-checkpoint") throw SchemaError("checkpoint: bad magic");
    if (version != kVersion) throw SchemaError("checkpoint: unsupported version " + std::to_string(version));
  }
  if (!std::getline(in, line) || line.rfind("config ", 0) != 0) throw SchemaError("checkpoint: missing config");
  ConsensusModel model(config_from_json(nlohmann::json::parse(line.substr(7))), 0);

  auto read_into = [&](const std::string& name, auto& t) {
    std::string header;
    if (!std::getline(in, header)) throw SchemaError("checkpoint: truncated before " + name);
    std::istringstream hs(header);
    std::string kw, got;
    Eigen::Index rows = -1, cols = -1;
    hs >> kw >> got >> rows >> cols;
    if (kw != "tensor" || got != name) throw SchemaError("checkpoint: expected tensor " + name + ", found '" + header + "'");
    if (rows != t.rows() || cols != t.cols()) throw SchemaError("checkpoint: shape mismatch for " + name);
    std::string body;
    std::getline(in, body);
    const char* p = body.data();
    const char* end = body.data() + body.size();
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw SchemaError("checkpoint: bad number in " + name);
      t.data()[i] = v;
      p = res.ptr;
    }
  };
  for (auto* net : model.networks()) {
    for (std::size_t k = 0; k < net->blocks().size(); ++k) {
      auto& b = net->blocks()[k];
      const std::string p = net->name() + ".block" + std::to_string(k);
      read_into(p + ".weight", b.dense.weights);
      read_into(p + ".bias", b.dense.bias);
      if (b.norm) {
        read_into(p + ".bn.gamma", b.norm->gamma);
        read_into(p + ".bn.beta", b.norm->beta);
        read_into(p + ".bn.running_mean", b.norm->running_mean);
        read_into(p + ".bn.running_var", b.norm->running_var);
      }
    }
  }
  if (!std::getline(in, line) || line != "end") throw SchemaError("checkpoint: missing end marker");
  return model;
}

ConsensusModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open checkpoint: " + path.string());
  return load_checkpoint(in);
}

}  // namespace tcn
