#include "tcn/data/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>

#include "tcn/errors.hpp"

namespace tcn::data {

std::vector<std::string> split_delimited(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return {buf, res.ptr};
}

namespace {

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && *b == ' ') ++b;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw SchemaError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
  return v;
}

}  // namespace

MultimodalDataset read_multimodal_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("multimodal csv: missing header");
  const auto header = split_delimited(line, ',');

  std::vector<std::string> modality_names;
  std::vector<std::vector<std::string>> feature_names;
  std::vector<std::pair<int, int>> column_slot(header.size(), {-1, -1});
  int label_col = -1, labeled_col = -1;
  std::map<std::string, int> modality_index;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& h = header[c];
    if (h == "label") { label_col = static_cast<int>(c); continue; }
    if (h == "labeled") { labeled_col = static_cast<int>(c); continue; }
    const auto colon = h.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == h.size())
      throw SchemaError("multimodal csv: column '" + h + "' is not of the form modality:feature");
    const auto mod = h.substr(0, colon);
    auto [it, inserted] = modality_index.try_emplace(mod, static_cast<int>(modality_names.size()));
    if (inserted) {
      modality_names.push_back(mod);
      feature_names.emplace_back();
    }
    column_slot[c] = {it->second, static_cast<int>(feature_names[it->second].size())};
    feature_names[it->second].push_back(h.substr(colon + 1));
  }
  if (modality_names.empty()) throw SchemaError("multimodal csv: no feature columns");

  std::vector<std::vector<double>> values(modality_names.size());
  std::vector<int> labels;
  std::vector<std::uint8_t> mask;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_delimited(line, ',');
    if (f.size() != header.size())
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields");
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (column_slot[c].first >= 0) values[column_slot[c].first].push_back(parse_double(f[c], line_no));
    }
    int y = -1;
    if (label_col >= 0 && !f[label_col].empty()) {
      if (f[label_col] == "0") y = 0;
      else if (f[label_col] == "1") y = 1;
      else throw SchemaError("line " + std::to_string(line_no) + ": label must be 0, 1 or empty");
    }
    labels.push_back(y);
    mask.push_back(labeled_col >= 0 && f[labeled_col] == "1" ? 1 : 0);
  }

  const auto n = static_cast<Eigen::Index>(labels.size());
  std::vector<Matrix> blocks;
  for (std::size_t m = 0; m < modality_names.size(); ++m) {
    const auto d = static_cast<Eigen::Index>(feature_names[m].size());
    Matrix b(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) b(i, j) = values[m][static_cast<std::size_t>(i * d + j)];
    blocks.push_back(std::move(b));
  }
  MultimodalDataset ds(std::move(blocks), std::move(modality_names), std::move(feature_names), std::move(labels));
  return ds.with_labeled_mask(std::move(mask));
}

MultimodalDataset read_multimodal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset: " + path.string());
  return read_multimodal_csv(in);
}

void write_multimodal_csv(const MultimodalDataset& dataset, std::ostream& out) {
  bool first = true;
  for (int m = 0; m < dataset.num_modalities(); ++m) {
    for (const auto& f : dataset.feature_names()[m]) {
      if (!first) out << ',';
      out << dataset.modality_names()[m] << ':' << f;
      first = false;
    }
  }
  out << ",label,labeled\n";
  const auto& labels = dataset.raw_labels_for_preparation();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    first = true;
    for (int m = 0; m < dataset.num_modalities(); ++m) {
      const auto& b = dataset.block(m);
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        if (!first) out << ',';
        out << format_double(b(static_cast<Eigen::Index>(i), j));
        first = false;
      }
    }
    out << ',';
    if (labels[i] >= 0) out << labels[i];
    out << ',' << (dataset.is_labeled(i) ? 1 : 0) << '\n';
  }
}

void write_multimodal_csv(const MultimodalDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write dataset: " + path.string());
  write_multimodal_csv(dataset, out);
}

}  // namespace tcn::data
