#include "tcn/data/bank_marketing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "tcn/data/csv.hpp"
#include "tcn/errors.hpp"

namespace tcn::data {

namespace {

using E = ColumnEncoding;

const std::vector<std::string> kJobLevels = {"admin.",   "blue-collar",   "entrepreneur", "housemaid",
                                             "management", "retired",     "self-employed", "services",
                                             "student",  "technician",    "unemployed",   "unknown"};

std::vector<BankFeature> build_table() {
  std::vector<BankFeature> t = {
      // Basic information.
      {"age", "age", E::kNumeric, "", 0},
      {"duration", "duration", E::kNumeric, "", 0},
      {"pdays", "pdays", E::kNumeric, "", 0},
      {"previous", "previous", E::kNumeric, "", 0},
      {"marital", "marital", E::kOrdinal, "", 0},
      {"education", "education", E::kOrdinal, "", 0},
      {"housing=yes", "housing", E::kIndicator, "yes", 0},
      {"loan=yes", "loan", E::kIndicator, "yes", 0},
      {"contact=cellular", "contact", E::kIndicator, "cellular", 0},
      {"job=management", "job", E::kOneHot, "management", 0},
      // Statistical information.
      {"campaign", "campaign", E::kNumeric, "", 1},
      {"emp.var.rate", "emp.var.rate", E::kNumeric, "", 1},
      {"cons.conf.idx", "cons.conf.idx", E::kNumeric, "", 1},
      {"euribor3m", "euribor3m", E::kNumeric, "", 1},
      {"poutcome=failure", "poutcome", E::kIndicator, "failure", 1},
      {"poutcome=success", "poutcome", E::kIndicator, "success", 1},
      {"job=unknown", "job", E::kOneHot, "unknown", 1},
  };
  for (const char* d : {"mon", "tue", "wed", "thu", "fri"})
    t.push_back({std::string("day_of_week=") + d, "day_of_week", E::kOneHot, d, 1});
  for (const char* m : {"mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"})
    t.push_back({std::string("month=") + m, "month", E::kOneHot, m, 1});
  // Employment-related information.
  t.push_back({"cons.price.idx", "cons.price.idx", E::kNumeric, "", 2});
  t.push_back({"nr.employed", "nr.employed", E::kNumeric, "", 2});
  for (const auto& j : kJobLevels) {
    if (j == "management" || j == "unknown") continue;
    t.push_back({"job=" + j, "job", E::kOneHot, j, 2});
  }
  return t;
}

double parse_number(const std::string& s, const std::string& column, std::size_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw SchemaError("line " + std::to_string(line_no) + ": column " + column + " is not numeric: '" + s + "'");
  return v;
}

}  // namespace

const std::vector<BankFeature>& bank_encoding_table() {
  static const std::vector<BankFeature> table = build_table();
  return table;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& bank_levels() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> levels = {
      {"job", kJobLevels},
      {"marital", {"divorced", "married", "single", "unknown"}},
      {"education",
       {"illiterate", "basic.4y", "basic.6y", "basic.9y", "high.school", "professional.course", "university.degree",
        "unknown"}},
      {"housing", {"no", "yes", "unknown"}},
      {"loan", {"no", "yes", "unknown"}},
      {"contact", {"cellular", "telephone"}},
      {"month", {"mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"}},
      {"day_of_week", {"mon", "tue", "wed", "thu", "fri"}},
      {"poutcome", {"failure", "nonexistent", "success"}},
  };
  return levels;
}

const std::vector<std::string>& bank_modality_names() {
  static const std::vector<std::string> names = {"basic", "statistical", "employment"};
  return names;
}

const std::vector<std::string>& bank_required_columns() {
  static const std::vector<std::string> cols = {
      "age",      "job",      "marital",  "education", "default",      "housing",        "loan",
      "contact",  "month",    "day_of_week", "duration", "campaign",   "pdays",          "previous",
      "poutcome", "emp.var.rate", "cons.price.idx", "cons.conf.idx", "euribor3m", "nr.employed", "y"};
  return cols;
}

MultimodalDataset load_bank_marketing(std::istream& in, const BankOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("bank marketing: empty file");
  const auto header = split_delimited(line, ';');
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  std::string missing;
  for (const auto& c : bank_required_columns())
    if (!col.count(c)) missing += (missing.empty() ? "" : ", ") + c;
  if (!missing.empty()) throw SchemaError("bank marketing: missing columns: " + missing);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> positives, negatives;
  std::size_t line_no = 1;
  const std::size_t y_col = col.at("y");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_delimited(line, ';');
    if (f.size() != header.size())
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(f.size()));
    const auto& y = f[y_col];
    if (y == "yes") positives.push_back(rows.size());
    else if (y == "no") negatives.push_back(rows.size());
    else throw EncodingError("line " + std::to_string(line_no) + ": unknown value '" + y + "' for column y");
    rows.push_back(std::move(f));
  }
  if (negatives.size() < options.negatives)
    throw SchemaError("bank marketing: only " + std::to_string(negatives.size()) + " negative rows, " +
                      std::to_string(options.negatives) + " requested");

  Rng rng(nn::mix_seed(options.balance_seed, 0xba2c));
  std::shuffle(negatives.begin(), negatives.end(), rng);
  negatives.resize(options.negatives);
  std::vector<std::size_t> kept = positives;
  kept.insert(kept.end(), negatives.begin(), negatives.end());
  std::sort(kept.begin(), kept.end());

  std::vector<BankFeature> features;
  for (const auto& f : bank_encoding_table())
    if (!(options.drop_duration && f.source == "duration")) features.push_back(f);

  std::map<std::string, const std::vector<std::string>*> levels;
  for (const auto& [name, lv] : bank_levels()) levels[name] = &lv;
  // Validate every categorical value up front so the error names the offending value.
  for (const auto& [name, lv] : bank_levels()) {
    const std::size_t c = col.at(name);
    for (std::size_t r : kept) {
      const auto& v = rows[r][c];
      if (std::find(lv.begin(), lv.end(), v) == lv.end())
        throw EncodingError("bank marketing: unknown level '" + v + "' in column " + name);
    }
  }

  const auto n = static_cast<Eigen::Index>(kept.size());
  const int num_modalities = static_cast<int>(bank_modality_names().size());
  std::vector<std::vector<const BankFeature*>> per_modality(num_modalities);
  for (const auto& f : features) per_modality[f.modality].push_back(&f);

  std::vector<Matrix> blocks;
  std::vector<std::vector<std::string>> feature_names;
  for (int m = 0; m < num_modalities; ++m) {
    const auto& fs = per_modality[m];
    Matrix b(n, static_cast<Eigen::Index>(fs.size()));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < fs.size(); ++j) {
      const auto& f = *fs[j];
      names.push_back(f.name);
      const std::size_t c = col.at(f.source);
      const auto jj = static_cast<Eigen::Index>(j);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = rows[kept[static_cast<std::size_t>(i)]][c];
        switch (f.encoding) {
          case E::kNumeric:
            b(i, jj) = parse_number(v, f.source, kept[static_cast<std::size_t>(i)] + 2);
            break;
          case E::kOrdinal: {
            const auto& lv = *levels.at(f.source);
            b(i, jj) = static_cast<double>(std::find(lv.begin(), lv.end(), v) - lv.begin());
            break;
          }
          case E::kIndicator:
          case E::kOneHot:
            b(i, jj) = v == f.level ? 1.0 : 0.0;
            break;
        }
      }
      if (options.standardize && (f.encoding == E::kNumeric || f.encoding == E::kOrdinal)) {
        const double mean = b.col(jj).mean();
        const double sd = std::sqrt((b.col(jj).array() - mean).square().mean());
        b.col(jj).array() -= mean;
        if (sd > 0.0) b.col(jj) /= sd;
      }
    }
    blocks.push_back(std::move(b));
    feature_names.push_back(std::move(names));
  }

  std::vector<int> labels;
  labels.reserve(kept.size());
  for (std::size_t r : kept) labels.push_back(rows[r][y_col] == "yes" ? 1 : 0);
  return MultimodalDataset(std::move(blocks), bank_modality_names(), std::move(feature_names), std::move(labels));
}

MultimodalDataset load_bank_marketing(const std::filesystem::path& csv_path, const BankOptions& options) {
  std::ifstream in(csv_path);
  if (!in) throw UsageError("cannot open bank marketing csv: " + csv_path.string());
  return load_bank_marketing(in, options);
}

}  // namespace tcn::data
