#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcn/data/dataset.hpp"

namespace tcn::data {

enum class ColumnEncoding {
  kNumeric,    // parsed as a number, z-scored
  kOrdinal,    // index in the level list, z-scored
  kIndicator,  // 1 if value == level, else 0
  kOneHot,     // member of a one-hot group; the group spans every level
};

/// One output column of the Bank Marketing encoding.
struct BankFeature {
  std::string name;
  std::string source;  // column in bank-additional-full.csv
  ColumnEncoding encoding;
  std::string level;   // kIndicator / kOneHot only
  int modality;        // 0 basic, 1 statistical, 2 employment
};

/// Versioned encoding table: source of truth for feature -> column -> modality.
/// Version 1 yields modality widths 10 / 22 / 12.
inline constexpr int kBankEncodingVersion = 1;
const std::vector<BankFeature>& bank_encoding_table();
/// Known levels of every categorical source column used by the table.
const std::vector<std::pair<std::string, std::vector<std::string>>>& bank_levels();
const std::vector<std::string>& bank_modality_names();
/// Every column the UCI bank-additional schema must carry.
const std::vector<std::string>& bank_required_columns();

struct BankOptions {
  std::uint64_t balance_seed = 0;
  std::size_t negatives = 5000;
  bool drop_duration = false;
  bool standardize = true;
};

/// Reads the semicolon-delimited UCI bank-additional CSV, keeps every
/// positive row, samples `negatives` negative rows without replacement,
/// encodes through bank_encoding_table() and z-scores numeric/ordinal
/// columns over the retained rows. Rows stay in file order.
MultimodalDataset load_bank_marketing(std::istream& in, const BankOptions& options = {});
MultimodalDataset load_bank_marketing(const std::filesystem::path& csv_path, const BankOptions& options = {});

}  // namespace tcn::data
