#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tcn/data/dataset.hpp"

namespace tcn::data {

/// Splits one delimited line. Double-quoted fields may contain the
/// delimiter; "" inside quotes is a literal quote.
std::vector<std::string> split_delimited(std::string_view line, char delimiter);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Generic multimodal CSV: comma-delimited, header columns named
/// `modality:feature` (modalities in first-appearance order), plus an
/// optional `label` column (0, 1, or empty) and an optional `labeled`
/// column (1 marks membership in X_L).
MultimodalDataset read_multimodal_csv(std::istream& in);
MultimodalDataset read_multimodal_csv(const std::filesystem::path& path);

/// Canonical dump in the same format, including `label` and `labeled`.
void write_multimodal_csv(const MultimodalDataset& dataset, std::ostream& out);
void write_multimodal_csv(const MultimodalDataset& dataset, const std::filesystem::path& path);

}  // namespace tcn::data
