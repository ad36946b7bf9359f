#include "tcn/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcn/errors.hpp"

namespace tcn::data {

MultimodalDataset::MultimodalDataset(std::vector<Matrix> blocks, std::vector<std::string> modality_names,
                                     std::vector<std::vector<std::string>> feature_names, std::vector<int> labels)
    : blocks_(std::move(blocks)),
      modality_names_(std::move(modality_names)),
      feature_names_(std::move(feature_names)),
      labels_(std::move(labels)) {
  if (blocks_.empty()) throw ConfigError("dataset needs at least one modality");
  const auto n = blocks_[0].rows();
  for (const auto& b : blocks_)
    if (b.rows() != n) throw ConfigError("modality blocks must share the row count");
  if (labels_.empty()) labels_.assign(static_cast<std::size_t>(n), -1);
  if (labels_.size() != static_cast<std::size_t>(n)) throw ConfigError("label vector length differs from row count");
  for (int y : labels_)
    if (y < -1 || y > 1) throw ConfigError("labels must be 0, 1, or -1 (absent)");
  if (modality_names_.empty())
    for (std::size_t m = 0; m < blocks_.size(); ++m) modality_names_.push_back("m" + std::to_string(m + 1));
  if (modality_names_.size() != blocks_.size()) throw ConfigError("one modality name per block required");
  if (feature_names_.empty()) {
    for (std::size_t m = 0; m < blocks_.size(); ++m) {
      std::vector<std::string> names;
      for (Eigen::Index j = 0; j < blocks_[m].cols(); ++j) names.push_back("f" + std::to_string(j + 1));
      feature_names_.push_back(std::move(names));
    }
  }
  if (feature_names_.size() != blocks_.size()) throw ConfigError("one feature-name list per block required");
  for (std::size_t m = 0; m < blocks_.size(); ++m)
    if (static_cast<Eigen::Index>(feature_names_[m].size()) != blocks_[m].cols())
      throw ConfigError("feature names do not match block width for modality " + modality_names_[m]);
  labeled_mask_.assign(static_cast<std::size_t>(n), 0);
}

MultimodalDataset::MultimodalDataset(const MultimodalDataset& o)
    : blocks_(o.blocks_),
      modality_names_(o.modality_names_),
      feature_names_(o.feature_names_),
      labels_(o.labels_),
      labeled_mask_(o.labeled_mask_),
      ground_truth_reads_(0) {}

MultimodalDataset& MultimodalDataset::operator=(const MultimodalDataset& o) {
  if (this != &o) {
    blocks_ = o.blocks_;
    modality_names_ = o.modality_names_;
    feature_names_ = o.feature_names_;
    labels_ = o.labels_;
    labeled_mask_ = o.labeled_mask_;
    ground_truth_reads_ = 0;
  }
  return *this;
}

MultimodalDataset::MultimodalDataset(MultimodalDataset&& o) noexcept
    : blocks_(std::move(o.blocks_)),
      modality_names_(std::move(o.modality_names_)),
      feature_names_(std::move(o.feature_names_)),
      labels_(std::move(o.labels_)),
      labeled_mask_(std::move(o.labeled_mask_)),
      ground_truth_reads_(o.ground_truth_reads_.load()) {}

MultimodalDataset& MultimodalDataset::operator=(MultimodalDataset&& o) noexcept {
  blocks_ = std::move(o.blocks_);
  modality_names_ = std::move(o.modality_names_);
  feature_names_ = std::move(o.feature_names_);
  labels_ = std::move(o.labels_);
  labeled_mask_ = std::move(o.labeled_mask_);
  ground_truth_reads_ = o.ground_truth_reads_.load();
  return *this;
}

std::vector<int> MultimodalDataset::modality_dims() const {
  std::vector<int> dims;
  for (const auto& b : blocks_) dims.push_back(static_cast<int>(b.cols()));
  return dims;
}

std::vector<std::size_t> MultimodalDataset::labeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labeled_mask_.size(); ++i)
    if (labeled_mask_[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> MultimodalDataset::unlabeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labeled_mask_.size(); ++i)
    if (!labeled_mask_[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> MultimodalDataset::all_indices() const {
  std::vector<std::size_t> out(size());
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

int MultimodalDataset::label(std::size_t row) const {
  if (!is_labeled(row)) throw UsageError("label requested for unlabeled row " + std::to_string(row));
  return labels_[row];
}

std::vector<int> MultimodalDataset::labels_of(std::span<const std::size_t> rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(label(r));
  return out;
}

std::optional<int> MultimodalDataset::ground_truth(std::size_t row) const {
  ground_truth_reads_.fetch_add(1);
  const int y = labels_.at(row);
  if (y < 0) return std::nullopt;
  return y;
}

MultimodalDataset MultimodalDataset::with_labeled_mask(std::vector<std::uint8_t> mask) const {
  if (mask.size() != size()) throw UsageError("labeled mask length differs from row count");
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] && labels_[i] < 0) throw UsageError("row " + std::to_string(i) + " has no label to reveal");
  MultimodalDataset out(*this);
  out.labeled_mask_ = std::move(mask);
  return out;
}

ModalityBatch MultimodalDataset::gather(std::span<const std::size_t> rows) const {
  ModalityBatch out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    Matrix sub(static_cast<Eigen::Index>(rows.size()), b.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] >= size()) throw UsageError("row index out of range");
      sub.row(static_cast<Eigen::Index>(i)) = b.row(static_cast<Eigen::Index>(rows[i]));
    }
    out.push_back(std::move(sub));
  }
  return out;
}

MultimodalDataset split_labels(const MultimodalDataset& dataset, std::size_t num_labeled, std::uint64_t seed) {
  if (num_labeled < 2) throw UsageError("split_labels: need at least two labeled samples");
  const auto& labels = dataset.raw_labels_for_preparation();
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  const std::size_t candidates = by_class[0].size() + by_class[1].size();
  if (num_labeled > candidates) throw UsageError("split_labels: more labels requested than rows with ground truth");
  if (by_class[0].empty() || by_class[1].empty()) throw UsageError("split_labels: both classes must be present");

  // Largest-remainder apportionment keeps each class within one sample of its share.
  std::array<std::size_t, 2> quota{};
  std::array<double, 2> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const double exact = static_cast<double>(num_labeled) * static_cast<double>(by_class[c].size()) /
                         static_cast<double>(candidates);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - static_cast<double>(quota[c]);
    assigned += quota[c];
  }
  while (assigned < num_labeled) {
    const std::size_t c = remainder[1] > remainder[0] ? 1 : 0;
    ++quota[c];
    remainder[c] = -1.0;
    ++assigned;
  }

  Rng rng(nn::mix_seed(seed, 0x5117));
  std::vector<std::uint8_t> mask(dataset.size(), 0);
  for (std::size_t c = 0; c < 2; ++c) {
    auto pool = by_class[c];
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t k = 0; k < quota[c]; ++k) mask[pool[k]] = 1;
  }
  return dataset.with_labeled_mask(std::move(mask));
}

}  // namespace tcn::data
