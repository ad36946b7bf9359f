#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcn/model/consensus_model.hpp"

namespace tcn::data {

/// Samples split into M row-aligned modality blocks, with optional binary
/// ground truth and a labeled/unlabeled mask.
///
/// Labels of labeled rows are read with label(). Ground truth of any row is
/// read with ground_truth(), which counts every call so tests can assert that
/// no training path peeked at held-out labels.
class MultimodalDataset {
 public:
  MultimodalDataset() = default;
  /// `labels` holds 0/1 ground truth per row, or -1 where none exists.
  MultimodalDataset(std::vector<Matrix> blocks, std::vector<std::string> modality_names,
                    std::vector<std::vector<std::string>> feature_names, std::vector<int> labels);

  MultimodalDataset(const MultimodalDataset& other);
  MultimodalDataset& operator=(const MultimodalDataset& other);
  MultimodalDataset(MultimodalDataset&&) noexcept;
  MultimodalDataset& operator=(MultimodalDataset&&) noexcept;

  std::size_t size() const { return blocks_.empty() ? 0 : static_cast<std::size_t>(blocks_[0].rows()); }
  int num_modalities() const { return static_cast<int>(blocks_.size()); }
  const Matrix& block(int m) const { return blocks_.at(static_cast<std::size_t>(m)); }
  std::vector<int> modality_dims() const;
  const std::vector<std::string>& modality_names() const { return modality_names_; }
  const std::vector<std::vector<std::string>>& feature_names() const { return feature_names_; }

  bool is_labeled(std::size_t row) const { return labeled_mask_.at(row) != 0; }
  const std::vector<std::uint8_t>& labeled_mask() const { return labeled_mask_; }
  std::vector<std::size_t> labeled_indices() const;
  std::vector<std::size_t> unlabeled_indices() const;
  std::vector<std::size_t> all_indices() const;

  /// Label of a row in X_L. Throws UsageError for unlabeled rows.
  int label(std::size_t row) const;
  std::vector<int> labels_of(std::span<const std::size_t> rows) const;

  bool has_ground_truth(std::size_t row) const { return labels_.at(row) >= 0; }
  /// Hidden or visible ground truth. Every call is counted.
  std::optional<int> ground_truth(std::size_t row) const;
  std::size_t ground_truth_reads() const { return ground_truth_reads_.load(); }

  /// Copy with a new labeled mask. Marked rows must carry ground truth.
  MultimodalDataset with_labeled_mask(std::vector<std::uint8_t> mask) const;

  /// Row subsets of every block, in the order given.
  ModalityBatch gather(std::span<const std::size_t> rows) const;

  /// Ground truth without touching the read counter. Dataset preparation
  /// (splitting, dumping) only; never called from training or evaluation.
  const std::vector<int>& raw_labels_for_preparation() const { return labels_; }

 private:
  std::vector<Matrix> blocks_;
  std::vector<std::string> modality_names_;
  std::vector<std::vector<std::string>> feature_names_;
  std::vector<int> labels_;
  std::vector<std::uint8_t> labeled_mask_;
  mutable std::atomic<std::size_t> ground_truth_reads_{0};
};

/// Stratified labeled subset. Classes are sampled in proportion to their
/// frequency among rows with ground truth (largest-remainder rounding).
MultimodalDataset split_labels(const MultimodalDataset& dataset, std::size_t num_labeled, std::uint64_t seed);

}  // namespace tcn::data
