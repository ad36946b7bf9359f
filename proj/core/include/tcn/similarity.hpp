#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcn/model/consensus_model.hpp"

namespace tcn {

namespace data {
class MultimodalDataset;
}

inline constexpr double kDefaultPmfSmoothing = 1e-8;

/// A representation normalized into a strictly positive probability mass.
struct RepresentationPmf {
  Vector mass;
};

struct SimilarityReport {
  /// (m, n), 1-based with m < n -> mean relative divergence over samples.
  std::map<std::pair<int, int>, double> per_pair;
  /// Negative mean of all per-pair, per-sample relative divergences; <= 0.
  double overall = 0.0;
  std::size_t sample_count = 0;
};

RepresentationPmf to_pmf(const Vector& values, double smoothing = kDefaultPmfSmoothing);
inline RepresentationPmf to_pmf(const Representation& rep, double smoothing = kDefaultPmfSmoothing) {
  return to_pmf(rep.values, smoothing);
}

/// sum_j p_j ln(p_j / q_j), nats.
double kl(const RepresentationPmf& p, const RepresentationPmf& q);

/// -sum_j p_j ln p_j, nats.
double entropy(const RepresentationPmf& p);

/// Symmetric KL normalized by twice the summed entropies:
/// (KL(p||q) + KL(q||p)) / (2 (H(p) + H(q))).
double relative_divergence(const RepresentationPmf& p, const RepresentationPmf& q);

/// Similarity over row-aligned representation matrices, one per modality.
SimilarityReport representation_similarity(std::span<const Matrix> reps,
                                           double smoothing = kDefaultPmfSmoothing);

/// Eval-mode representations of every row of `dataset` (or of `rows` when
/// given), scored with representation_similarity().
SimilarityReport dataset_similarity(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                                    double smoothing = kDefaultPmfSmoothing);
SimilarityReport dataset_similarity(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                                    std::span<const std::size_t> rows,
                                    double smoothing = kDefaultPmfSmoothing);

/// "d_1_2,d_1_3,..." in lexicographic pair order.
std::vector<std::string> similarity_pair_columns(int num_modalities);

}  // namespace tcn
