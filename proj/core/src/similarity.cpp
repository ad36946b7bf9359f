#include "tcn/similarity.hpp"

#include <cmath>
#include <numeric>

#include "tcn/data/dataset.hpp"
#include "tcn/errors.hpp"

namespace tcn {

RepresentationPmf to_pmf(const Vector& values, double smoothing) {
  if (values.size() == 0) throw UsageError("to_pmf: empty representation");
  if (smoothing < 0.0) throw UsageError("to_pmf: smoothing must be non-negative");
  RepresentationPmf p;
  p.mass = values.array() + smoothing;
  const double total = p.mass.sum();
  if (!(total > 0.0)) {
    // All-zero input with no smoothing: fall back to uniform.
    p.mass = Vector::Constant(values.size(), 1.0 / static_cast<double>(values.size()));
    return p;
  }
  p.mass /= total;
  return p;
}

double kl(const RepresentationPmf& p, const RepresentationPmf& q) {
  if (p.mass.size() != q.mass.size()) throw UsageError("kl: dimension mismatch");
  double d = 0.0;
  for (Eigen::Index j = 0; j < p.mass.size(); ++j) {
    if (p.mass[j] > 0.0) d += p.mass[j] * std::log(p.mass[j] / q.mass[j]);
  }
  return std::max(d, 0.0);
}

double entropy(const RepresentationPmf& p) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < p.mass.size(); ++j)
    if (p.mass[j] > 0.0) h -= p.mass[j] * std::log(p.mass[j]);
  return std::max(h, 0.0);
}

double relative_divergence(const RepresentationPmf& p, const RepresentationPmf& q) {
  const double h = entropy(p) + entropy(q);
  if (!(h > 0.0)) throw NumericError("relative_divergence: zero total entropy");
  return (kl(p, q) + kl(q, p)) / (2.0 * h);
}

SimilarityReport representation_similarity(std::span<const Matrix> reps, double smoothing) {
  const int m = static_cast<int>(reps.size());
  if (m < 2) throw UsageError("similarity needs at least two modalities");
  const Eigen::Index n = reps[0].rows();
  for (const auto& r : reps)
    if (r.rows() != n || r.cols() != reps[0].cols()) throw UsageError("similarity: representation shape mismatch");

  SimilarityReport report;
  report.sample_count = static_cast<std::size_t>(n);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) report.per_pair[{a + 1, b + 1}] = 0.0;
  if (n == 0) return report;

  std::vector<RepresentationPmf> pmfs(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < m; ++a) pmfs[a] = to_pmf(Vector(reps[a].row(i).transpose()), smoothing);
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) report.per_pair[{a + 1, b + 1}] += relative_divergence(pmfs[a], pmfs[b]);
  }
  double total = 0.0;
  for (auto& [key, value] : report.per_pair) {
    value /= static_cast<double>(n);
    total += value;
  }
  report.overall = -total / static_cast<double>(report.per_pair.size());
  return report;
}

SimilarityReport dataset_similarity(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                                    std::span<const std::size_t> rows, double smoothing) {
  if (model.num_modalities() < 2) throw UsageError("similarity needs at least two modalities");
  if (rows.empty()) return representation_similarity(std::vector<Matrix>(model.num_modalities(), Matrix(0, model.rep_dim())), smoothing);
  const auto reps = interpret_batch(model, dataset.gather(rows), Mode::kEval);
  return representation_similarity(reps, smoothing);
}

SimilarityReport dataset_similarity(const ConsensusModel& model, const data::MultimodalDataset& dataset,
                                    double smoothing) {
  std::vector<std::size_t> rows(dataset.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return dataset_similarity(model, dataset, rows, smoothing);
}

std::vector<std::string> similarity_pair_columns(int num_modalities) {
  std::vector<std::string> cols;
  for (int a = 1; a <= num_modalities; ++a)
    for (int b = a + 1; b <= num_modalities; ++b) cols.push_back("d_" + std::to_string(a) + "_" + std::to_string(b));
  return cols;
}

}  // namespace tcn
