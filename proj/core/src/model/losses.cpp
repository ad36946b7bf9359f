#include <cmath>
#include <string>

#include "tcn/errors.hpp"
#include "tcn/model/consensus_model.hpp"
#include "tcn/nn/loss.hpp"

namespace tcn {

namespace {

void check_batch(const ConsensusModel& model, const ModalityBatch& batch) {
  const int m = model.num_modalities();
  if (static_cast<int>(batch.size()) != m)
    throw ConfigError("batch has " + std::to_string(batch.size()) + " modality blocks, model expects " +
                      std::to_string(m));
  for (int i = 0; i < m; ++i) {
    if (batch[i].cols() != model.config().modality_dims[i])
      throw ConfigError("modality " + std::to_string(i + 1) + " has " + std::to_string(batch[i].cols()) +
                        " features, model expects " + std::to_string(model.config().modality_dims[i]));
    if (batch[i].rows() != batch[0].rows()) throw ConfigError("modality blocks differ in row count");
  }
  if (batch[0].rows() < 1) throw ConfigError("empty batch");
}

bool wants_interpreters(const LossRequest& r) {
  return has_group(r.gradients, ParameterGroup::kInterpreters);
}

}  // namespace

std::vector<Matrix> interpret_batch(const ConsensusModel& model, const ModalityBatch& batch, Mode mode,
                                    std::vector<nn::MlpTape>* tapes) {
  check_batch(model, batch);
  const int m = model.num_modalities();
  std::vector<Matrix> reps;
  reps.reserve(m);
  if (tapes) tapes->assign(m, {});
  for (int i = 0; i < m; ++i)
    reps.push_back(model.interpreters()[i].forward(batch[i], mode, tapes ? &(*tapes)[i] : nullptr));
  return reps;
}

std::vector<Representation> interpret(const ConsensusModel& model, std::span<const Vector> sample_blocks,
                                      Mode mode, std::size_t sample_id) {
  ModalityBatch batch;
  for (const auto& v : sample_blocks) batch.push_back(v.transpose());
  const auto reps = interpret_batch(model, batch, mode);
  std::vector<Representation> out;
  for (std::size_t i = 0; i < reps.size(); ++i)
    out.push_back({reps[i].row(0).transpose(), static_cast<int>(i) + 1, sample_id});
  return out;
}

NoiseRepresentation sample_noise_modality(std::span<const Representation> reps, Rng& rng,
                                          double variance_floor) {
  if (reps.size() < 2) throw UsageError("noise modality needs at least two representations");
  const Eigen::Index d = reps.front().values.size();
  NoiseRepresentation out;
  out.mean_source = Vector::Zero(d);
  for (const auto& r : reps) out.mean_source += r.values;
  out.mean_source /= static_cast<double>(reps.size());
  out.var_source = Vector::Zero(d);
  for (const auto& r : reps) out.var_source += (r.values - out.mean_source).array().square().matrix();
  out.var_source /= static_cast<double>(reps.size());
  std::normal_distribution<double> z(0.0, 1.0);
  out.values.resize(d);
  for (Eigen::Index j = 0; j < d; ++j)
    out.values[j] = out.mean_source[j] + std::sqrt(std::max(out.var_source[j], variance_floor)) * z(rng);
  return out;
}

LossEvaluation discrimination_loss(const ConsensusModel& model, const ModalityBatch& batch, Rng& rng,
                                   const LossRequest& request, const NoiseOverride& noise) {
  const int m = model.num_modalities();
  const int r = model.rep_dim();
  const double floor = model.config().noise_variance_floor;
  LossEvaluation ev;
  const auto reps = interpret_batch(model, batch, request.mode, &ev.tapes.interpreters);
  const Eigen::Index n = reps[0].rows();

  Matrix mean = Matrix::Zero(n, r);
  for (const auto& v : reps) mean += v;
  mean /= static_cast<double>(m);
  Matrix var = Matrix::Zero(n, r);
  for (const auto& v : reps) var += (v - mean).array().square().matrix();
  var /= static_cast<double>(m);
  const Matrix sd = var.cwiseMax(floor).cwiseSqrt();

  Matrix z;
  Matrix noise_rep;
  if (noise.values) {
    if (noise.values->rows() != n || noise.values->cols() != r) throw ConfigError("noise override shape mismatch");
    noise_rep = *noise.values;
  } else {
    if (noise.standard_draws) {
      if (noise.standard_draws->rows() != n || noise.standard_draws->cols() != r)
        throw ConfigError("noise draw override shape mismatch");
      z = *noise.standard_draws;
    } else {
      z.resize(n, r);
      std::normal_distribution<double> dist(0.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < r; ++j) z(i, j) = dist(rng);
    }
    noise_rep = mean + sd.cwiseProduct(z);
  }

  Matrix stacked((m + 1) * n, r);
  std::vector<int> targets(static_cast<std::size_t>((m + 1) * n));
  for (int k = 0; k <= m; ++k) {
    stacked.middleRows(k * n, n) = k < m ? reps[k] : noise_rep;
    std::fill(targets.begin() + k * n, targets.begin() + (k + 1) * n, k);
  }

  const bool need_grad = request.gradients != ParameterGroup::kNone;
  const Matrix logits = model.discriminator().forward(stacked, request.mode, &ev.tapes.discriminator);
  Matrix dlogits;
  ev.value = nn::cross_entropy(logits, targets, need_grad ? &dlogits : nullptr);
  if (!need_grad) return ev;

  ev.gradients = ModelGradients::zeros_like(model);
  const Matrix dstacked = model.discriminator().backward(ev.tapes.discriminator, dlogits, ev.gradients.discriminator);
  if (!wants_interpreters(request)) return ev;

  const bool reparam = model.config().noise_reparam && !noise.values;
  const Matrix dnoise = dstacked.middleRows(m * n, n);
  for (int k = 0; k < m; ++k) {
    Matrix dv = dstacked.middleRows(k * n, n);
    if (reparam) {
      // noise = mean + sd * z; d/dv_k of mean is 1/M, of sd is (v_k - mean)/(M sd) above the floor.
      dv += dnoise / static_cast<double>(m);
      const Matrix dsd = (var.array() > floor).select((reps[k] - mean).cwiseQuotient(sd * m), 0.0);
      dv += dnoise.cwiseProduct(z).cwiseProduct(dsd);
    }
    model.interpreters()[k].backward(ev.tapes.interpreters[k], dv, ev.gradients.interpreters[k]);
  }
  return ev;
}

LossEvaluation classification_loss(const ConsensusModel& model, const ModalityBatch& batch,
                                   std::span<const int> labels, const LossRequest& request) {
  const int m = model.num_modalities();
  const int r = model.rep_dim();
  LossEvaluation ev;
  const auto reps = interpret_batch(model, batch, request.mode, &ev.tapes.interpreters);
  const Eigen::Index n = reps[0].rows();
  if (labels.size() != static_cast<std::size_t>(n)) throw ConfigError("label count does not match batch");
  for (int y : labels)
    if (y != 0 && y != 1) throw UsageError("classification loss requires labeled samples (labels 0/1)");

  Matrix joined(n, m * r);
  for (int k = 0; k < m; ++k) joined.middleCols(k * r, r) = reps[k];
  const bool need_grad = request.gradients != ParameterGroup::kNone;
  const Matrix logits = model.classifier().forward(joined, request.mode, &ev.tapes.classifier);
  Matrix dlogits;
  ev.value = nn::cross_entropy(logits, labels, need_grad ? &dlogits : nullptr);
  if (!need_grad) return ev;

  ev.gradients = ModelGradients::zeros_like(model);
  const Matrix djoined = model.classifier().backward(ev.tapes.classifier, dlogits, ev.gradients.classifier);
  if (!wants_interpreters(request)) return ev;
  for (int k = 0; k < m; ++k) {
    model.interpreters()[k].backward(ev.tapes.interpreters[k], djoined.middleCols(k * r, r),
                                     ev.gradients.interpreters[k]);
  }
  return ev;
}

LossEvaluation reconstruction_loss(const ConsensusModel& model, const ModalityBatch& batch, double noise_scale,
                                   Rng& rng, const LossRequest& request) {
  if (!model.has_reconstructors()) throw UsageError("reconstruction loss needs a model with reconstructors");
  if (noise_scale < 0.0) throw ConfigError("noise_scale must be non-negative");
  const int m = model.num_modalities();
  LossEvaluation ev;
  const auto reps = interpret_batch(model, batch, request.mode, &ev.tapes.interpreters);
  const Eigen::Index n = reps[0].rows();
  const double denom = static_cast<double>(n) * m;
  const bool need_grad = request.gradients != ParameterGroup::kNone;
  if (need_grad) ev.gradients = ModelGradients::zeros_like(model);
  ev.tapes.reconstructors.assign(m, {});

  std::normal_distribution<double> eps(0.0, 1.0);
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    Matrix in = reps[k];
    if (noise_scale > 0.0) {
      for (Eigen::Index j = 0; j < in.cols(); ++j)
        for (Eigen::Index i = 0; i < in.rows(); ++i) in(i, j) += noise_scale * eps(rng);
    }
    const Matrix recon = model.reconstructors()[k].forward(in, request.mode, &ev.tapes.reconstructors[k]);
    const Matrix diff = recon - batch[k];
    total += diff.squaredNorm();
    if (!need_grad) continue;
    const Matrix drep = model.reconstructors()[k].backward(ev.tapes.reconstructors[k], (2.0 / denom) * diff,
                                                           ev.gradients.reconstructors[k]);
    if (wants_interpreters(request))
      model.interpreters()[k].backward(ev.tapes.interpreters[k], drep, ev.gradients.interpreters[k]);
  }
  ev.value = total / denom;
  return ev;
}

Matrix concatenated_representations(const ConsensusModel& model, const ModalityBatch& batch) {
  const auto reps = interpret_batch(model, batch, Mode::kEval);
  const int r = model.rep_dim();
  Matrix joined(reps[0].rows(), static_cast<Eigen::Index>(reps.size()) * r);
  for (std::size_t k = 0; k < reps.size(); ++k) joined.middleCols(static_cast<Eigen::Index>(k) * r, r) = reps[k];
  return joined;
}

Matrix predict_batch(const ConsensusModel& model, const ModalityBatch& batch) {
  return nn::softmax_rows(model.classifier().forward(concatenated_representations(model, batch), Mode::kEval));
}

std::array<double, 2> predict(const ConsensusModel& model, std::span<const Vector> sample_blocks) {
  ModalityBatch batch;
  for (const auto& v : sample_blocks) batch.push_back(v.transpose());
  const Matrix p = predict_batch(model, batch);
  return {p(0, 0), p(0, 1)};
}

}  // namespace tcn
