#include "tcn/baselines/tri_training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcn/errors.hpp"
#include "tcn/nn/adam.hpp"
#include "tcn/nn/loss.hpp"

namespace tcn::baselines {

void MlpClassifier::fit(const Matrix& x, std::span<const int> y, std::uint64_t seed) {
  if (x.rows() == 0) throw UsageError("mlp classifier: empty training set");
  net_ = nn::Mlp("member", static_cast<int>(x.cols()),
                 {{config_.hidden, false, nn::Activation::kRelu}, {2, false, nn::Activation::kIdentity}});
  Rng rng(nn::mix_seed(seed, 1));
  net_.initialize(rng);
  nn::Adam adam({config_.learning_rate});
  auto grads = net_.make_gradients();
  std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto params = net_.parameters();
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config_.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config_.batch_size));
      Matrix xb(static_cast<Eigen::Index>(end - start), x.cols());
      std::vector<int> yb;
      for (std::size_t k = start; k < end; ++k) {
        xb.row(static_cast<Eigen::Index>(k - start)) = x.row(static_cast<Eigen::Index>(order[k]));
        yb.push_back(y[order[k]]);
      }
      nn::MlpTape tape;
      const Matrix logits = net_.forward(xb, nn::Mode::kTrain, &tape);
      Matrix dlogits;
      nn::cross_entropy(logits, yb, &dlogits);
      grads.set_zero();
      net_.backward(tape, dlogits, grads);
      const auto views = grads.views();
      adam.step(params, views);
    }
  }
  fitted_ = true;
}

std::vector<int> MlpClassifier::predict(const Matrix& x) const {
  if (!fitted_) throw UsageError("mlp classifier: predict before fit");
  const Matrix logits = net_.forward(x, nn::Mode::kEval);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = logits(i, 1) > logits(i, 0) ? 1 : 0;
  return out;
}

Matrix member_features(const data::MultimodalDataset& dataset, const std::vector<int>& view,
                       std::span<const std::size_t> rows) {
  Eigen::Index width = 0;
  for (int m : view) width += dataset.block(m).cols();
  Matrix out(static_cast<Eigen::Index>(rows.size()), width);
  Eigen::Index offset = 0;
  for (int m : view) {
    const auto& b = dataset.block(m);
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.row(static_cast<Eigen::Index>(i)).segment(offset, b.cols()) = b.row(static_cast<Eigen::Index>(rows[i]));
    offset += b.cols();
  }
  return out;
}

namespace {

struct Member {
  std::unique_ptr<BinaryClassifier> model;
  std::vector<int> view;
  Matrix labeled_x;
  Matrix unlabeled_x;
  std::vector<int> labeled_pred;
  std::vector<int> unlabeled_pred;

  void refresh() {
    labeled_pred = model->predict(labeled_x);
    if (unlabeled_x.rows() > 0) unlabeled_pred = model->predict(unlabeled_x);
  }
};

}  // namespace

TriTrainResult tri_train(const data::MultimodalDataset& dataset, const TriTrainConfig& config) {
  const auto labeled = dataset.labeled_indices();
  const auto unlabeled = dataset.unlabeled_indices();
  if (labeled.empty()) throw UsageError("tri-training needs labeled samples");
  if (dataset.num_modalities() < 1) throw UsageError("tri-training needs at least one modality");
  const std::vector<int> y_l = dataset.labels_of(labeled);

  const auto make = [&]() -> std::unique_ptr<BinaryClassifier> {
    if (config.member_factory) return config.member_factory();
    return std::make_unique<MlpClassifier>(config.member);
  };

  TriTrainResult result;
  result.ensemble.per_modality_views = dataset.num_modalities() == 3;
  std::array<Member, 3> members;
  Rng rng(nn::mix_seed(config.seed, 0x7121));
  for (int i = 0; i < 3; ++i) {
    auto& mem = members[i];
    if (result.ensemble.per_modality_views) {
      mem.view = {i};
    } else {
      mem.view.resize(static_cast<std::size_t>(dataset.num_modalities()));
      std::iota(mem.view.begin(), mem.view.end(), 0);
    }
    mem.labeled_x = member_features(dataset, mem.view, labeled);
    mem.unlabeled_x = member_features(dataset, mem.view, unlabeled);
    mem.model = make();

    std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);
    Matrix boot_x(mem.labeled_x.rows(), mem.labeled_x.cols());
    std::vector<int> boot_y(labeled.size());
    for (std::size_t k = 0; k < labeled.size(); ++k) {
      const std::size_t r = pick(rng);
      boot_x.row(static_cast<Eigen::Index>(k)) = mem.labeled_x.row(static_cast<Eigen::Index>(r));
      boot_y[k] = y_l[r];
    }
    mem.model->fit(boot_x, boot_y, nn::mix_seed(config.seed, 100 + static_cast<std::uint64_t>(i)));
    mem.refresh();
  }

  std::array<double, 3> prev_error{0.5, 0.5, 0.5};
  std::array<double, 3> prev_size{0.0, 0.0, 0.0};
  for (int round = 0; round < config.max_rounds; ++round) {
    TriTrainRound info;
    std::array<bool, 3> update{false, false, false};
    std::array<std::vector<std::size_t>, 3> pseudo;  // positions within `unlabeled`
    for (int i = 0; i < 3; ++i) {
      const auto& a = members[(i + 1) % 3];
      const auto& b = members[(i + 2) % 3];
      std::size_t agree = 0, both_wrong = 0;
      for (std::size_t k = 0; k < labeled.size(); ++k) {
        if (a.labeled_pred[k] == b.labeled_pred[k]) {
          ++agree;
          if (a.labeled_pred[k] != y_l[k]) ++both_wrong;
        }
      }
      const double e = agree > 0 ? static_cast<double>(both_wrong) / static_cast<double>(agree) : 1.0;
      info.error[i] = e;
      if (!(e < prev_error[i])) continue;
      for (std::size_t k = 0; k < unlabeled.size(); ++k)
        if (a.unlabeled_pred[k] == b.unlabeled_pred[k]) pseudo[i].push_back(k);
      info.candidates[i] = pseudo[i].size();
      if (prev_size[i] == 0.0) prev_size[i] = std::floor(e / (prev_error[i] - e) + 1.0);
      const double size = static_cast<double>(pseudo[i].size());
      if (prev_size[i] < size) {
        if (e * size < prev_error[i] * prev_size[i]) {
          update[i] = true;
        } else if (prev_size[i] > e / (prev_error[i] - e)) {
          const auto keep = static_cast<std::size_t>(std::ceil(prev_error[i] * prev_size[i] / e - 1.0));
          std::shuffle(pseudo[i].begin(), pseudo[i].end(), rng);
          pseudo[i].resize(std::min(keep, pseudo[i].size()));
          std::sort(pseudo[i].begin(), pseudo[i].end());
          update[i] = true;
        }
      }
    }

    // Pseudo-label sets are fixed against this round's predictions before any member retrains.
    std::array<std::vector<int>, 3> pseudo_labels;
    for (int i = 0; i < 3; ++i) {
      if (!update[i]) continue;
      const auto& a = members[(i + 1) % 3];
      for (auto k : pseudo[i]) pseudo_labels[i].push_back(a.unlabeled_pred[k]);
    }
    for (int i = 0; i < 3; ++i) {
      if (!update[i]) continue;
      auto& mem = members[i];
      Matrix x(static_cast<Eigen::Index>(labeled.size() + pseudo[i].size()), mem.labeled_x.cols());
      x.topRows(mem.labeled_x.rows()) = mem.labeled_x;
      std::vector<int> y = y_l;
      for (std::size_t k = 0; k < pseudo[i].size(); ++k) {
        x.row(static_cast<Eigen::Index>(labeled.size() + k)) = mem.unlabeled_x.row(static_cast<Eigen::Index>(pseudo[i][k]));
        y.push_back(pseudo_labels[i][k]);
      }
      mem.model->fit(x, y, nn::mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(round) * 3 + i));
      info.accepted[i] = pseudo[i].size();
      prev_error[i] = info.error[i];
      prev_size[i] = static_cast<double>(pseudo[i].size());
    }
    for (int i = 0; i < 3; ++i)
      if (update[i]) members[i].refresh();
    result.rounds.push_back(info);
    if (!update[0] && !update[1] && !update[2]) {
      result.converged = true;
      break;
    }
  }

  for (int i = 0; i < 3; ++i) {
    result.ensemble.members[i] = std::move(members[i].model);
    result.ensemble.views[i] = members[i].view;
  }
  return result;
}

std::vector<int> tri_predict(const TriTrainEnsemble& ensemble, const data::MultimodalDataset& dataset,
                             std::span<const std::size_t> rows) {
  std::array<std::vector<int>, 3> votes;
  for (int i = 0; i < 3; ++i) {
    if (!ensemble.members[i]) throw UsageError("tri_predict: ensemble member missing");
    votes[i] = ensemble.members[i]->predict(member_features(dataset, ensemble.views[i], rows));
  }
  std::vector<int> out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) out[k] = majority_vote(votes[0][k], votes[1][k], votes[2][k]);
  return out;
}

}  // namespace tcn::baselines
