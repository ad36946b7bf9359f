#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace tcn::oracle {

Matrix mlp_forward(const nn::Mlp& net, const Matrix& x, bool batch_stats) {
  Matrix cur = x;
  for (const auto& b : net.blocks()) {
    const auto& w = b.dense.weights;
    Matrix z(cur.rows(), w.rows());
    for (Eigen::Index i = 0; i < cur.rows(); ++i)
      for (Eigen::Index o = 0; o < w.rows(); ++o) {
        double s = b.dense.bias[o];
        for (Eigen::Index k = 0; k < w.cols(); ++k) s += w(o, k) * cur(i, k);
        z(i, o) = s;
      }
    if (b.norm) {
      const auto& bn = *b.norm;
      const bool use_batch = batch_stats && z.rows() > 1;
      for (Eigen::Index o = 0; o < z.cols(); ++o) {
        double mean = bn.running_mean[o], var = bn.running_var[o];
        if (use_batch) {
          mean = 0.0;
          for (Eigen::Index i = 0; i < z.rows(); ++i) mean += z(i, o);
          mean /= static_cast<double>(z.rows());
          var = 0.0;
          for (Eigen::Index i = 0; i < z.rows(); ++i) var += (z(i, o) - mean) * (z(i, o) - mean);
          var /= static_cast<double>(z.rows());
        }
        for (Eigen::Index i = 0; i < z.rows(); ++i)
          z(i, o) = bn.gamma[o] * (z(i, o) - mean) / std::sqrt(var + bn.epsilon) + bn.beta[o];
      }
    }
    if (b.activation == nn::Activation::kRelu)
      for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = z.data()[i] > 0.0 ? z.data()[i] : 0.0;
    cur = z;
  }
  return cur;
}

double cross_entropy(const Matrix& logits, std::span<const int> targets) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < logits.cols(); ++j) mx = std::max(mx, logits(i, j));
    double s = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) s += std::exp(logits(i, j) - mx);
    total += -(logits(i, targets[static_cast<std::size_t>(i)]) - mx - std::log(s));
  }
  return total / static_cast<double>(logits.rows());
}

std::vector<double> pmf(const Vector& v, double smoothing) {
  std::vector<double> p(static_cast<std::size_t>(v.size()));
  double s = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    p[static_cast<std::size_t>(j)] = v[j] + smoothing;
    s += p[static_cast<std::size_t>(j)];
  }
  for (auto& x : p) x /= s;
  return p;
}

double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += p[j] * std::log(p[j] / q[j]);
  return s;
}

double entropy(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p) s -= x * std::log(x);
  return s;
}

double similarity(const std::vector<Matrix>& reps, double smoothing) {
  const auto m = reps.size();
  double pair_sum = 0.0;
  int pairs = 0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      double sample_sum = 0.0;
      for (Eigen::Index i = 0; i < reps[a].rows(); ++i) {
        const auto p = pmf(reps[a].row(i).transpose(), smoothing);
        const auto q = pmf(reps[b].row(i).transpose(), smoothing);
        sample_sum += (kl(p, q) + kl(q, p)) / (2.0 * (entropy(p) + entropy(q)));
      }
      pair_sum += sample_sum / static_cast<double>(reps[a].rows());
      ++pairs;
    }
  return -pair_sum / pairs;
}

double discrimination_loss(const ConsensusModel& model, const ModalityBatch& batch, const Matrix& noise_values) {
  const int m = model.num_modalities();
  double total = 0.0;
  int count = 0;
  for (int k = 0; k <= m; ++k) {
    const Matrix reps = k < m ? mlp_forward(model.interpreters()[k], batch[k], false) : noise_values;
    const Matrix logits = mlp_forward(model.discriminator(), reps, false);
    const std::vector<int> targets(static_cast<std::size_t>(reps.rows()), k);
    total += cross_entropy(logits, targets) * static_cast<double>(reps.rows());
    count += static_cast<int>(reps.rows());
  }
  return total / count;
}

double classification_loss(const ConsensusModel& model, const ModalityBatch& batch, std::span<const int> labels) {
  const int m = model.num_modalities();
  const int r = model.rep_dim();
  const Eigen::Index n = batch[0].rows();
  Matrix joined(n, m * r);
  for (int k = 0; k < m; ++k) {
    const Matrix v = mlp_forward(model.interpreters()[k], batch[k], false);
    for (Eigen::Index i = 0; i < n; ++i)
      for (int j = 0; j < r; ++j) joined(i, k * r + j) = v(i, j);
  }
  return cross_entropy(mlp_forward(model.classifier(), joined, false), labels);
}

double reconstruction_loss(const ConsensusModel& model, const ModalityBatch& batch) {
  const int m = model.num_modalities();
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    const Matrix v = mlp_forward(model.interpreters()[k], batch[k], false);
    const Matrix x = mlp_forward(model.reconstructors()[k], v, false);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < x.cols(); ++j) s += (x(i, j) - batch[k](i, j)) * (x(i, j) - batch[k](i, j));
      total += s;
    }
  }
  return total / (static_cast<double>(batch[0].rows()) * m);
}

std::vector<double> numeric_gradient(std::span<double> param, const std::function<double()>& f, double h) {
  std::vector<double> g(param.size());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double saved = param[i];
    param[i] = saved + h;
    const double up = f();
    param[i] = saved - h;
    const double down = f();
    param[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::max(std::sqrt(na), std::sqrt(nb));
  if (scale < floor) return 0.0;
  return std::sqrt(diff) / scale;
}

SvmGridOptimum svm_grid_search(const Matrix& x, std::span<const int> labels, double regularization, double half_width,
                               int points_per_axis) {
  SvmGridOptimum best{std::numeric_limits<double>::infinity()};
  const double step = 2.0 * half_width / (points_per_axis - 1);
  for (int a = 0; a < points_per_axis; ++a) {
    const double w1 = -half_width + a * step;
    for (int b = 0; b < points_per_axis; ++b) {
      const double w2 = -half_width + b * step;
      const double reg = 0.5 * regularization * (w1 * w1 + w2 * w2);
      if (reg >= best.objective) continue;
      for (int c = 0; c < points_per_axis; ++c) {
        const double bias = -half_width + c * step;
        double hinge = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          const double margin = labels[static_cast<std::size_t>(i)] * (w1 * x(i, 0) + w2 * x(i, 1) + bias);
          hinge += margin < 1.0 ? 1.0 - margin : 0.0;
        }
        const double obj = reg + hinge / static_cast<double>(x.rows());
        if (obj < best.objective) best = {obj, w1, w2, bias};
      }
    }
  }
  return best;
}

std::pair<double, double> confusion_f1(std::span<const int> predicted, std::span<const int> truth) {
  double cm[2][2] = {{0, 0}, {0, 0}};  // [truth][predicted]
  for (std::size_t i = 0; i < truth.size(); ++i) cm[truth[i]][predicted[i]] += 1.0;
  double per_class[2];
  for (int c = 0; c < 2; ++c) {
    const double tp = cm[c][c];
    const double fp = cm[1 - c][c];
    const double fn = cm[c][1 - c];
    per_class[c] = tp + fp + fn > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
  }
  const double tp = cm[0][0] + cm[1][1];
  const double total = cm[0][0] + cm[0][1] + cm[1][0] + cm[1][1];
  // Pooled over both classes every error is one FP and one FN, so micro-F1 is accuracy.
  const double micro = 2 * tp / (2 * tp + 2 * (total - tp));
  return {micro, 0.5 * (per_class[0] + per_class[1])};
}

void write_bank_fixture(std::ostream& out, std::size_t positives, std::size_t negatives, std::uint64_t seed) {
  const char* header[] = {"age",      "job",          "marital",        "education",     "default",
                          "housing",  "loan",         "contact",        "month",         "day_of_week",
                          "duration", "campaign",     "pdays",          "previous",      "poutcome",
                          "emp.var.rate", "cons.price.idx", "cons.conf.idx", "euribor3m", "nr.employed", "y"};
  const std::vector<const char*> job = {"admin.",  "blue-collar", "entrepreneur",  "housemaid", "management",
                                        "retired", "self-employed", "services",    "student",   "technician",
                                        "unemployed", "unknown"};
  const std::vector<const char*> marital = {"divorced", "married", "single", "unknown"};
  const std::vector<const char*> education = {"basic.4y",    "basic.6y",           "basic.9y", "high.school",
                                              "illiterate", "professional.course", "university.degree", "unknown"};
  const std::vector<const char*> yn = {"no", "yes", "unknown"};
  const std::vector<const char*> contact = {"cellular", "telephone"};
  const std::vector<const char*> month = {"mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  const std::vector<const char*> day = {"mon", "tue", "wed", "thu", "fri"};
  const std::vector<const char*> poutcome = {"failure", "nonexistent", "success"};

  std::mt19937_64 rng(seed);
  const auto pick = [&](const std::vector<const char*>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  const auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  for (std::size_t i = 0; i < std::size(header); ++i) out << (i ? ";" : "") << '"' << header[i] << '"';
  out << '\n';
  // Interleave classes so positives are not a contiguous block.
  std::vector<int> ys(positives, 1);
  ys.insert(ys.end(), negatives, 0);
  std::shuffle(ys.begin(), ys.end(), rng);
  for (int y : ys) {
    out << integer(17, 98) << ";\"" << pick(job) << "\";\"" << pick(marital) << "\";\"" << pick(education)
        << "\";\"" << pick(yn) << "\";\"" << pick(yn) << "\";\"" << pick(yn) << "\";\"" << pick(contact) << "\";\""
        << pick(month) << "\";\"" << pick(day) << "\";" << integer(0, 4918) << ';' << integer(1, 56) << ';'
        << (integer(0, 9) == 0 ? integer(0, 27) : 999) << ';' << integer(0, 7) << ";\"" << pick(poutcome) << "\";"
        << uniform(-3.4, 1.4) << ';' << uniform(92.2, 94.8) << ';' << uniform(-50.8, -26.9) << ';'
        << uniform(0.6, 5.1) << ';' << uniform(4963.6, 5228.1) << ";\"" << (y ? "yes" : "no") << "\"\n";
  }
}

ModalityBatch random_batch(const std::vector<int>& dims, int rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  ModalityBatch batch;
  for (int d : dims) {
    Matrix m(rows, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
    batch.push_back(std::move(m));
  }
  return batch;
}

RandomProblem random_problem(std::uint64_t seed, int num_modalities, int rows) {
  std::mt19937_64 rng(seed);
  RandomProblem p;
  for (int k = 0; k < num_modalities; ++k) p.config.modality_dims.push_back(std::uniform_int_distribution<int>(2, 5)(rng));
  p.config.arch = {3, 5, 4, 4, 5};
  p.config.with_reconstructors = true;
  p.batch = random_batch(p.config.modality_dims, rows, seed + 1);
  for (int i = 0; i < rows; ++i) p.labels.push_back(i % 2);
  return p;
}

}  // namespace tcn::oracle

namespace tcn::oracle {

double max_gradient_error(ConsensusModel& model, ParameterGroup groups, Mode mode, const LossFn& loss, double h) {
  const auto analytic = loss({mode, groups});
  const auto value = [&] { return loss({mode, ParameterGroup::kNone}).value; };
  double worst = 0.0;
  const auto check = [&](nn::Mlp& net, const nn::MlpGradients& grads) {
    auto params = net.parameters();
    const auto views = grads.views();
    for (std::size_t i = 0; i < params.size(); ++i)
      worst = std::max(worst, relative_error(numeric_gradient(params[i].values, value, h), views[i]));
  };
  const int m = model.num_modalities();
  if (has_group(groups, ParameterGroup::kInterpreters))
    for (int k = 0; k < m; ++k) check(model.interpreters()[k], analytic.gradients.interpreters[k]);
  if (has_group(groups, ParameterGroup::kDiscriminator)) check(model.discriminator(), analytic.gradients.discriminator);
  if (has_group(groups, ParameterGroup::kClassifier)) check(model.classifier(), analytic.gradients.classifier);
  if (has_group(groups, ParameterGroup::kReconstructors))
    for (std::size_t k = 0; k < model.reconstructors().size(); ++k)
      check(model.reconstructors()[k], analytic.gradients.reconstructors[k]);
  return worst;
}

void randomize_norms(ConsensusModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (auto* net : model.networks())
    for (auto& b : net->blocks()) {
      if (!b.norm) continue;
      for (auto* v : {&b.norm->gamma, &b.norm->running_var})
        for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = u(rng);
      for (auto* v : {&b.norm->beta, &b.norm->running_mean})
        for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = u(rng) - 1.0;
    }
}

void randomize_biases(ConsensusModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (auto* net : model.networks())
    for (auto& b : net->blocks())
      for (Eigen::Index i = 0; i < b.dense.bias.size(); ++i) b.dense.bias[i] = u(rng);
}

}  // namespace tcn::oracle
