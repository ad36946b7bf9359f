#include "tcn/linear_svm.hpp"

#include "tcn/errors.hpp"

namespace tcn::svm {

namespace {

void check_inputs(const Matrix& x, std::span<const int> y) {
  if (x.rows() == 0) throw UsageError("svm: no training samples");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw UsageError("svm: label count does not match rows");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw UsageError("svm: labels must be +1 or -1");
  }
  if (!pos || !neg) throw UsageError("svm: both classes must be present");
  if (!x.allFinite()) throw NumericError("svm: non-finite features");
}

}  // namespace

double svm_objective(const Matrix& x, std::span<const int> y, const Vector& w, double b, double lambda) {
  const Vector margins = x * w;
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * (margins[i] + b));
  return 0.5 * lambda * w.squaredNorm() + hinge / static_cast<double>(x.rows());
}

LinearSvmModel fit_svm(const Matrix& x, std::span<const int> y, const SvmConfig& config) {
  check_inputs(x, y);
  if (!(config.regularization > 0.0)) throw UsageError("svm: regularization must be positive");
  if (config.epochs < 0) throw UsageError("svm: epochs must be non-negative");
  const double lambda = config.regularization;
  const double n = static_cast<double>(x.rows());

  LinearSvmModel model;
  model.regularization = lambda;
  model.weights = Vector::Zero(x.cols());
  double obj = svm_objective(x, y, model.weights, model.bias, lambda);
  model.objective_history.push_back(obj);

  for (int t = 1; t <= config.epochs; ++t) {
    const Vector margins = x * model.weights;
    Vector gw = lambda * model.weights;
    double gb = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double yi = y[static_cast<std::size_t>(i)];
      if (yi * (margins[i] + model.bias) < 1.0) {
        gw -= (yi / n) * x.row(i).transpose();
        gb -= yi / n;
      }
    }
    double eta = 1.0 / (lambda * t);
    for (int attempt = 0; attempt < 40; ++attempt, eta *= 0.5) {
      const Vector w_new = model.weights - eta * gw;
      const double b_new = model.bias - eta * gb;
      const double cand = svm_objective(x, y, w_new, b_new, lambda);
      if (cand < obj) {
        model.weights = w_new;
        model.bias = b_new;
        obj = cand;
        break;
      }
    }
    model.objective_history.push_back(obj);
  }
  return model;
}

std::vector<int> predict_svm(const LinearSvmModel& model, const Matrix& features) {
  if (features.cols() != model.weights.size()) throw ConfigError("svm: feature dimension mismatch");
  const Vector scores = features * model.weights;
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) out[static_cast<std::size_t>(i)] = scores[i] + model.bias >= 0.0 ? 1 : -1;
  return out;
}

}  // namespace tcn::svm
