#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "tcn/errors.hpp"
#include "tcn/nn/adam.hpp"
#include "tcn/nn/loss.hpp"
#include "tcn/nn/mlp.hpp"

namespace tcn {
namespace {

using nn::Activation;
using nn::Mlp;

Mlp small_net(bool batch_norm, std::uint64_t seed = 1) {
  Mlp net("net", 4, {{6, batch_norm, Activation::kRelu}, {3, false, Activation::kIdentity}});
  Rng rng(seed);
  net.initialize(rng);
  return net;
}

// Perturbs BN parameters and running stats away from their identity initialization.
void randomize_norms(Mlp& net, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (auto& b : net.blocks()) {
    if (!b.norm) continue;
    for (auto* v : {&b.norm->gamma, &b.norm->running_var}) for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = u(rng);
    for (auto* v : {&b.norm->beta, &b.norm->running_mean})
      for (Eigen::Index i = 0; i < v->size(); ++i) (*v)[i] = u(rng) - 1.0;
  }
}

TEST(Mlp, TrainModeBatchNormStandardizesEachFeature) {
  for (int rows : {8, 13, 64}) {
    Mlp net("bn", 4, {{5, true, Activation::kIdentity}});
    Rng rng(static_cast<std::uint64_t>(rows));
    net.initialize(rng);
    const Matrix x = 3.0 * oracle::random_batch({4}, rows, 2)[0].array() + 1.5;
    const Matrix y = net.forward(x, Mode::kTrain);
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      const double mean = y.col(j).mean();
      const double var = (y.col(j).array() - mean).square().mean();
      EXPECT_LT(std::abs(mean), 1e-6);
      EXPECT_NEAR(var, 1.0, 1e-4);
    }
  }
}

TEST(Mlp, ForwardMatchesNaiveLoops) {
  for (bool bn : {false, true}) {
    auto net = small_net(bn);
    randomize_norms(net, 3);
    const Matrix x = oracle::random_batch({4}, 7, 9)[0];
    for (auto mode : {Mode::kTrain, Mode::kEval}) {
      const Matrix got = net.forward(x, mode);
      const Matrix want = oracle::mlp_forward(net, x, mode == Mode::kTrain);
      EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12) << "bn=" << bn;
    }
  }
}

TEST(Mlp, HeUniformInitializationBounds) {
  Mlp net("net", 50, {{40, true, Activation::kRelu}});
  Rng rng(0);
  net.initialize(rng);
  const auto& b = net.blocks()[0];
  const double bound = std::sqrt(6.0 / 50.0);
  EXPECT_LE(b.dense.weights.cwiseAbs().maxCoeff(), bound);
  EXPECT_GT(b.dense.weights.cwiseAbs().maxCoeff(), 0.9 * bound);
  EXPECT_TRUE(b.dense.bias.isZero());
  EXPECT_TRUE(b.norm->gamma.isOnes());
  EXPECT_TRUE(b.norm->beta.isZero());
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  for (bool bn : {false, true}) {
    for (auto mode : {Mode::kTrain, Mode::kEval}) {
      auto net = small_net(bn, 5);
      randomize_norms(net, 6);
      const Matrix x = oracle::random_batch({4}, 6, 11)[0];
      const Matrix upstream = oracle::random_batch({3}, 6, 12)[0];
      // Scalar objective: sum(upstream .* output).
      const auto f = [&] { return (net.forward(x, mode).array() * upstream.array()).sum(); };
      nn::MlpTape tape;
      net.forward(x, mode, &tape);
      auto grads = net.make_gradients();
      net.backward(tape, upstream, grads);
      auto params = net.parameters();
      const auto views = grads.views();
      for (std::size_t i = 0; i < params.size(); ++i) {
        const auto numeric = oracle::numeric_gradient(params[i].values, f);
        EXPECT_LT(oracle::relative_error(numeric, views[i]), 1e-6) << params[i].name << " bn=" << bn;
      }
    }
  }
}

TEST(Mlp, InputGradientMatchesFiniteDifferences) {
  auto net = small_net(true, 2);
  Matrix x = oracle::random_batch({4}, 5, 3)[0];
  const Matrix upstream = oracle::random_batch({3}, 5, 4)[0];
  const auto f = [&] { return (net.forward(x, Mode::kTrain).array() * upstream.array()).sum(); };
  nn::MlpTape tape;
  net.forward(x, Mode::kTrain, &tape);
  auto grads = net.make_gradients();
  const Matrix dx = net.backward(tape, upstream, grads);
  const auto numeric = oracle::numeric_gradient(nn::flat(x), f);
  EXPECT_LT(oracle::relative_error(numeric, nn::flat(dx)), 1e-6);
}

TEST(Mlp, ForwardIsConstAndRunningStatsUpdateOnlyOnRequest) {
  auto net = small_net(true);
  const Vector before = net.blocks()[0].norm->running_mean;
  const Matrix x = oracle::random_batch({4}, 8, 1)[0];
  nn::MlpTape tape;
  net.forward(x, Mode::kTrain, &tape);
  EXPECT_EQ(net.blocks()[0].norm->running_mean, before);
  net.update_running_stats(tape);
  const auto& rec = tape.blocks[0];
  const Vector want_mean = 0.9 * before + 0.1 * rec.mean;
  const Vector want_var = 0.9 * Vector::Ones(6) + 0.1 * rec.var * (8.0 / 7.0);
  EXPECT_LT((net.blocks()[0].norm->running_mean - want_mean).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((net.blocks()[0].norm->running_var - want_var).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Mlp, SingleRowTrainBatchUsesRunningStats) {
  auto net = small_net(true);
  randomize_norms(net, 8);
  const Matrix x = oracle::random_batch({4}, 1, 1)[0];
  EXPECT_EQ(net.forward(x, Mode::kTrain), net.forward(x, Mode::kEval));
}

TEST(Mlp, Errors) {
  auto net = small_net(false);
  EXPECT_THROW(net.forward(Matrix::Zero(3, 5), Mode::kEval), ConfigError);
  EXPECT_THROW(net.forward(Matrix::Zero(0, 4), Mode::kEval), ConfigError);
  Matrix bad = Matrix::Zero(2, 4);
  bad(1, 2) = std::nan("");
  EXPECT_THROW(net.forward(bad, Mode::kEval), NumericError);
  nn::MlpTape empty;
  auto grads = net.make_gradients();
  EXPECT_THROW(net.backward(empty, Matrix::Zero(2, 3), grads), UsageError);
}

TEST(Loss, SoftmaxRowsAreDistributions) {
  const Matrix logits = oracle::random_batch({5}, 6, 2)[0] * 30.0;
  const Matrix p = nn::softmax_rows(logits);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
    EXPECT_GE(p.row(i).minCoeff(), 0.0);
  }
}

TEST(Loss, CrossEntropyMatchesOracleAndGradient) {
  Matrix logits = oracle::random_batch({4}, 7, 21)[0] * 3.0;
  const std::vector<int> t = {0, 1, 2, 3, 1, 2, 0};
  Matrix grad;
  EXPECT_NEAR(nn::cross_entropy(logits, t, &grad), oracle::cross_entropy(logits, t), 1e-12);
  const auto numeric = oracle::numeric_gradient(nn::flat(logits), [&] { return nn::cross_entropy(logits, t); });
  EXPECT_LT(oracle::relative_error(numeric, nn::flat(grad)), 1e-7);
}

TEST(Loss, CrossEntropyIsStableForLargeLogits) {
  Matrix logits(1, 2);
  logits << 1000.0, -1000.0;
  const std::vector<int> t = {1};
  EXPECT_NEAR(nn::cross_entropy(logits, t), 2000.0, 1e-9);
}

TEST(Adam, FirstStepMatchesHandComputation) {
  Vector p(3);
  p << 1.0, -2.0, 0.5;
  const Vector g = (Vector(3) << 0.3, -0.1, 0.0).finished();
  nn::Adam adam({0.01});
  std::vector<nn::ParameterView> params = {{"p", nn::flat(p)}};
  std::vector<std::span<const double>> grads = {nn::flat(g)};
  const Vector start = p;
  adam.step(params, grads);
  for (int i = 0; i < 3; ++i) {
    // After one step m_hat = g and v_hat = g^2.
    const double want = start[i] - 0.01 * g[i] / (std::abs(g[i]) + 1e-8);
    EXPECT_NEAR(p[i], want, 1e-15);
  }
  adam.step(params, grads);
  EXPECT_EQ(adam.step_count(), 2);
}

TEST(Adam, RejectsNonFiniteGradientWithoutTouchingParameters) {
  Vector a = Vector::Ones(2), b = Vector::Ones(2);
  Vector ga = Vector::Ones(2), gb = Vector::Ones(2);
  gb[1] = std::numeric_limits<double>::infinity();
  nn::Adam adam;
  std::vector<nn::ParameterView> params = {{"a", nn::flat(a)}, {"b", nn::flat(b)}};
  std::vector<std::span<const double>> grads = {nn::flat(ga), nn::flat(gb)};
  try {
    adam.step(params, grads);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
  EXPECT_TRUE(a.isOnes());
  EXPECT_TRUE(b.isOnes());
  EXPECT_EQ(adam.step_count(), 0);
}

}  // namespace
}  // namespace tcn
