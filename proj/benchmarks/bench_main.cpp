#include <benchmark/benchmark.h>

#include "tcn/data/dataset.hpp"
#include "tcn/data/synthetic.hpp"
#include "tcn/model/consensus_model.hpp"
#include "tcn/similarity.hpp"
#include "tcn/training/trainer.hpp"

namespace {

using namespace tcn;

data::MultimodalDataset synthetic(std::size_t n) {
  data::SyntheticSpec spec;
  spec.num_samples = n;
  return data::split_labels(data::generate_synthetic(spec), 20, 0);
}

ModalityBatch random_batch(const std::vector<int>& dims, int rows, std::uint64_t seed) {
  ModalityBatch batch;
  Rng rng(seed);
  std::normal_distribution<double> z;
  for (int d : dims) {
    Matrix m(rows, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
    batch.push_back(m);
  }
  return batch;
}

void BM_MlpForwardBackward(benchmark::State& state) {
  nn::Mlp net("bench", 32, {{64, true, nn::Activation::kRelu}, {16, false, nn::Activation::kRelu}});
  Rng rng(1);
  net.initialize(rng);
  const Matrix x = Matrix::Random(state.range(0), 32);
  auto grads = net.make_gradients();
  for (auto _ : state) {
    nn::MlpTape tape;
    const Matrix y = net.forward(x, Mode::kTrain, &tape);
    grads.set_zero();
    benchmark::DoNotOptimize(net.backward(tape, Matrix::Ones(y.rows(), y.cols()), grads));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(10)->Arg(100)->Arg(1000);

void BM_DiscriminationLossGradient(benchmark::State& state) {
  ModelConfig mc;
  mc.modality_dims = {10, 10, 10};
  const ConsensusModel model(mc, 0);
  const auto batch = random_batch(mc.modality_dims, static_cast<int>(state.range(0)), 2);
  Rng rng(3);
  for (auto _ : state) {
    auto ev = discrimination_loss(model, batch, rng, {Mode::kTrain, ParameterGroup::kInterpreters});
    benchmark::DoNotOptimize(ev.value);
  }
}
BENCHMARK(BM_DiscriminationLossGradient)->Arg(10)->Arg(100);

void BM_DatasetSimilarity(benchmark::State& state) {
  const auto ds = synthetic(static_cast<std::size_t>(state.range(0)));
  ModelConfig mc;
  mc.modality_dims = ds.modality_dims();
  const ConsensusModel model(mc, 0);
  for (auto _ : state) benchmark::DoNotOptimize(dataset_similarity(model, ds).overall);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DatasetSimilarity)->Arg(100)->Arg(1000);

void BM_TcnEpoch(benchmark::State& state) {
  const auto ds = synthetic(1000);
  training::TrainingConfig cfg;
  auto model = training::make_model(ds, cfg);
  training::TrainingSession session(model, ds, cfg, 0);
  for (auto _ : state) {
    session.step_interpreters();
    session.step_discriminator();
    benchmark::DoNotOptimize(session.step_classification());
  }
}
BENCHMARK(BM_TcnEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
