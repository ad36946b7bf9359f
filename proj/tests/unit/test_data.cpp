#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tcn/data/bank_marketing.hpp"
#include "tcn/data/csv.hpp"
#include "tcn/data/metrics.hpp"
#include "tcn/data/synthetic.hpp"
#include "tcn/errors.hpp"
#include "tcn/nn/adam.hpp"
#include "tcn/nn/loss.hpp"

namespace tcn::data {
namespace {

MultimodalDataset small(std::size_t n = 10) {
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(static_cast<int>(i % 2));
  const auto blocks = oracle::random_batch({2, 3}, static_cast<int>(n), 1);
  return MultimodalDataset(blocks, {"a", "b"}, {{"a1", "a2"}, {"b1", "b2", "b3"}}, labels);
}

TEST(Dataset, IndicesLabelsAndGuard) {
  const auto ds = split_labels(small(), 4, 0);
  EXPECT_EQ(ds.labeled_indices().size(), 4u);
  EXPECT_EQ(ds.unlabeled_indices().size(), 6u);
  EXPECT_EQ(ds.ground_truth_reads(), 0u);
  for (auto r : ds.labeled_indices()) EXPECT_EQ(ds.label(r), static_cast<int>(r % 2));
  EXPECT_THROW(ds.label(ds.unlabeled_indices()[0]), UsageError);
  EXPECT_EQ(ds.ground_truth_reads(), 0u);
  EXPECT_EQ(ds.ground_truth(3), 1);
  EXPECT_EQ(ds.ground_truth_reads(), 1u);
  // A copy starts its own audit.
  const auto copy = ds;
  EXPECT_EQ(copy.ground_truth_reads(), 0u);
}

TEST(Dataset, GatherKeepsRowOrder) {
  const auto ds = small();
  const std::vector<std::size_t> rows = {7, 2, 2};
  const auto batch = ds.gather(rows);
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch[1].row(0), ds.block(1).row(7));
  EXPECT_EQ(batch[0].row(2), ds.block(0).row(2));
  const std::vector<std::size_t> bad = {10};
  EXPECT_THROW(ds.gather(bad), UsageError);
}

TEST(Dataset, ConstructorValidation) {
  const auto blocks = oracle::random_batch({2, 3}, 4, 1);
  EXPECT_THROW(MultimodalDataset(blocks, {"a", "b"}, {{"x", "y"}, {"p", "q", "r"}}, {0, 1, 2, 0}), ConfigError);
  EXPECT_THROW(MultimodalDataset(blocks, {"a", "b"}, {{"x", "y"}, {"p", "q", "r"}}, {0, 1}), ConfigError);
}

TEST(SplitLabels, StratifiedWithinOneSample) {
  std::vector<int> labels;
  for (int i = 0; i < 300; ++i) labels.push_back(i % 3 == 0 ? 1 : 0);  // one third positive
  const auto blocks = oracle::random_batch({1, 1}, 300, 2);
  const MultimodalDataset ds(blocks, {"a", "b"}, {{"x"}, {"y"}}, labels);
  for (std::size_t n : {2u, 7u, 20u, 100u, 299u}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto split = split_labels(ds, n, seed);
      std::size_t pos = 0;
      for (auto r : split.labeled_indices()) pos += static_cast<std::size_t>(split.label(r));
      EXPECT_EQ(split.labeled_indices().size(), n);
      EXPECT_LE(std::abs(static_cast<double>(pos) - static_cast<double>(n) / 3.0), 1.0);
    }
  }
  EXPECT_EQ(split_labels(ds, 20, 4).labeled_mask(), split_labels(ds, 20, 4).labeled_mask());
  EXPECT_NE(split_labels(ds, 20, 4).labeled_mask(), split_labels(ds, 20, 5).labeled_mask());
  EXPECT_THROW(split_labels(ds, 1, 0), UsageError);
  EXPECT_THROW(split_labels(ds, 301, 0), UsageError);
  EXPECT_EQ(ds.ground_truth_reads(), 0u);
}

TEST(Synthetic, ShapesBalanceAndShift) {
  SyntheticSpec spec;
  spec.dims = {4, 6, 5};
  spec.num_samples = 101;
  spec.seed = 3;
  const auto ds = generate_synthetic(spec);
  EXPECT_EQ(ds.size(), 101u);
  EXPECT_EQ(ds.modality_dims(), spec.dims);
  int pos = 0;
  for (int y : ds.raw_labels_for_preparation()) pos += y;
  EXPECT_LE(std::abs(pos - 50), 1);
  for (int m = 0; m < 3; ++m) EXPECT_NEAR(ds.block(m).colwise().minCoeff().maxCoeff(), 0.0, 1e-12);
  EXPECT_TRUE(ds.labeled_indices().empty());
  const auto again = generate_synthetic(spec);
  EXPECT_EQ(again.block(1), ds.block(1));
}

TEST(Synthetic, SeparableSpecIsLearnableByASupervisedMlp) {
  SyntheticSpec spec;
  spec.class_separation = 5.0;
  spec.noise = 0.5;
  spec.seed = 1;
  const auto ds = generate_synthetic(spec);
  Matrix x(static_cast<Eigen::Index>(ds.size()), 30);
  for (int m = 0; m < 3; ++m) x.middleCols(m * 10, 10) = ds.block(m);
  const auto& y = ds.raw_labels_for_preparation();
  nn::Mlp net("mlp", 30, {{16, false, nn::Activation::kRelu}, {2, false, nn::Activation::kIdentity}});
  Rng rng(0);
  net.initialize(rng);
  nn::Adam adam({0.01});
  auto grads = net.make_gradients();
  for (int epoch = 0; epoch < 20; ++epoch) {
    nn::MlpTape tape;
    const Matrix logits = net.forward(x, Mode::kTrain, &tape);
    Matrix d;
    nn::cross_entropy(logits, y, &d);
    grads.set_zero();
    net.backward(tape, d, grads);
    const auto params = net.parameters();
    const auto views = grads.views();
    adam.step(params, views);
  }
  const Matrix logits = net.forward(x, Mode::kEval);
  std::vector<int> pred;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) pred.push_back(logits(i, 1) > logits(i, 0) ? 1 : 0);
  EXPECT_GT(micro_macro_f1(pred, y).micro, 0.95);
}

TEST(Metrics, MatchConfusionMatrixOracle) {
  Rng rng(4);
  std::bernoulli_distribution b(0.4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> p, t;
    for (int i = 0; i < 37; ++i) {
      p.push_back(b(rng));
      t.push_back(b(rng));
    }
    const auto got = micro_macro_f1(p, t);
    const auto [micro, macro] = oracle::confusion_f1(p, t);
    EXPECT_NEAR(got.micro, micro, 1e-12);
    EXPECT_NEAR(got.macro, macro, 1e-12);
  }
}

TEST(Metrics, EdgeCases) {
  const std::vector<int> ones = {1, 1, 1, 1};
  const auto all_right = micro_macro_f1(ones, ones);
  EXPECT_DOUBLE_EQ(all_right.micro, 1.0);
  EXPECT_DOUBLE_EQ(all_right.macro, 0.5);  // absent class contributes 0
  const std::vector<int> truth = {0, 0, 1, 1};
  const auto constant = micro_macro_f1(ones, truth);
  EXPECT_DOUBLE_EQ(constant.micro, 0.5);
  EXPECT_NEAR(constant.macro, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(micro_macro_f1(std::vector<int>{}, std::vector<int>{}), UsageError);
}

TEST(Csv, SplitDelimitedHandlesQuotes) {
  EXPECT_EQ(split_delimited("a;\"b;c\";\"d\"\"e\"", ';'), (std::vector<std::string>{"a", "b;c", "d\"e"}));
  EXPECT_EQ(split_delimited("x,,y", ','), (std::vector<std::string>{"x", "", "y"}));
}

TEST(Csv, MultimodalRoundTrip) {
  const auto ds = split_labels(small(), 4, 1);
  std::stringstream s;
  write_multimodal_csv(ds, s);
  const auto back = read_multimodal_csv(s);
  EXPECT_EQ(back.modality_names(), ds.modality_names());
  EXPECT_EQ(back.feature_names(), ds.feature_names());
  for (int m = 0; m < 2; ++m) EXPECT_EQ(back.block(m), ds.block(m));
  EXPECT_EQ(back.labeled_mask(), ds.labeled_mask());
  EXPECT_EQ(back.raw_labels_for_preparation(), ds.raw_labels_for_preparation());
  std::istringstream bad("a:x,nothing\n1,2\n");
  EXPECT_THROW(read_multimodal_csv(bad), SchemaError);
}

TEST(BankMarketing, EncodingTableWidths) {
  std::array<int, 3> widths{};
  for (const auto& f : bank_encoding_table()) ++widths[static_cast<std::size_t>(f.modality)];
  EXPECT_EQ(widths, (std::array<int, 3>{10, 22, 12}));
  std::set<std::string> names;
  for (const auto& f : bank_encoding_table()) EXPECT_TRUE(names.insert(f.name).second) << f.name;
}

TEST(BankMarketing, FixtureContract) {
  std::stringstream csv;
  oracle::write_bank_fixture(csv, 300, 900, 7);
  BankOptions opt;
  opt.negatives = 320;
  const auto ds = load_bank_marketing(csv, opt);
  EXPECT_EQ(ds.size(), 620u);
  EXPECT_EQ(ds.modality_dims(), (std::vector<int>{10, 22, 12}));
  EXPECT_EQ(ds.modality_names(), bank_modality_names());
  int pos = 0;
  for (int y : ds.raw_labels_for_preparation()) pos += y;
  EXPECT_EQ(pos, 300);
  // z-scored numeric column, 0/1 indicator column.
  const auto age = ds.block(0).col(0);
  EXPECT_NEAR(age.mean(), 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt((age.array() - age.mean()).square().mean()), 1.0, 1e-12);
  for (Eigen::Index i = 0; i < 620; ++i) EXPECT_TRUE(ds.block(0)(i, 6) == 0.0 || ds.block(0)(i, 6) == 1.0);
  // Each job row sets exactly one job indicator across the modalities.
  const std::vector<std::pair<int, int>> job_cols = [] {
    std::vector<std::pair<int, int>> cols;
    std::array<int, 3> idx{};
    for (const auto& f : bank_encoding_table()) {
      if (f.source == "job") cols.push_back({f.modality, idx[static_cast<std::size_t>(f.modality)]});
      ++idx[static_cast<std::size_t>(f.modality)];
    }
    return cols;
  }();
  EXPECT_EQ(job_cols.size(), 12u);
  for (Eigen::Index i = 0; i < 620; ++i) {
    double s = 0.0;
    for (auto [m, c] : job_cols) s += ds.block(m)(i, c);
    EXPECT_EQ(s, 1.0);
  }
}

TEST(BankMarketing, NegativeSamplingIsSeeded) {
  std::stringstream a, b, c;
  oracle::write_bank_fixture(a, 50, 200, 1);
  b.str(a.str());
  c.str(a.str());
  BankOptions opt;
  opt.negatives = 60;
  const auto da = load_bank_marketing(a, opt);
  const auto db = load_bank_marketing(b, opt);
  opt.balance_seed = 9;
  const auto dc = load_bank_marketing(c, opt);
  EXPECT_EQ(da.block(1), db.block(1));
  EXPECT_NE(da.block(1), dc.block(1));
}

TEST(BankMarketing, SchemaAndEncodingErrors) {
  std::stringstream csv;
  oracle::write_bank_fixture(csv, 5, 10, 2);
  const std::string text = csv.str();

  std::string missing = text;
  missing.replace(missing.find("\"euribor3m\""), 11, "\"euribor\"");
  std::istringstream m(missing);
  BankOptions opt;
  opt.negatives = 5;
  EXPECT_THROW(load_bank_marketing(m, opt), SchemaError);

  std::string level = text;
  const auto pos = level.find("\"married\"") != std::string::npos ? level.find("\"married\"") : level.find("\"single\"");
  level.replace(pos, level.find('"', pos + 1) - pos + 1, "\"widowed\"");
  std::istringstream l(level);
  opt.negatives = 10;  // keep every row so the edited one is encoded
  EXPECT_THROW(load_bank_marketing(l, opt), EncodingError);

  std::istringstream short_neg(text);
  opt.negatives = 11;
  EXPECT_THROW(load_bank_marketing(short_neg, opt), SchemaError);
}

}  // namespace
}  // namespace tcn::data
