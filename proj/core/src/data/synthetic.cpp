#include "tcn/data/synthetic.hpp"

#include <algorithm>

#include "tcn/errors.hpp"

namespace tcn::data {

MultimodalDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.dims.size() < 2) throw ConfigError("synthetic data needs at least two modalities");
  if (spec.num_samples < 10) throw ConfigError("synthetic data needs at least ten samples");
  if (spec.noise < 0.0 || spec.class_separation < 0.0) throw ConfigError("separation and noise must be non-negative");
  for (int d : spec.dims)
    if (d <= 0) throw ConfigError("modality dimensions must be positive");

  Rng rng(nn::mix_seed(spec.seed, 0x5e7));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(spec.num_samples);

  std::vector<int> labels(spec.num_samples);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i < spec.num_samples / 2 ? 0 : 1;
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<Matrix> blocks;
  std::vector<std::vector<std::string>> feature_names;
  std::vector<std::string> modality_names;
  for (std::size_t m = 0; m < spec.dims.size(); ++m) {
    const int d = spec.dims[m];
    Vector u(d);
    do {
      for (int j = 0; j < d; ++j) u[j] = gauss(rng);
    } while (u.norm() < 1e-12);
    u.normalize();

    Matrix b(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sign = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
      for (int j = 0; j < d; ++j) b(i, j) = sign * spec.class_separation * u[j] + spec.noise * gauss(rng);
    }
    b.rowwise() -= b.colwise().minCoeff();
    blocks.push_back(std::move(b));

    std::vector<std::string> names;
    for (int j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
    feature_names.push_back(std::move(names));
    modality_names.push_back("m" + std::to_string(m + 1));
  }
  return MultimodalDataset(std::move(blocks), std::move(modality_names), std::move(feature_names), std::move(labels));
}

}  // namespace tcn::data
