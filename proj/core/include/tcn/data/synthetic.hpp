#pragma once

#include <cstdint>
#include <vector>

#include "tcn/data/dataset.hpp"

namespace tcn::data {

struct SyntheticSpec {
  std::vector<int> dims = {10, 10, 10};  // one entry per modality
  std::size_t num_samples = 1000;
  double class_separation = 1.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

/// Balanced binary data. In modality m, a sample of class y is drawn from
/// N((2y - 1) * class_separation * u_m, noise^2 I) with u_m a random unit
/// direction; every column is then shifted so its minimum is zero.
/// All rows carry ground truth; none are marked labeled.
MultimodalDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace tcn::data
