#pragma once

#include <filesystem>
#include <iosfwd>

#include "tcn/model/consensus_model.hpp"

namespace tcn {

/// Checkpoint layout (text, version 1):
///
///   tcn-checkpoint 1
///   config <single-line JSON ModelConfig>
///   tensor <name> <rows> <cols>
///   <rows*cols shortest-round-trip doubles, column-major, space separated>
///   ...
///   end
///
/// Tensors appear in ConsensusModel::networks() order; each block writes
/// weight, bias, and for batch-norm blocks gamma, beta, running_mean,
/// running_var. Loading rebuilds the model from the config and checks every
/// tensor name and shape.
void save_checkpoint(const ConsensusModel& model, std::ostream& out);
void save_checkpoint(const ConsensusModel& model, const std::filesystem::path& path);
ConsensusModel load_checkpoint(std::istream& in);
ConsensusModel load_checkpoint(const std::filesystem::path& path);

}  // namespace tcn
