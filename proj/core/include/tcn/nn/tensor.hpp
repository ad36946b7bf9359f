#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace tcn::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Rng = std::mt19937_64;

enum class Mode { kTrain, kEval };

/// A named, mutable window onto one parameter tensor.
struct ParameterView {
  std::string name;
  std::span<double> values;
};

inline std::span<double> flat(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
inline std::span<double> flat(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
inline std::span<const double> flat(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
inline std::span<const double> flat(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// splitmix64 finalizer; used to derive independent stream seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace tcn::nn
