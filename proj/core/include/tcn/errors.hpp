#pragma once

#include <stdexcept>
#include <string>

namespace tcn {

/// Shape or configuration mismatch detected before any computation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf encountered in inputs, gradients or parameters.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API called out of order or with arguments that violate its contract.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input file does not match the expected column layout.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Categorical value outside the known level set.
class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured dataset could not be loaded; the message names the source.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tcn
