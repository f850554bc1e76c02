#pragma once

#include <stdexcept>
#include <string>

namespace atomlab {

/// Argument outside the supported range (grid depth, level, order caps).
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A hypothesis required by an operation does not hold.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed configuration or input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iteration failed to converge or produced non-finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace atomlab
