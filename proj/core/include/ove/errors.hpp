#pragma once

#include <stdexcept>
#include <string>

namespace ove {

/// Precondition or configuration violation (bad index, bad shape, bad flag).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-convergence, NaN/Inf in parameters, or another numerical breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, checkpoints, label lists).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ove
