#pragma once

#include <stdexcept>
#include <string>

namespace paota {

/// Bad arguments or violated preconditions (wrong sizes, unsupported
/// multiplicity, nonpositive parameters).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimension mismatch between inputs that are otherwise well formed.
class DimensionMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Numerical failure: rank deficiency, ill-conditioned basis.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficient : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InvalidBasis : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// File access or parse failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace paota
