#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace curemix {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested column missing from the input.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Malformed cell in a data file; `row()` is the 1-based data row (header excluded).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Invalid dataset contents (n too small, no events, non-conformable vectors).
class DataError : public Error {
 public:
  using Error::Error;
};

// Continuous covariate with zero spread.
class DegenerateCovariateError : public Error {
 public:
  using Error::Error;
};

// Invalid option or scenario.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Zero total kernel weight at a query point.
class EmptyNeighborhoodError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown (zero risk-set denominator, non-finite values).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Newton system could not be solved (rank-deficient design).
class SingularHessianError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Bootstrap or test could not produce a result.
class InferenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace curemix
