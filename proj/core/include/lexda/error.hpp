#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lexda {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside an operation's mathematical domain (e.g. log of 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A statistic with no defined value, e.g. Pearson over constant input.
class UndefinedMetricError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A forward value became NaN or infinite.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyperparameters or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Index outside a vocabulary or label set.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range corpus data. Carries the 1-based line number
/// when one is known (0 otherwise).
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Checkpoint file unreadable or incompatible with the model.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace lexda
