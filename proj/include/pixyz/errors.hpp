#pragma once

#include <stdexcept>
#include <string>

namespace pixyz {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Problem too large for the requested (dense or full-basis) path.
class ResourceLimitError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to reach its target.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// The steady state is not unique (e.g. collective-only dissipation).
class MultiplicityError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A symmetry the caller relied on (PT mirror, Z2) was not found.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

}  // namespace pixyz
