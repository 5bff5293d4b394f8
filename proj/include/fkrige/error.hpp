#pragma once

#include <stdexcept>
#include <string>

namespace fkrige {

/// Base class for all recoverable failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a basis or model.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SmoothingError : public Error {
 public:
  using Error::Error;
};

class VariogramError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class SolveError : public Error {
 public:
  using Error::Error;
};

class CvError : public Error {
 public:
  using Error::Error;
};

class SimError : public Error {
 public:
  using Error::Error;
};

/// Raised when a caller breaks a documented precondition (mismatched
/// lengths, out-of-range indices, invalid configuration values).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace fkrige
