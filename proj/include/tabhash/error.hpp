#pragma once

#include <stdexcept>
#include <string>

namespace tabhash {

// Base of every error thrown by the library. Subclasses map onto the CLI
// exit codes (configuration -> 2, io -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EntropyExhausted : public IoError {
 public:
  using IoError::IoError;
};

class InputError : public Error {
 public:
  using Error::Error;
};

// Container has no free slot left.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration or subset search would be too large.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

// Chi-square cell expectation below 5.
class BinningError : public Error {
 public:
  using Error::Error;
};

}  // namespace tabhash
