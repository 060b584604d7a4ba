#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace scanopt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad dimensions, out-of-range parameters, malformed config.
/// Carries the offending key (config key or parameter name) when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
  ConfigError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// File could not be read or written, or has the wrong format.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A caller violated an operation's structural contract (e.g. non-interleaving
/// shifts passed to shift-and-add reconstruction).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure of an otherwise valid computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularModelError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IllConditionedBandError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularMixingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoResolvableFrequencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A scan candidate violates actuator or timing limits.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Every candidate of an optimization grid was infeasible.
class EmptyFeasibleSetError : public Error {
 public:
  using Error::Error;
};

}  // namespace scanopt
