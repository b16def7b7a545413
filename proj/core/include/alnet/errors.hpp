#pragma once

#include <stdexcept>
#include <string>

namespace alnet {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Graph or weight matrix that violates a structural requirement
/// (disconnected, not stochastic, not positive definite, ...).
class NetworkError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Rate certificate whose sufficient conditions do not hold.
class ConditionsViolated : public Error {
 public:
  using Error::Error;
};

}  // namespace alnet
