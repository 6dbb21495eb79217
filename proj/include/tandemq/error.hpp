#pragma once

#include <stdexcept>
#include <string>

namespace tandemq {

// Base of every error thrown by the library. The CLI maps the subclasses onto
// exit codes (config -> 2, unstable -> 1, numerical -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnstableError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// A removable singularity was requested but the leading coefficients did not
// cancel to the configured tolerance.
class CancellationError : public NumericalError {
 public:
  CancellationError(const std::string& what, double residual)
      : NumericalError(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A root-location statement (unique root in the unit disk, one branch point in
// (0,1), ...) failed numerically.
class RootCountError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tandemq
