#pragma once

#include <stdexcept>
#include <string>

namespace cmnl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (parameter length, context width, price count).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter vector or a constraint set violates the model assumptions.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver hit its iteration cap; carries the best residual seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Invalid user configuration (bad key, incompatible policy, unreachable L).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace cmnl
