#pragma once

#include <stdexcept>
#include <string>

namespace mmfe {

/// Base class for every error raised by the library. `category()` is a short
/// machine-parsable tag that the CLI prints on failure.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

class InvalidHorizonError : public Error {
 public:
  explicit InvalidHorizonError(const std::string& what) : Error("invalid-horizon", what) {}
};

class IncompleteArrayError : public Error {
 public:
  explicit IncompleteArrayError(const std::string& what) : Error("incomplete-array", what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_residual, long iterations)
      : Error("non-convergence", what), last_residual_(last_residual), iterations_(iterations) {}

  double last_residual() const noexcept { return last_residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double last_residual_;
  long iterations_;
};

class InstabilityError : public Error {
 public:
  explicit InstabilityError(const std::string& what) : Error("instability", what) {}
};

class UndefinedMetricError : public Error {
 public:
  explicit UndefinedMetricError(const std::string& what) : Error("undefined-metric", what) {}
};

class MalformedKernelError : public Error {
 public:
  explicit MalformedKernelError(const std::string& what) : Error("malformed-kernel", what) {}
};

class DiscretizationError : public Error {
 public:
  explicit DiscretizationError(const std::string& what) : Error("discretization", what) {}
};

class SizeError : public Error {
 public:
  explicit SizeError(const std::string& what) : Error("size", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace mmfe
