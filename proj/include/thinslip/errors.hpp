#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thinslip {

/// Base class for all errors raised by the toolkit. `kind()` is a stable
/// machine-readable tag used by the CLI error report.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// A physical or numerical parameter is outside its admissible domain.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

/// An operation was called with incompatible arguments.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("usage", what) {}
};

/// Input data cannot be processed (e.g. non-positive values for a log fit).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error("data", what) {}
};

/// An iterative solver failed. Carries the residual history.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : Error("solver", what), history_(std::move(history)) {}
  const std::vector<double>& history() const noexcept { return history_; }
  double last_residual() const noexcept {
    return history_.empty() ? 0.0 : history_.back();
  }

 private:
  std::vector<double> history_;
};

/// Invalid configuration, reported with the offending field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config", field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace thinslip
