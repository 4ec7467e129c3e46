#pragma once

#include <stdexcept>
#include <string>

namespace nodal {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-readable tag used by the CLI's error records.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

/// Invalid parameters (alpha outside [0,1], empty degree window, ...).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// A request that would exceed the configured memory budget.
class ResourceError : public Error {
public:
  explicit ResourceError(const std::string& what) : Error("resource", what) {}
};

/// Caller violated an operation's precondition.
class PreconditionError : public Error {
public:
  explicit PreconditionError(const std::string& what) : Error("precondition", what) {}
};

/// Internal consistency check failed; indicates a bug in extraction.
class InvariantError : public Error {
public:
  explicit InvariantError(const std::string& what) : Error("invariant", what) {}
};

class UnsupportedError : public Error {
public:
  explicit UnsupportedError(const std::string& what) : Error("unsupported", what) {}
};

/// A nodal component that cannot be counted (clipped, or its inside reaches
/// the window boundary).
class NotCountableError : public Error {
public:
  explicit NotCountableError(const std::string& what) : Error("not_countable", what) {}
};

/// Numerical failure (ill-conditioned fit, insufficient tail mass, ...).
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace nodal
