#pragma once

#include <stdexcept>
#include <string>

namespace glasscape {

/// Process exit codes used by the command line tool.
enum class ExitCode : int { ok = 0, usage = 1, numeric = 2, precondition = 3, resource = 4 };

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad input values or malformed files.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& w) : Error(ExitCode::usage, w) {}
};

/// Argument outside the domain of a formula.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& w) : Error(ExitCode::precondition, w) {}
};

/// Derivative order beyond what is implemented.
class UnsupportedOrder : public DomainError {
 public:
  explicit UnsupportedOrder(const std::string& w) : DomainError(w) {}
};

/// A covariance matrix that should be invertible is not (pure mixtures).
class DegenerateCovariance : public Error {
 public:
  explicit DegenerateCovariance(const std::string& w) : Error(ExitCode::precondition, w) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& w) : Error(ExitCode::precondition, w) {}
};

/// Root finder or maximizer failed to bracket or converge.
class NumericFailure : public Error {
 public:
  explicit NumericFailure(const std::string& w) : Error(ExitCode::numeric, w) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& w) : Error(ExitCode::resource, w) {}
};

}  // namespace glasscape
