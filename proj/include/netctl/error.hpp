#pragma once

#include <stdexcept>
#include <string>

namespace netctl {

/// Failure categories; the CLI maps each one to its exit code.
enum class ErrorKind {
  kConfig = 2,
  kGeneration = 3,
  kControllability = 4,
  kSolver = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& what)
      : Error(ErrorKind::kGeneration, what) {}
};

/// Raised when a Gramian's smallest eigenvalue falls below the precision
/// threshold. Carries the offending eigenvalue as a decimal string.
class ControllabilityError : public Error {
 public:
  ControllabilityError(const std::string& what, std::string mu1)
      : Error(ErrorKind::kControllability, what), mu1_(std::move(mu1)) {}

  const std::string& mu1() const { return mu1_; }

 private:
  std::string mu1_;
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(ErrorKind::kSolver, what) {}
};

// Eigensolver non-convergence, defective spectra, interlacing faults.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kSolver, what) {}
};

}  // namespace netctl
