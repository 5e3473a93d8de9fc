#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dephaskit {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was not met by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (e.g. |kappa| > 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class UnknownPresetError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Tomographic reconstruction produced a Choi matrix outside the PSD cone.
class NonPhysicalChannelError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, double primal_residual, double dual_residual, double gap)
      : Error(what + " (primal residual " + std::to_string(primal_residual) + ", dual residual " +
              std::to_string(dual_residual) + ", gap " + std::to_string(gap) + ")"),
        primal_residual_(primal_residual),
        dual_residual_(dual_residual),
        gap_(gap) {}

  double primal_residual() const noexcept { return primal_residual_; }
  double dual_residual() const noexcept { return dual_residual_; }
  double gap() const noexcept { return gap_; }

 private:
  double primal_residual_;
  double dual_residual_;
  double gap_;
};

}  // namespace dephaskit
