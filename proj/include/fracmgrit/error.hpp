#pragma once

#include <stdexcept>
#include <string>

namespace fracmgrit {

enum class ErrorCode {
  invalid_argument = 1,
  convergence_failure,
  numerical_breakdown,
  cap_exceeded,
  insufficient_data,
  invariant_violation,
  io,
};

const char* to_string(ErrorCode code) noexcept;

/// Base of every exception thrown by the library. The code maps 1:1 onto
/// the status values of the C interface.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorCode::invalid_argument, what) {}
};

/// Iterative method ran out of iterations; carries the last residual norm.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double final_residual)
      : Error(ErrorCode::convergence_failure, what),
        final_residual_(final_residual) {}
  double final_residual() const noexcept { return final_residual_; }

 private:
  double final_residual_;
};

class NumericalBreakdown : public Error {
 public:
  explicit NumericalBreakdown(const std::string& what)
      : Error(ErrorCode::numerical_breakdown, what) {}
};

class CapExceeded : public Error {
 public:
  explicit CapExceeded(const std::string& what)
      : Error(ErrorCode::cap_exceeded, what) {}
};

class InsufficientData : public Error {
 public:
  explicit InsufficientData(const std::string& what)
      : Error(ErrorCode::insufficient_data, what) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what)
      : Error(ErrorCode::invariant_violation, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

}  // namespace fracmgrit
