#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cmdp {

enum class ErrorKind {
  Malformed,
  SizeExceeded,
  DanglingState,
  Mismatch,
  NotASubprocess,
  NotIndependent,
  NonCommuting,
  RewardClash,
  PreconditionFailed,
  BudgetExceeded,
  NotAutomorphism,
  InconsistentOrbit,
  NotInvariant,
  IndexOutOfRange,
  EmptiedBridge,
  MaxIterExceeded,
  SolverDiverged,
  OutOfBounds,
  RegionOnObstacle,
  EmptyOverlap,
  SyntaxError,
  SemanticError,
  UnboundName,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& what)
      : Error(ErrorKind::SyntaxError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace cmdp
