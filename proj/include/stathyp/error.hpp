#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stathyp {

enum class ErrorKind {
  Syntax,
  DimensionMismatch,
  UnknownIdentifier,
  InvalidArgument,
  NonFinite,
  SingularPivot,
  DegeneratePoint,
  Domain,
  BudgetExceeded,
  InvalidGraph,
  InvalidWeights,
  DivisionByZero,
  DegenerateRegion,
  Precondition,
  Internal,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stathyp
