#include "stathyp/error.hpp"

namespace stathyp {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax error";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::UnknownIdentifier: return "unknown identifier";
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::NonFinite: return "non-finite value";
    case ErrorKind::SingularPivot: return "singular pivot";
    case ErrorKind::DegeneratePoint: return "degenerate point";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::BudgetExceeded: return "budget exceeded";
    case ErrorKind::InvalidGraph: return "invalid graph";
    case ErrorKind::InvalidWeights: return "invalid weights";
    case ErrorKind::DivisionByZero: return "division by zero";
    case ErrorKind::DegenerateRegion: return "degenerate region";
    case ErrorKind::Precondition: return "precondition violated";
    case ErrorKind::Internal: return "internal error";
  }
  return "error";
}

}  // namespace stathyp
