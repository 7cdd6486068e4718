#pragma once

#include <stdexcept>
#include <string>

namespace bflab {

/// Raised when a caller violates an operation's precondition (bad shape,
/// non-Hermitian input, out-of-range parameter).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation cannot continue: loss of positivity, a
/// degenerate eigen-decomposition, rank-deficient quadrature.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InvalidArgument(what);
}

}  // namespace bflab
