// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace covact {

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Cholesky pivot went non-positive: the input is not (numerically) PD.
struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A rank-one step whose Sherman-Morrison denominator would destroy PD-ness.
struct SingularUpdate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evaluation outside the log-domain of the coordinate subproblem.
struct DomainViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RootFindingFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaVersionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedLayout : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace covact
