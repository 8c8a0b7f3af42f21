#pragma once

#include <stdexcept>
#include <string>

namespace qdisc {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input matrix is not Hermitian within tolerance.
struct NonHermitianError : Error {
  using Error::Error;
};

/// Operand dimensions are inconsistent.
struct DimensionMismatchError : Error {
  using Error::Error;
};

/// A scalar map was evaluated outside its domain (e.g. sqrt of a
/// retained negative eigenvalue).
struct DomainError : Error {
  using Error::Error;
};

/// The conic solver failed or the problem is malformed.
struct SolverError : Error {
  using Error::Error;
};

/// The states share no common support vector.
struct SupportEmptyError : Error {
  using Error::Error;
};

/// A problem file or CLI argument violates the input schema.
struct InputError : Error {
  using Error::Error;
};

}  // namespace qdisc
