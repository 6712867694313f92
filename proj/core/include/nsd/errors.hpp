#pragma once

#include <stdexcept>
#include <string>

namespace nsd {

/// SVD iteration cap exceeded; signals pathological input.
struct SvdConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Power-iteration direction collapsed (|m m^T p| below the degeneracy
/// threshold). Callers may resample the start vector and retry.
struct DegenerateDirectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A retried power-iteration draw was also degenerate; the momentum matrix
/// is effectively zero.
struct DoubleDegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An operation that requires a nonzero matrix received the zero matrix.
struct ZeroMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A norm-relative quantity was requested for a zero-norm matrix.
struct ZeroNormError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The max-margin solver exhausted its budget without producing a positive
/// margin on data that was certified separable.
struct SolverStallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The separability check ran out of budget while the margin was still
/// clearly negative and still improving: inconclusive, not "not separable".
struct SeparabilityInconclusiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A decay-slope fit was requested on a trace whose errors are all zero.
struct DegenerateTraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nsd
