#pragma once

#include <vector>

#include "nsd/matrix.hpp"

namespace nsd::la {

/// Thin SVD of an m x n matrix: left_vectors (m x r) and right_vectors
/// (n x r) have orthonormal columns, singular_values has length
/// r = min(m, n) and is sorted nonincreasing.
struct SvdResult {
  Matrix left_vectors;
  std::vector<double> singular_values;
  Matrix right_vectors;
};

/// One-sided Jacobi SVD. Built for small dense matrices (tens of rows and
/// columns) where robustness matters more than asymptotics.
///
/// Deterministic: identical input bits give identical output bits. Sign
/// convention: the first nonzero entry of each left singular vector is
/// nonnegative. Throws SvdConvergenceError if the sweep cap is exceeded and
/// std::invalid_argument on an empty matrix.
SvdResult svd(const Matrix& m);

}  // namespace nsd::la
