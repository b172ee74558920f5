#pragma once

#include <vector>

#include "fano/types.hpp"

namespace fano::linalg {

/// Right-nullspace basis of a (possibly rectangular) complex matrix.
struct NullspaceResult {
  std::vector<ComplexVector> basis;  // orthonormal, unit norm
  RealVector singular_values;        // all of them, descending
};

/// All right-singular vectors with singular value <= tol * sigma_max.
/// tol must lie in (0, 1); non-finite entries are rejected.
NullspaceResult nullspace(const ComplexMatrix& m, double tol = 1e-10);

/// Solves L x = 0 subject to sum_{i in trace_indices} x_i = trace_value by
/// replacing the row trace_indices[0] (redundant for trace-preserving
/// generators) with the constraint. Throws numerical_error when the
/// steady state is degenerate (kernel dimension != 1).
ComplexVector solve_with_trace_constraint(const ComplexMatrix& l,
                                          const std::vector<Eigen::Index>& trace_indices,
                                          double trace_value);

/// Eigenvalues of a Hermitian matrix, ascending. Inputs that deviate from
/// Hermiticity by more than 1e-12 (relative, max norm) are rejected.
RealVector hermitian_eigenvalues(const ComplexMatrix& m);

}  // namespace fano::linalg
