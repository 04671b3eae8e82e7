#pragma once

#include "nzl/matrix.hpp"

namespace nzl {

/// Kronecker product: block (i,j) of the result equals a(i,j) * b.
Matrix kron(const Matrix& a, const Matrix& b);

/// Khatri-Rao product: column j of the result is kron(a.col(j), b.col(j)).
/// Requires a.cols() == b.cols().
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// Element-wise product; shapes must match.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Khatri-Rao over the {0,1} semiring (AND in place of multiplication).
/// Inputs must have only 0/1 entries.
Matrix boolean_khatri_rao(const Matrix& a, const Matrix& b);

}  // namespace nzl
