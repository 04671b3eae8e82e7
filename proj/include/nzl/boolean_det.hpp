#pragma once

#include "nzl/matrix.hpp"

namespace nzl {

/// Boolean determinant of a square 0/1 matrix: 1 iff the support admits a
/// permutation with an all-ones product (a perfect matching). Computed by the
/// first-column max-expansion, memoized over row subsets; above
/// kBooleanDetMemoMaxDim it delegates to the matching route.
int boolean_det(const Matrix& b);

/// Same quantity via bipartite augmenting-path matching; polynomial time.
int boolean_det_matching(const Matrix& b);

inline constexpr Index kBooleanDetMemoMaxDim = 20;

}  // namespace nzl
