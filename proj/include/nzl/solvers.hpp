#pragma once

#include "nzl/matrix.hpp"

#include <optional>
#include <utility>

namespace nzl {

enum class SolveClass { kNoSolution, kUnique, kInfinite };

/// Rank-based linear-system classification plus the computed solution.
/// `solution` is present for Unique (LU) and Infinite (minimum-norm) systems.
struct SolveOutcome {
  SolveClass classification = SolveClass::kNoSolution;
  std::optional<Vector> solution;
  double residual = 0.0;            // ||m*x - rhs||_inf when a solution is returned
  double condition_estimate = 0.0;  // sigma_max / smallest sigma above the rank cutoff
};

/// Singular-value cutoff: max(rows, cols) * sigma_max * machine epsilon.
double rank_tolerance(Index rows, Index cols, double sigma_max);

/// Count of singular values above the cutoff.
Index numerical_rank(const Matrix& m);

/// Classify and solve a square system by comparing rank(m) with rank([m|rhs]).
/// Unique systems are solved by partially pivoted LU with one refinement step.
SolveOutcome solve_square(const Matrix& m, const Vector& rhs);

/// Minimum-norm least-squares solution via SVD with the rank_tolerance cutoff.
Vector pinv_solve(const Matrix& m, const Vector& rhs);

/// Truncated-SVD factorization m ~= first * second with first: rows x r,
/// second: r x cols; Frobenius-optimal among rank-r factorizations.
std::pair<Matrix, Matrix> svd_factor(const Matrix& m, Index r);

/// Largest singular value.
double operator_norm(const Matrix& m);

}  // namespace nzl
