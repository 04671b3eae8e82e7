#include "nzl/solvers.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nzl {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct ThinSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};

// BDC for larger problems, Jacobi below its useful range.
ThinSvd thin_svd(const Matrix& m) {
  const unsigned opts = Eigen::ComputeThinU | Eigen::ComputeThinV;
  if (std::min(m.rows(), m.cols()) <= 16) {
    Eigen::JacobiSVD<Matrix> svd(m, opts);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
  }
  Eigen::BDCSVD<Matrix> svd(m, opts);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Vector singular_values(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return Vector(0);
  if (std::min(m.rows(), m.cols()) <= 16) {
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
  }
  return Eigen::BDCSVD<Matrix>(m).singularValues();
}

Index rank_from_values(const Vector& sv, Index rows, Index cols) {
  if (sv.size() == 0) return 0;
  const double tol = rank_tolerance(rows, cols, sv(0));
  Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  return r;
}

// sigma_max over the smallest retained singular value; 0 for the zero matrix.
double condition_from_values(const Vector& sv, Index rank) {
  if (rank == 0) return 0.0;
  return sv(0) / sv(rank - 1);
}

}  // namespace

double rank_tolerance(Index rows, Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * sigma_max * kEps;
}

Index numerical_rank(const Matrix& m) {
  const Vector sv = singular_values(m);
  return rank_from_values(sv, m.rows(), m.cols());
}

SolveOutcome solve_square(const Matrix& m, const Vector& rhs) {
  require_shape(m.rows() == m.cols(), "solve_square: matrix is not square");
  require_shape(m.rows() == rhs.size(), "solve_square: rhs length mismatch");
  const Index n = m.rows();

  const Vector sv = singular_values(m);
  const Index rank = rank_from_values(sv, n, n);

  SolveOutcome out;
  out.condition_estimate = condition_from_values(sv, rank);

  if (rank == n) {
    // Column equilibration counters the scale spread of Khatri-Rao columns;
    // iterative refinement then drives the residual to its backward-stable
    // floor even for badly conditioned chains.
    Vector colnorm(n);
    for (Index j = 0; j < n; ++j) {
      const double c = m.col(j).norm();
      colnorm(j) = c > 0.0 ? c : 1.0;
    }
    Matrix scaled = m;
    for (Index j = 0; j < n; ++j) scaled.col(j) /= colnorm(j);
    Eigen::PartialPivLU<Matrix> lu(scaled);
    Vector x = lu.solve(rhs).cwiseQuotient(colnorm);
    Vector best = x;
    double best_residual = (m * x - rhs).lpNorm<Eigen::Infinity>();
    for (int iter = 0; iter < 6 && best_residual > 0.0; ++iter) {
      const Vector r = rhs - m * x;
      x += lu.solve(r).cwiseQuotient(colnorm);
      const double res = (m * x - rhs).lpNorm<Eigen::Infinity>();
      if (res < best_residual) {
        best_residual = res;
        best = x;
      } else {
        break;
      }
    }
    out.classification = SolveClass::kUnique;
    out.residual = best_residual;
    out.solution = std::move(best);
    return out;
  }

  Matrix augmented(n, n + 1);
  augmented.leftCols(n) = m;
  augmented.col(n) = rhs;
  const Index rank_aug = numerical_rank(augmented);

  if (rank_aug > rank) {
    out.classification = SolveClass::kNoSolution;
    return out;
  }
  out.classification = SolveClass::kInfinite;
  Vector x = pinv_solve(m, rhs);
  out.residual = (m * x - rhs).lpNorm<Eigen::Infinity>();
  out.solution = std::move(x);
  return out;
}

Vector pinv_solve(const Matrix& m, const Vector& rhs) {
  require_shape(m.rows() == rhs.size(), "pinv_solve: rhs length mismatch");
  if (m.cols() == 0) return Vector(0);
  if (m.rows() == 0) return Vector::Zero(m.cols());
  const ThinSvd svd = thin_svd(m);
  const double smax = svd.sigma.size() ? svd.sigma(0) : 0.0;
  const double tol = rank_tolerance(m.rows(), m.cols(), smax);
  Vector coeffs = svd.u.transpose() * rhs;
  for (Index i = 0; i < svd.sigma.size(); ++i)
    coeffs(i) = svd.sigma(i) > tol ? coeffs(i) / svd.sigma(i) : 0.0;
  return svd.v * coeffs;
}

std::pair<Matrix, Matrix> svd_factor(const Matrix& m, Index r) {
  require_shape(r >= 0 && r <= std::min(m.rows(), m.cols()),
                "svd_factor: rank exceeds matrix dimensions");
  const ThinSvd svd = thin_svd(m);
  Matrix first(m.rows(), r);
  Matrix second(r, m.cols());
  for (Index i = 0; i < r; ++i) {
    // Split each sigma evenly so both factors stay comparably scaled.
    const double s = std::sqrt(svd.sigma(i));
    first.col(i) = svd.u.col(i) * s;
    second.row(i) = svd.v.col(i).transpose() * s;
  }
  return {std::move(first), std::move(second)};
}

double operator_norm(const Matrix& m) {
  const Vector sv = singular_values(m);
  return sv.size() ? sv(0) : 0.0;
}

}  // namespace nzl
