#pragma once

#include "nzl/network.hpp"
#include "nzl/report.hpp"
#include "nzl/wide.hpp"

#include <cstdint>
#include <utility>

namespace nzl {

/// Seeded Bernoulli(p) 0/1 mask applied to frozen weights by Hadamard product.
struct SparseMask {
  Index rows = 0;
  Index cols = 0;
  Matrix bits;  // 0/1 entries
  double p = 1.0;
  std::uint64_t seed = 0;

  double density() const;
};

SparseMask sample_mask(Index rows, Index cols, double p, std::uint64_t seed);

/// Keep-probability p = min(1, sqrt(2 d q)) with q = cbar * log(d^2) / d^2,
/// i.e. the Theta(sqrt(log d / d)) rate with a calibratable constant.
double choose_sparsity(Index d, double cbar);

Matrix sparsify(const Matrix& w, const SparseMask& mask);

/// Cross-check of the Boolean-determinant criterion: numeric invertibility of
/// khatri_rao(P .* M1, Q .* M2) against Det_Bool of the Boolean Khatri-Rao of
/// the masks. The two bits agree with probability 1 over continuous refills.
struct BooleanEquivalence {
  int det_nonzero = 0;
  int bool_det = 0;
};

BooleanEquivalence check_boolean_equivalence(const Matrix& p_mat, const Matrix& q_mat,
                                             const SparseMask& m1, const SparseMask& m2);

struct SingularityEstimate {
  int trials = 0;
  int failures = 0;
  double rate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

/// 95% Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(int failures, int trials);

/// Monte-Carlo probability that khatri_rao of two p-sparsified random d x d^2
/// matrices is numerically singular. Trials use derived per-trial seeds.
SingularityEstimate estimate_singularity_rate(Index d, double p, int trials,
                                              std::uint64_t seed,
                                              WeightDist dist = WeightDist::kUniform);

/// Theorem-1 construction over sparsified frozen weights. The report carries,
/// per layer, the system's invertibility, realized density, and any all-zero
/// row/column event.
std::pair<WideStack, ReconstructionReport> construct_sparse(
    const TargetNetwork& g, double p, std::uint64_t seed,
    const ConstructOptions& opt = {});

}  // namespace nzl
