#include "nzl/sparse.hpp"

#include "nzl/boolean_det.hpp"
#include "nzl/products.hpp"
#include "nzl/solvers.hpp"

#include <cmath>

namespace nzl {

double SparseMask::density() const {
  if (bits.size() == 0) return 0.0;
  return bits.sum() / static_cast<double>(bits.size());
}

SparseMask sample_mask(Index rows, Index cols, double p, std::uint64_t seed) {
  require_shape(p > 0.0 && p <= 1.0, "sample_mask: p must be in (0, 1]");
  SparseMask mask;
  mask.rows = rows;
  mask.cols = cols;
  mask.p = p;
  mask.seed = seed;
  Rng rng(seed);
  mask.bits = Matrix(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) mask.bits(i, j) = rng.bernoulli(p) ? 1.0 : 0.0;
  return mask;
}

double choose_sparsity(Index d, double cbar) {
  require_shape(d >= 2 && cbar > 0.0, "choose_sparsity: d >= 2 and cbar > 0 required");
  const double dd = static_cast<double>(d);
  const double q = cbar * std::log(dd * dd) / (dd * dd);
  return std::min(1.0, std::sqrt(2.0 * dd * q));
}

Matrix sparsify(const Matrix& w, const SparseMask& mask) {
  require_shape(w.rows() == mask.rows && w.cols() == mask.cols,
                "sparsify: mask shape mismatch");
  return hadamard(w, mask.bits);
}

BooleanEquivalence check_boolean_equivalence(const Matrix& p_mat, const Matrix& q_mat,
                                             const SparseMask& m1,
                                             const SparseMask& m2) {
  require_shape(p_mat.cols() == q_mat.cols(), "check_boolean_equivalence: column mismatch");
  const Matrix sp = sparsify(p_mat, m1);
  const Matrix sq = sparsify(q_mat, m2);
  const Matrix system = khatri_rao(sp, sq);
  BooleanEquivalence out;
  out.det_nonzero =
      (system.rows() == system.cols() && numerical_rank(system) == system.rows()) ? 1 : 0;
  out.bool_det = boolean_det(boolean_khatri_rao(m1.bits, m2.bits));
  return out;
}

std::pair<double, double> wilson_interval(int failures, int trials) {
  require_shape(trials >= 1 && failures >= 0 && failures <= trials,
                "wilson_interval: invalid counts");
  const double z = 1.959963984540054;  // 97.5th normal percentile
  const double n = trials;
  const double phat = failures / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

SingularityEstimate estimate_singularity_rate(Index d, double p, int trials,
                                              std::uint64_t seed, WeightDist dist) {
  require_shape(trials >= 1, "estimate_singularity_rate: trials must be >= 1");
  SingularityEstimate est;
  est.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    const Matrix pm = rng.random_matrix(d, d * d, dist);
    const Matrix qm = rng.random_matrix(d, d * d, dist);
    const SparseMask m1 = sample_mask(d, d * d, p, rng.next_u64());
    const SparseMask m2 = sample_mask(d, d * d, p, rng.next_u64());
    const Matrix system = khatri_rao(sparsify(pm, m1), sparsify(qm, m2));
    if (numerical_rank(system) < system.rows()) ++est.failures;
  }
  est.rate = static_cast<double>(est.failures) / trials;
  std::tie(est.wilson_lo, est.wilson_hi) = wilson_interval(est.failures, trials);
  return est;
}

std::pair<WideStack, ReconstructionReport> construct_sparse(
    const TargetNetwork& g, double p, std::uint64_t seed, const ConstructOptions& opt) {
  require_shape(p > 0.0 && p <= 1.0, "construct_sparse: p must be in (0, 1]");
  ConstructOptions sparse_opt = opt;
  sparse_opt.sparsity = p;
  auto [stack, report] = construct_wide(g, seed, sparse_opt);
  report.kind = "sparse";
  return {std::move(stack), std::move(report)};
}

}  // namespace nzl
