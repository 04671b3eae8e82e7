#pragma once

#include "nzl/network.hpp"
#include "nzl/report.hpp"
#include "nzl/wide.hpp"

#include <cstdint>
#include <utility>

namespace nzl {

/// Solved normalization of one skip block.
struct BlockSolution {
  Vector gamma;  // dk diagonal entries
  Vector beta;   // dk shift (set later by the linearization pass)
  SolveDiagnostics diag;
  bool nonzero = false;  // every gamma entry away from zero
};

/// Solve upstream * diag(gamma) * (w * proj) = target_slice for gamma, where
/// upstream = W_{sigma+1} * prod_{j>i} Gamma_j W_j. Records whether all solved
/// entries are nonzero (required by the descending induction).
BlockSolution solve_block(int block_index, const Matrix& upstream, const Matrix& w,
                          const Matrix& proj, const Matrix& target_slice,
                          bool allow_rank_deficient);

inline constexpr double kZeroScaleTol = 1e-12;

struct DeepOptions {
  double margin = 1e-3;
  double domain_radius = 1.0;  // input ball on which equivalence is guaranteed
  WeightDist dist = WeightDist::kUniform;
  bool allow_rank_deficient = false;
  int max_attempts = 5;  // zero-scale resampling budget per target layer
};

/// Theorem-2 construction: each target layer becomes sigma = d/k blocks of
/// width dk solved in descending order, with shifts keeping every block ReLU in
/// its identity region and the last block's shift cancelling the accumulated
/// bias. Targets whose width is not a multiple of k are identity-padded.
std::pair<SkipStack, ReconstructionReport> construct_deep(const TargetNetwork& g,
                                                          Index k, std::uint64_t seed,
                                                          const DeepOptions& opt = {});

}  // namespace nzl
