#pragma once

#include "nzl/network.hpp"
#include "nzl/report.hpp"
#include "nzl/solvers.hpp"

#include <cstdint>
#include <stdexcept>
#include <utility>

namespace nzl {

enum class ConstructErrorKind { kSystemSingular, kZeroScaleEntry, kRankExceeded };

class ConstructError : public std::runtime_error {
 public:
  ConstructError(ConstructErrorKind kind, int layer, int block, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind), layer_(layer), block_(block) {}

  ConstructErrorKind kind() const { return kind_; }
  int layer() const { return layer_; }
  int block() const { return block_; }

 private:
  ConstructErrorKind kind_;
  int layer_;
  int block_;
};

/// Solve C diag(x) B = W for the diagonal x by recasting it as
/// khatri_rao(C, B^T) vecd(x) = vec(W). Square full-rank systems go through
/// solve_square; anything else falls back to the pseudo-inverse and is flagged.
struct DiagonalSolve {
  SolveClass classification = SolveClass::kNoSolution;
  Vector solution;
  bool used_pinv = false;
  double residual_fro = 0.0;  // ||C diag(x) B - W||_F
  double condition = 0.0;
};

DiagonalSolve solve_diagonal_system(const Matrix& c, const Matrix& b, const Matrix& w);

/// Shift making diag(gamma)·W x + shift entrywise >= margin on ||x|| <= radius:
/// shift_i = |gamma_i| * ||row_i(W)||_2 * radius + margin (Cauchy-Schwarz).
Vector linearize_shift(const Vector& gamma, const Matrix& w, double input_radius,
                       double margin);

struct ConstructOptions {
  Index width = 0;          // odd-layer width per stage; 0 = in_dim * out_dim
  double margin = 1e-3;     // linearization floor
  double domain_radius = 1.0;  // input ball on which equivalence is guaranteed
  bool allow_rank_deficient = false;  // keep the pinv solution instead of throwing
  WeightDist dist = WeightDist::kUniform;
  double sparsity = 1.0;    // Bernoulli keep-probability for frozen weights
};

struct LayerPairSolution {
  Vector gamma_odd;
  Vector beta_odd;
  Vector gamma_even;
  Vector beta_even;
  SolveDiagnostics diag;
};

/// One Theorem-1 stage: the two-layer map equals x -> Gamma* W* x + beta* before
/// the following ReLU, for all ||x|| <= input_radius.
LayerPairSolution construct_layer_pair(const TargetLayer& target, const Matrix& w_odd,
                                       const Matrix& w_even, double input_radius,
                                       double margin = 1e-3,
                                       bool allow_rank_deficient = false);

/// Generalized stage: realizes x -> m x + out_shift exactly on the radius ball.
/// Used directly by the low-rank and sparse paths.
LayerPairSolution construct_stage(const Matrix& m, const Vector& out_shift,
                                  const Matrix& w_odd, const Matrix& w_even,
                                  double input_radius, double margin,
                                  bool allow_rank_deficient);

std::pair<WideStack, ReconstructionReport> construct_wide(
    const TargetNetwork& g, std::uint64_t seed, const ConstructOptions& opt = {});

/// Corollary path: each target matrix of rank <= r is factored by truncated SVD
/// and realized by two stages of width in_dim * r.
std::pair<WideStack, ReconstructionReport> construct_lowrank(
    const TargetNetwork& g, Index r, std::uint64_t seed, const ConstructOptions& opt = {});

/// Frozen stack with matching shapes and identity normalization; weights are
/// sparsified when opt.sparsity < 1. Shared by the constructions and the SGD
/// baseline so that all of them draw from the same distribution.
WideStack sample_wide_stack(const TargetNetwork& g, std::uint64_t seed,
                            const ConstructOptions& opt = {});

}  // namespace nzl
