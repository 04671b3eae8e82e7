#pragma once

#include "nzl/matrix.hpp"
#include "nzl/rng.hpp"

#include <cstdint>
#include <vector>

namespace nzl {

/// Per-unit normalization parameters. gamma/beta are the tunable scale and
/// shift; mu/s are the frozen inference-time mean and (positive) variance.
struct NormParams {
  Vector gamma;
  Vector beta;
  Vector mu;
  Vector s;

  static NormParams identity(Index width);

  Index width() const { return gamma.size(); }
};

/// Inference form of a normalization layer: scale ⊙ (Wx + b) + shift.
struct FoldedAffine {
  Vector scale;  // gamma / s
  Vector shift;  // beta - scale ⊙ mu
};

/// Fold the normalization into a plain affine pair; requires s > 0.
FoldedAffine fold_norm(const NormParams& norm);

/// Write folded (scale, shift) back into (gamma, beta) given the frozen mu/s.
void set_folded(NormParams& norm, const Vector& scale, const Vector& shift);

// ---------------------------------------------------------------------------
// Target network: alternating affine diag(scale)·W x + shift and ReLU, with no
// ReLU after the last layer.
// ---------------------------------------------------------------------------

struct TargetLayer {
  Vector scale;   // diagonal of Gamma*
  Matrix weight;  // W*, operator norm <= 1 for sampled targets
  Vector shift;   // beta*

  Index out_dim() const { return weight.rows(); }
  Index in_dim() const { return weight.cols(); }
  Matrix effective_weight() const;  // diag(scale) * weight
};

struct TargetNetwork {
  std::vector<TargetLayer> layers;
  Index input_dim = 0;
  std::uint64_t seed = 0;

  Index depth() const { return static_cast<Index>(layers.size()); }
  Index output_dim() const { return layers.empty() ? input_dim : layers.back().out_dim(); }
};

Vector forward_target(const TargetNetwork& g, const Vector& x);

/// Weights uniform(-1,1) rescaled to operator norm <= 1, scales uniform(0.5,1.5),
/// shifts uniform(-0.5,0.5). Deterministic per seed.
TargetNetwork sample_target(Index d, int depth, std::uint64_t seed);

/// Per-layer activation-norm radii over the input ball: radius[0] is the
/// input-domain radius (1 for the unit ball) and radius[i] =
/// ||Gamma* W*||_op * radius[i-1] + ||beta*||_2. ReLU is nonexpansive, so
/// radius[i] bounds the norm of layer i+1's input.
struct NormBound {
  std::vector<double> radius;  // length depth + 1
};

NormBound propagate_bound(const TargetNetwork& g, double input_radius = 1.0);

// ---------------------------------------------------------------------------
// Wide frozen stack: stages of two frozen layers each (odd = expand, even =
// contract), only the normalization parameters tunable. Stage dimensions may
// vary (the low-rank construction uses two stages of differing shape per
// target layer).
// ---------------------------------------------------------------------------

struct WideStage {
  Matrix w_odd;   // hidden x in
  Matrix w_even;  // out x hidden
  NormParams norm_odd;
  NormParams norm_even;

  Index in_dim() const { return w_odd.cols(); }
  Index hidden_dim() const { return w_odd.rows(); }
  Index out_dim() const { return w_even.rows(); }
};

struct WideStack {
  std::vector<WideStage> stages;
  Index input_dim = 0;
  std::uint64_t seed = 0;

  Index output_dim() const { return stages.empty() ? input_dim : stages.back().out_dim(); }
};

/// ReLU after every layer except the final even one.
Vector forward_wide(const WideStack& f, const Vector& x);

/// Per-stage odd/even pre-activations from one forward pass (for margin and
/// equivalence diagnostics).
struct WideTrace {
  std::vector<Vector> odd_preact;
  std::vector<Vector> even_preact;
  Vector output;
};

WideTrace forward_wide_trace(const WideStack& f, const Vector& x);

// ---------------------------------------------------------------------------
// Skip-block stack: per target layer, sigma = d/k blocks of width d*k fed by
// input chunks through frozen projections, closed by a frozen d x dk map.
// ---------------------------------------------------------------------------

struct SkipBlock {
  Matrix weight;  // dk x dk frozen
  Matrix proj;    // dk x k frozen chunk projection
  NormParams norm;
};

struct SkipLayer {
  std::vector<SkipBlock> blocks;
  Matrix w_final;  // d x dk frozen

  Index block_count() const { return static_cast<Index>(blocks.size()); }
};

struct SkipStack {
  std::vector<SkipLayer> layers;
  Index input_dim = 0;   // target dimension d
  Index padded_dim = 0;  // next multiple of chunk
  Index chunk = 0;       // k
  std::uint64_t seed = 0;
};

/// Chunk i (1-based) of x: entries (i-1)k .. ik-1.
Vector subselect(const Vector& x, Index i, Index k);

/// Matrix form of the chunk selector: k x d with I_k in columns (i-1)k .. ik-1,
/// so subselect(x, i, k) = subselection_matrix(i, k, d) * x.
Matrix subselection_matrix(Index i, Index k, Index d);

/// Block recurrence L_i = diag(scale_i)·W_i(ReLU(L_{i-1}) + A_i x_i) + shift_i,
/// closed by w_final; ReLU after each layer's output except the last layer.
Vector forward_skip(const SkipStack& f, const Vector& x);

struct SkipTrace {
  // block_preact[layer][i] = L_{i+1} of that layer (pre-ReLU).
  std::vector<std::vector<Vector>> block_preact;
  Vector output;
};

SkipTrace forward_skip_trace(const SkipStack& f, const Vector& x);

// Parameter accounting (trainable = normalization entries, frozen = weights).
std::int64_t trainable_param_count(const WideStack& f);
std::int64_t frozen_param_count(const WideStack& f);
std::int64_t trainable_param_count(const SkipStack& f);
std::int64_t frozen_param_count(const SkipStack& f);

}  // namespace nzl
