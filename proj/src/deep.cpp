#include "nzl/deep.hpp"

#include "nzl/solvers.hpp"

#include <cmath>
#include <string>

namespace nzl {

namespace {

// Identity-pad the target to width dp: padded coordinates carry exactly zero
// through every layer, and no column chunk of the padded weight is identically
// zero (a zero slice would force a zero scale block and break the induction).
TargetNetwork pad_target(const TargetNetwork& g, Index dp) {
  const Index d = g.input_dim;
  if (dp == d) return g;
  TargetNetwork padded;
  padded.input_dim = dp;
  padded.seed = g.seed;
  for (const TargetLayer& layer : g.layers) {
    TargetLayer p;
    p.weight = Matrix::Identity(dp, dp);
    p.weight.topLeftCorner(d, d) = layer.weight;
    p.scale = Vector::Ones(dp);
    p.scale.head(d) = layer.scale;
    p.shift = Vector::Zero(dp);
    p.shift.head(d) = layer.shift;
    padded.layers.push_back(std::move(p));
  }
  return padded;
}

struct FrozenLayer {
  std::vector<Matrix> weights;  // sigma blocks, dk x dk
  std::vector<Matrix> projs;    // sigma projections, dk x k
  std::vector<NormParams> norms;
  Matrix w_final;  // d x dk
};

FrozenLayer sample_frozen_layer(std::uint64_t attempt_seed, Index d, Index k,
                                Index sigma, WeightDist dist) {
  Rng wrng = Rng(attempt_seed).derive(1);
  Rng nrng = Rng(attempt_seed).derive(2);
  const Index width = d * k;
  FrozenLayer fl;
  for (Index i = 0; i < sigma; ++i) {
    fl.weights.push_back(wrng.random_matrix(width, width, dist));
    fl.projs.push_back(wrng.random_matrix(width, k, dist));
    NormParams n = NormParams::identity(width);
    n.mu = nrng.uniform_vector(width, -1.0, 1.0);
    n.s = nrng.uniform_vector(width, 0.5, 2.0);
    fl.norms.push_back(std::move(n));
  }
  fl.w_final = wrng.random_matrix(d, width, dist);
  return fl;
}

struct ZeroScale {
  int block;
};

}  // namespace

BlockSolution solve_block(int block_index, const Matrix& upstream, const Matrix& w,
                          const Matrix& proj, const Matrix& target_slice,
                          bool allow_rank_deficient) {
  const Matrix b = w * proj;
  DiagonalSolve ds = solve_diagonal_system(upstream, b, target_slice);
  if (ds.classification != SolveClass::kUnique && !allow_rank_deficient) {
    throw ConstructError(ConstructErrorKind::kSystemSingular, -1, block_index,
                         "skip-block Khatri-Rao system is rank-deficient at block " +
                             std::to_string(block_index));
  }
  BlockSolution sol;
  sol.gamma = ds.solution;
  sol.beta = Vector::Zero(sol.gamma.size());
  sol.diag.block = block_index;
  sol.diag.residual = ds.residual_fro;
  sol.diag.condition = ds.condition;
  sol.diag.full_rank = ds.classification == SolveClass::kUnique;
  sol.diag.used_pinv = ds.used_pinv;
  sol.diag.gamma_min_abs = sol.gamma.size() ? sol.gamma.cwiseAbs().minCoeff() : 0.0;
  sol.nonzero = sol.diag.gamma_min_abs > kZeroScaleTol;
  return sol;
}

std::pair<SkipStack, ReconstructionReport> construct_deep(const TargetNetwork& g,
                                                          Index k, std::uint64_t seed,
                                                          const DeepOptions& opt) {
  require_shape(k >= 1 && k <= g.input_dim, "construct_deep: chunk must be in [1, d]");
  for (const TargetLayer& layer : g.layers)
    require_shape(layer.in_dim() == g.input_dim && layer.out_dim() == g.input_dim,
                  "construct_deep: target layers must be square");

  const Index dp = ((g.input_dim + k - 1) / k) * k;
  const Index sigma = dp / k;
  const Index width = dp * k;
  const TargetNetwork padded = pad_target(g, dp);
  const NormBound bound = propagate_bound(padded, opt.domain_radius);

  SkipStack f;
  f.input_dim = g.input_dim;
  f.padded_dim = dp;
  f.chunk = k;
  f.seed = seed;

  ReconstructionReport report;
  report.kind = "deep";

  for (std::size_t j = 0; j < padded.layers.size(); ++j) {
    const Matrix m = padded.layers[j].effective_weight();
    const std::uint64_t layer_seed = mix_seed(seed, 1000 + j);

    FrozenLayer frozen;
    std::vector<BlockSolution> solutions(static_cast<std::size_t>(sigma));
    bool solved = false;
    for (int attempt = 0; attempt < opt.max_attempts && !solved; ++attempt) {
      if (attempt > 0) ++report.resamples;
      frozen = sample_frozen_layer(mix_seed(layer_seed, attempt), dp, k, sigma,
                                   opt.dist);
      try {
        // Descending solve: blocks sigma..1, each extending the upstream chain.
        Matrix upstream = frozen.w_final;
        for (Index i = sigma; i >= 1; --i) {
          const Matrix slice = m.middleCols((i - 1) * k, k);
          BlockSolution sol =
              solve_block(static_cast<int>(i), upstream,
                          frozen.weights[static_cast<std::size_t>(i - 1)],
                          frozen.projs[static_cast<std::size_t>(i - 1)], slice,
                          opt.allow_rank_deficient);
          if (!sol.nonzero) throw ZeroScale{static_cast<int>(i)};
          upstream = upstream * sol.gamma.asDiagonal() *
                     frozen.weights[static_cast<std::size_t>(i - 1)];
          solutions[static_cast<std::size_t>(i - 1)] = std::move(sol);
        }
        solved = true;
      } catch (const ZeroScale& z) {
        if (attempt + 1 == opt.max_attempts) {
          throw ConstructError(ConstructErrorKind::kZeroScaleEntry,
                               static_cast<int>(j), z.block,
                               "scale entry within " + std::to_string(kZeroScaleTol) +
                                   " of zero after " + std::to_string(opt.max_attempts) +
                                   " resamples (layer " + std::to_string(j) +
                                   ", block " + std::to_string(z.block) + ")");
        }
      } catch (const ConstructError& e) {
        throw ConstructError(e.kind(), static_cast<int>(j), e.block(),
                             std::string(e.what()) + " (target layer " +
                                 std::to_string(j) + ")");
      }
    }

    // Shifts: with every ReLU in its identity region, block i's pre-activation
    // splits as L_i = T_i x + c_i where T_i is the exact signal map
    // Gamma_i W_i (T_{i-1} + [0 | A_i | 0]). Choosing c_i by the row norms of
    // T_i keeps each non-final ReLU active, and beta_i = c_i - Gamma_i W_i
    // c_{i-1} cancels the carried bias block by block, so shift magnitudes
    // track the true signal instead of compounded operator-norm bounds. The
    // last block's c solves W_{sigma+1} c = beta* through the full-row-rank
    // final map.
    const double input_radius = bound.radius[j];
    Matrix signal = Matrix::Zero(width, dp);
    Vector carry = Vector::Zero(width);
    for (Index i = 1; i <= sigma; ++i) {
      const std::size_t idx = static_cast<std::size_t>(i - 1);
      BlockSolution& sol = solutions[idx];
      Matrix injected = signal;
      injected.middleCols((i - 1) * k, k) += frozen.projs[idx];
      signal = sol.gamma.asDiagonal() * Matrix(frozen.weights[idx] * injected);
      Vector c(width);
      if (i < sigma) {
        for (Index row = 0; row < width; ++row)
          c(row) = signal.row(row).norm() * input_radius + opt.margin;
        sol.diag.margin = opt.margin;
      } else {
        c = pinv_solve(frozen.w_final, padded.layers[j].shift);
        sol.diag.bias_residual =
            (frozen.w_final * c - padded.layers[j].shift).lpNorm<Eigen::Infinity>();
      }
      sol.beta = c - sol.gamma.asDiagonal() * Matrix(frozen.weights[idx] * carry);
      carry = c;
    }

    SkipLayer out_layer;
    out_layer.w_final = std::move(frozen.w_final);
    for (Index i = 0; i < sigma; ++i) {
      const std::size_t idx = static_cast<std::size_t>(i);
      SkipBlock block;
      block.weight = std::move(frozen.weights[idx]);
      block.proj = std::move(frozen.projs[idx]);
      block.norm = std::move(frozen.norms[idx]);
      set_folded(block.norm, solutions[idx].gamma, solutions[idx].beta);
      out_layer.blocks.push_back(std::move(block));
      solutions[idx].diag.layer = static_cast<int>(j);
      if (!solutions[idx].diag.full_rank) ++report.singular_layers;
      report.entries.push_back(solutions[idx].diag);
    }
    f.layers.push_back(std::move(out_layer));
  }
  return {std::move(f), std::move(report)};
}

}  // namespace nzl
