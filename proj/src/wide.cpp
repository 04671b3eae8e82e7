#include "nzl/wide.hpp"

#include "nzl/products.hpp"

#include <cmath>
#include <string>

namespace nzl {

namespace {

constexpr std::uint64_t kWeightStream = 1;
constexpr std::uint64_t kNormStream = 2;
constexpr std::uint64_t kMaskStream = 3;

NormParams sample_norm(Rng& rng, Index width) {
  NormParams n = NormParams::identity(width);
  n.mu = rng.uniform_vector(width, -1.0, 1.0);
  n.s = rng.uniform_vector(width, 0.5, 2.0);
  return n;
}

Matrix sample_weight(Rng& wrng, Rng& mrng, Index rows, Index cols, WeightDist dist,
                     double sparsity) {
  Matrix w = wrng.random_matrix(rows, cols, dist);
  if (sparsity < 1.0) {
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j)
        if (!mrng.bernoulli(sparsity)) w(i, j) = 0.0;
  }
  return w;
}

WideStage sample_stage(Rng& wrng, Rng& nrng, Rng& mrng, Index hidden, Index in,
                       Index out, const ConstructOptions& opt) {
  WideStage stage;
  stage.w_odd = sample_weight(wrng, mrng, hidden, in, opt.dist, opt.sparsity);
  stage.w_even = sample_weight(wrng, mrng, out, hidden, opt.dist, opt.sparsity);
  stage.norm_odd = sample_norm(nrng, hidden);
  stage.norm_even = sample_norm(nrng, out);
  return stage;
}

double min_abs(const Vector& v) {
  return v.size() ? v.cwiseAbs().minCoeff() : 0.0;
}

double nonzero_fraction(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Index nz = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) ++nz;
  return static_cast<double>(nz) / static_cast<double>(m.size());
}

bool has_zero_row_or_col(const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    if (m.row(i).cwiseAbs().maxCoeff() == 0.0) return true;
  for (Index j = 0; j < m.cols(); ++j)
    if (m.col(j).cwiseAbs().maxCoeff() == 0.0) return true;
  return false;
}

void note_sparsity(SolveDiagnostics& diag, const WideStage& stage,
                   const ConstructOptions& opt) {
  if (opt.sparsity >= 1.0) return;
  const double entries =
      static_cast<double>(stage.w_odd.size() + stage.w_even.size());
  diag.density = (nonzero_fraction(stage.w_odd) * stage.w_odd.size() +
                  nonzero_fraction(stage.w_even) * stage.w_even.size()) /
                 entries;
  diag.zero_row_or_col =
      has_zero_row_or_col(stage.w_odd) || has_zero_row_or_col(stage.w_even);
}

[[noreturn]] void rethrow_with_layer(const ConstructError& e, int layer) {
  throw ConstructError(e.kind(), layer, e.block(),
                       std::string(e.what()) + " (target layer " +
                           std::to_string(layer) + ")");
}

}  // namespace

DiagonalSolve solve_diagonal_system(const Matrix& c, const Matrix& b, const Matrix& w) {
  require_shape(c.rows() == w.rows() && b.cols() == w.cols() && c.cols() == b.rows(),
                "solve_diagonal_system: nonconforming shapes");
  const Matrix system = khatri_rao(c, Matrix(b.transpose()));
  const Vector rhs = vec_rowmajor(w);

  DiagonalSolve out;
  if (system.rows() == system.cols()) {
    SolveOutcome sq = solve_square(system, rhs);
    out.classification = sq.classification;
    out.condition = sq.condition_estimate;
    if (sq.classification == SolveClass::kUnique) {
      out.solution = *sq.solution;
    } else {
      out.solution = pinv_solve(system, rhs);
      out.used_pinv = true;
    }
  } else {
    // Rectangular system: classify by rank, solve by pseudo-inverse.
    const Index rank = numerical_rank(system);
    Matrix augmented(system.rows(), system.cols() + 1);
    augmented.leftCols(system.cols()) = system;
    augmented.col(system.cols()) = rhs;
    const Index rank_aug = numerical_rank(augmented);
    if (rank_aug > rank)
      out.classification = SolveClass::kNoSolution;
    else
      out.classification = rank == system.cols() ? SolveClass::kUnique
                                                 : SolveClass::kInfinite;
    out.solution = pinv_solve(system, rhs);
    out.used_pinv = true;
  }
  out.residual_fro = (c * out.solution.asDiagonal() * b - w).norm();
  return out;
}

Vector linearize_shift(const Vector& gamma, const Matrix& w, double input_radius,
                       double margin) {
  require_shape(gamma.size() == w.rows(), "linearize_shift: gamma length mismatch");
  require_shape(input_radius >= 0.0 && margin > 0.0,
                "linearize_shift: radius must be >= 0 and margin > 0");
  Vector shift(gamma.size());
  for (Index i = 0; i < gamma.size(); ++i)
    shift(i) = std::abs(gamma(i)) * w.row(i).norm() * input_radius + margin;
  return shift;
}

LayerPairSolution construct_stage(const Matrix& m, const Vector& out_shift,
                                  const Matrix& w_odd, const Matrix& w_even,
                                  double input_radius, double margin,
                                  bool allow_rank_deficient) {
  require_shape(m.rows() == w_even.rows() && m.cols() == w_odd.cols() &&
                    w_even.cols() == w_odd.rows() && out_shift.size() == m.rows(),
                "construct_stage: nonconforming shapes");

  DiagonalSolve ds = solve_diagonal_system(w_even, w_odd, m);
  if (ds.classification != SolveClass::kUnique && !allow_rank_deficient) {
    throw ConstructError(ConstructErrorKind::kSystemSingular, -1, -1,
                         "Khatri-Rao system is rank-deficient (condition estimate " +
                             std::to_string(ds.condition) + ")");
  }

  LayerPairSolution sol;
  sol.gamma_odd = ds.solution;
  sol.beta_odd = linearize_shift(sol.gamma_odd, w_odd, input_radius, margin);
  sol.gamma_even = Vector::Ones(m.rows());
  sol.beta_even = -(w_even * sol.beta_odd) + out_shift;

  sol.diag.residual = ds.residual_fro;
  sol.diag.condition = ds.condition;
  sol.diag.margin = margin;
  sol.diag.gamma_min_abs = min_abs(sol.gamma_odd);
  sol.diag.full_rank = ds.classification == SolveClass::kUnique;
  sol.diag.used_pinv = ds.used_pinv;
  return sol;
}

LayerPairSolution construct_layer_pair(const TargetLayer& target, const Matrix& w_odd,
                                       const Matrix& w_even, double input_radius,
                                       double margin, bool allow_rank_deficient) {
  return construct_stage(target.effective_weight(), target.shift, w_odd, w_even,
                         input_radius, margin, allow_rank_deficient);
}

WideStack sample_wide_stack(const TargetNetwork& g, std::uint64_t seed,
                            const ConstructOptions& opt) {
  WideStack f;
  f.input_dim = g.input_dim;
  f.seed = seed;
  Rng wrng = Rng(seed).derive(kWeightStream);
  Rng nrng = Rng(seed).derive(kNormStream);
  Rng mrng = Rng(seed).derive(kMaskStream);
  for (const TargetLayer& layer : g.layers) {
    const Index hidden =
        opt.width > 0 ? opt.width : layer.in_dim() * layer.out_dim();
    f.stages.push_back(
        sample_stage(wrng, nrng, mrng, hidden, layer.in_dim(), layer.out_dim(), opt));
  }
  return f;
}

std::pair<WideStack, ReconstructionReport> construct_wide(
    const TargetNetwork& g, std::uint64_t seed, const ConstructOptions& opt) {
  WideStack f = sample_wide_stack(g, seed, opt);
  ReconstructionReport report;
  report.kind = "wide";

  const NormBound bound = propagate_bound(g, opt.domain_radius);
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    WideStage& stage = f.stages[i];
    LayerPairSolution sol;
    try {
      sol = construct_layer_pair(g.layers[i], stage.w_odd, stage.w_even,
                                 bound.radius[i], opt.margin, opt.allow_rank_deficient);
    } catch (const ConstructError& e) {
      rethrow_with_layer(e, static_cast<int>(i));
    }
    set_folded(stage.norm_odd, sol.gamma_odd, sol.beta_odd);
    set_folded(stage.norm_even, sol.gamma_even, sol.beta_even);
    sol.diag.layer = static_cast<int>(i);
    note_sparsity(sol.diag, stage, opt);
    if (!sol.diag.full_rank) ++report.singular_layers;
    report.entries.push_back(sol.diag);
  }
  return {std::move(f), std::move(report)};
}

std::pair<WideStack, ReconstructionReport> construct_lowrank(
    const TargetNetwork& g, Index r, std::uint64_t seed, const ConstructOptions& opt) {
  WideStack f;
  f.input_dim = g.input_dim;
  f.seed = seed;
  ReconstructionReport report;
  report.kind = "lowrank";

  Rng wrng = Rng(seed).derive(kWeightStream);
  Rng nrng = Rng(seed).derive(kNormStream);
  Rng mrng = Rng(seed).derive(kMaskStream);

  const NormBound bound = propagate_bound(g, opt.domain_radius);
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const TargetLayer& layer = g.layers[i];
    const Matrix m = layer.effective_weight();
    if (numerical_rank(m) > r) {
      throw ConstructError(ConstructErrorKind::kRankExceeded, static_cast<int>(i), -1,
                           "target layer " + std::to_string(i) +
                               " has numerical rank above " + std::to_string(r));
    }
    const auto [a_factor, b_factor] = svd_factor(m, r);

    // First stage realizes b_factor with a positive offset keeping its trailing
    // ReLU in the identity region; the second stage cancels the offset.
    const double radius = bound.radius[i];
    WideStage s1 = sample_stage(wrng, nrng, mrng, layer.in_dim() * r,
                                layer.in_dim(), r, opt);
    const Vector offset =
        linearize_shift(Vector::Ones(r), b_factor, radius, opt.margin);
    LayerPairSolution sol1;
    try {
      sol1 = construct_stage(b_factor, offset, s1.w_odd, s1.w_even, radius,
                             opt.margin, opt.allow_rank_deficient);
    } catch (const ConstructError& e) {
      rethrow_with_layer(e, static_cast<int>(i));
    }
    set_folded(s1.norm_odd, sol1.gamma_odd, sol1.beta_odd);
    set_folded(s1.norm_even, sol1.gamma_even, sol1.beta_even);
    sol1.diag.layer = static_cast<int>(i);
    sol1.diag.block = 0;  // sub-stage index within the target layer
    if (!sol1.diag.full_rank) ++report.singular_layers;
    report.entries.push_back(sol1.diag);
    f.stages.push_back(std::move(s1));

    const double radius2 = operator_norm(b_factor) * radius + offset.norm();
    WideStage s2 =
        sample_stage(wrng, nrng, mrng, layer.out_dim() * r, r, layer.out_dim(), opt);
    LayerPairSolution sol2;
    try {
      sol2 = construct_stage(a_factor, Vector(layer.shift - a_factor * offset),
                             s2.w_odd, s2.w_even, radius2, opt.margin,
                             opt.allow_rank_deficient);
    } catch (const ConstructError& e) {
      rethrow_with_layer(e, static_cast<int>(i));
    }
    set_folded(s2.norm_odd, sol2.gamma_odd, sol2.beta_odd);
    set_folded(s2.norm_even, sol2.gamma_even, sol2.beta_even);
    sol2.diag.layer = static_cast<int>(i);
    sol2.diag.block = 1;
    if (!sol2.diag.full_rank) ++report.singular_layers;
    report.entries.push_back(sol2.diag);
    f.stages.push_back(std::move(s2));
  }
  return {std::move(f), std::move(report)};
}

}  // namespace nzl
