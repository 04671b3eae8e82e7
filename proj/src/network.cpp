#include "nzl/network.hpp"

#include "nzl/solvers.hpp"

namespace nzl {

NormParams NormParams::identity(Index width) {
  NormParams n;
  n.gamma = Vector::Ones(width);
  n.beta = Vector::Zero(width);
  n.mu = Vector::Zero(width);
  n.s = Vector::Ones(width);
  return n;
}

FoldedAffine fold_norm(const NormParams& norm) {
  require_shape((norm.s.array() > 0.0).all(), "fold_norm: variance must be positive");
  FoldedAffine f;
  f.scale = norm.gamma.cwiseQuotient(norm.s);
  f.shift = norm.beta - f.scale.cwiseProduct(norm.mu);
  return f;
}

void set_folded(NormParams& norm, const Vector& scale, const Vector& shift) {
  norm.gamma = scale.cwiseProduct(norm.s);
  norm.beta = shift + scale.cwiseProduct(norm.mu);
}

Matrix TargetLayer::effective_weight() const {
  return scale.asDiagonal() * weight;
}

Vector forward_target(const TargetNetwork& g, const Vector& x) {
  require_shape(x.size() == g.input_dim, "forward_target: input dimension mismatch");
  Vector h = x;
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    const TargetLayer& layer = g.layers[i];
    require_shape(layer.in_dim() == h.size(), "forward_target: layer dimension mismatch");
    h = layer.scale.cwiseProduct(layer.weight * h) + layer.shift;
    if (i + 1 < g.layers.size()) h = relu(h);
  }
  return h;
}

TargetNetwork sample_target(Index d, int depth, std::uint64_t seed) {
  TargetNetwork g;
  g.input_dim = d;
  g.seed = seed;
  Rng rng(seed);
  for (int i = 0; i < depth; ++i) {
    TargetLayer layer;
    layer.weight = rng.uniform_matrix(d, d);
    const double norm = operator_norm(layer.weight);
    if (norm > 1.0) layer.weight /= norm;
    layer.scale = rng.uniform_vector(d, 0.5, 1.5);
    layer.shift = rng.uniform_vector(d, -0.5, 0.5);
    g.layers.push_back(std::move(layer));
  }
  return g;
}

NormBound propagate_bound(const TargetNetwork& g, double input_radius) {
  require_shape(input_radius >= 0.0, "propagate_bound: negative input radius");
  NormBound b;
  b.radius.push_back(input_radius);
  for (const TargetLayer& layer : g.layers) {
    const double r = operator_norm(layer.effective_weight()) * b.radius.back() +
                     layer.shift.norm();
    b.radius.push_back(r);
  }
  return b;
}

Vector forward_wide(const WideStack& f, const Vector& x) {
  return forward_wide_trace(f, x).output;
}

WideTrace forward_wide_trace(const WideStack& f, const Vector& x) {
  require_shape(x.size() == f.input_dim, "forward_wide: input dimension mismatch");
  WideTrace trace;
  Vector h = x;
  for (std::size_t i = 0; i < f.stages.size(); ++i) {
    const WideStage& stage = f.stages[i];
    require_shape(stage.in_dim() == h.size(), "forward_wide: stage dimension mismatch");
    const FoldedAffine odd = fold_norm(stage.norm_odd);
    const FoldedAffine even = fold_norm(stage.norm_even);
    Vector z_odd = odd.scale.cwiseProduct(stage.w_odd * h) + odd.shift;
    trace.odd_preact.push_back(z_odd);
    Vector z_even = even.scale.cwiseProduct(stage.w_even * relu(z_odd)) + even.shift;
    trace.even_preact.push_back(z_even);
    h = (i + 1 < f.stages.size()) ? relu(z_even) : z_even;
  }
  trace.output = h;
  return trace;
}

Vector subselect(const Vector& x, Index i, Index k) {
  require_shape(k >= 1 && i >= 1 && i * k <= x.size(), "subselect: chunk index out of range");
  return x.segment((i - 1) * k, k);
}

Matrix subselection_matrix(Index i, Index k, Index d) {
  require_shape(k >= 1 && i >= 1 && i * k <= d, "subselection_matrix: chunk out of range");
  Matrix s = Matrix::Zero(k, d);
  s.middleCols((i - 1) * k, k) = Matrix::Identity(k, k);
  return s;
}

Vector forward_skip(const SkipStack& f, const Vector& x) {
  return forward_skip_trace(f, x).output;
}

SkipTrace forward_skip_trace(const SkipStack& f, const Vector& x) {
  require_shape(x.size() == f.input_dim, "forward_skip: input dimension mismatch");
  SkipTrace trace;
  Vector h = Vector::Zero(f.padded_dim);
  h.head(f.input_dim) = x;
  const Index sigma = f.padded_dim / f.chunk;
  for (std::size_t j = 0; j < f.layers.size(); ++j) {
    const SkipLayer& layer = f.layers[j];
    require_shape(layer.block_count() == sigma, "forward_skip: block count mismatch");
    std::vector<Vector> preacts;
    Vector running;
    for (Index i = 1; i <= sigma; ++i) {
      const SkipBlock& block = layer.blocks[static_cast<std::size_t>(i - 1)];
      const Vector chunk = subselect(h, i, f.chunk);
      Vector u = block.proj * chunk;
      if (i > 1) u += relu(running);
      const FoldedAffine aff = fold_norm(block.norm);
      running = aff.scale.cwiseProduct(block.weight * u) + aff.shift;
      preacts.push_back(running);
    }
    Vector out = layer.w_final * running;
    trace.block_preact.push_back(std::move(preacts));
    h = (j + 1 < f.layers.size()) ? relu(out) : out;
  }
  trace.output = h.head(f.input_dim);
  return trace;
}

std::int64_t trainable_param_count(const WideStack& f) {
  std::int64_t n = 0;
  for (const WideStage& s : f.stages)
    n += 2 * (s.hidden_dim() + s.out_dim());
  return n;
}

std::int64_t frozen_param_count(const WideStack& f) {
  std::int64_t n = 0;
  for (const WideStage& s : f.stages) n += s.w_odd.size() + s.w_even.size();
  return n;
}

std::int64_t trainable_param_count(const SkipStack& f) {
  std::int64_t n = 0;
  for (const SkipLayer& layer : f.layers)
    for (const SkipBlock& b : layer.blocks) n += 2 * b.norm.width();
  return n;
}

std::int64_t frozen_param_count(const SkipStack& f) {
  std::int64_t n = 0;
  for (const SkipLayer& layer : f.layers) {
    n += layer.w_final.size();
    for (const SkipBlock& b : layer.blocks) n += b.weight.size() + b.proj.size();
  }
  return n;
}

}  // namespace nzl
