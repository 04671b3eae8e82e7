#include "nzl/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace nzl {

namespace {

constexpr Index kEvalChunk = 4096;
constexpr double kPi = 3.14159265358979323846;

Matrix relu_batch(const Matrix& m) { return m.cwiseMax(0.0); }

// Per-stage caches from one batched forward pass. p_* are the raw frozen-layer
// products needed for the gamma gradients; z_* the normalized pre-activations.
struct WideBatchTrace {
  std::vector<Matrix> p_odd, z_odd, p_even, z_even;
  Vector yhat;
};

Matrix apply_norm(const Matrix& p, const NormParams& n) {
  const FoldedAffine aff = fold_norm(n);
  return ((p.array().rowwise() * aff.scale.transpose().array()).rowwise() +
          aff.shift.transpose().array())
      .matrix();
}

WideBatchTrace wide_forward_batch(const WideStack& f, const Matrix& inputs) {
  WideBatchTrace t;
  Matrix h = inputs;
  for (std::size_t s = 0; s < f.stages.size(); ++s) {
    const WideStage& stage = f.stages[s];
    Matrix p_odd = h * stage.w_odd.transpose();
    Matrix z_odd = apply_norm(p_odd, stage.norm_odd);
    Matrix p_even = relu_batch(z_odd) * stage.w_even.transpose();
    Matrix z_even = apply_norm(p_even, stage.norm_even);
    h = (s + 1 < f.stages.size()) ? relu_batch(z_even) : z_even;
    t.p_odd.push_back(std::move(p_odd));
    t.z_odd.push_back(std::move(z_odd));
    t.p_even.push_back(std::move(p_even));
    t.z_even.push_back(std::move(z_even));
  }
  t.yhat = relu_batch(t.z_even.back()).rowwise().sum();
  return t;
}

// d(pre-activation)/dgamma_j = (P_ij - mu_j) / s_j; d/dbeta_j = 1.
void norm_param_grads(const Matrix& dz, const Matrix& p, const NormParams& n,
                      Vector& dgamma, Vector& dbeta) {
  const Matrix centered =
      (p.array().rowwise() - n.mu.transpose().array()).matrix();
  dgamma = (dz.cwiseProduct(centered)).colwise().sum().transpose();
  dgamma = dgamma.cwiseQuotient(n.s);
  dbeta = dz.colwise().sum().transpose();
}

BnGradient bn_gradient_batch(const WideStack& f, const WideBatchTrace& t,
                             const Vector& labels) {
  const Index batch = labels.size();
  const std::size_t n_stages = f.stages.size();
  BnGradient g;
  g.dgamma_odd.resize(n_stages);
  g.dbeta_odd.resize(n_stages);
  g.dgamma_even.resize(n_stages);
  g.dbeta_even.resize(n_stages);

  const Vector dyhat = (t.yhat - labels) * (2.0 / static_cast<double>(batch));
  // Readout: yhat = sum_j relu(z_final_j).
  Matrix dz_even = ((t.z_even.back().array() > 0.0).cast<double>().colwise() *
                    dyhat.array())
                       .matrix();
  for (std::size_t s = n_stages; s-- > 0;) {
    const WideStage& stage = f.stages[s];
    norm_param_grads(dz_even, t.p_even[s], stage.norm_even, g.dgamma_even[s],
                     g.dbeta_even[s]);
    const Vector scale_even = fold_norm(stage.norm_even).scale;
    Matrix dh_odd =
        (dz_even.array().rowwise() * scale_even.transpose().array()).matrix() *
        stage.w_even;
    Matrix dz_odd =
        dh_odd.cwiseProduct((t.z_odd[s].array() > 0.0).cast<double>().matrix());
    norm_param_grads(dz_odd, t.p_odd[s], stage.norm_odd, g.dgamma_odd[s],
                     g.dbeta_odd[s]);
    if (s > 0) {
      const Vector scale_odd = fold_norm(stage.norm_odd).scale;
      Matrix dx =
          (dz_odd.array().rowwise() * scale_odd.transpose().array()).matrix() *
          stage.w_odd;
      dz_even =
          dx.cwiseProduct((t.z_even[s - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

std::vector<std::vector<Index>> make_batches(Index n, int batch_size,
                                             std::mt19937_64& engine) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), engine);
  std::vector<std::vector<Index>> batches;
  for (Index start = 0; start < n; start += batch_size) {
    const Index len = std::min<Index>(batch_size, n - start);
    batches.emplace_back(perm.begin() + start, perm.begin() + start + len);
  }
  return batches;
}

void gather(const Matrix& inputs, const Vector& labels,
            const std::vector<Index>& idx, Matrix& bx, Vector& by) {
  bx.resize(static_cast<Index>(idx.size()), inputs.cols());
  by.resize(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    bx.row(static_cast<Index>(i)) = inputs.row(idx[i]);
    by(static_cast<Index>(i)) = labels(idx[i]);
  }
}

double scheduled_lr(const SgdConfig& cfg, int epoch) {
  switch (cfg.schedule) {
    case LrSchedule::kConstant:
      return cfg.learning_rate;
    case LrSchedule::kCosine:
      return cfg.learning_rate * 0.5 *
             (1.0 + std::cos(kPi * epoch / std::max(1, cfg.epochs)));
    case LrSchedule::kExponential:
      return cfg.learning_rate * std::pow(cfg.exp_decay, epoch);
  }
  return cfg.learning_rate;
}

// --- dense student helpers ---

struct DenseBatchTrace {
  std::vector<Matrix> inputs;  // per-layer post-activation inputs
  std::vector<Matrix> z;       // per-layer pre-activations
  Vector yhat;
};

DenseBatchTrace dense_forward_batch(const DenseStudent& s, const Matrix& inputs) {
  DenseBatchTrace t;
  Matrix h = inputs;
  for (std::size_t i = 0; i < s.weights.size(); ++i) {
    t.inputs.push_back(h);
    Matrix z = (h * s.weights[i].transpose()).rowwise() + s.shifts[i].transpose();
    h = (i + 1 < s.weights.size()) ? relu_batch(z) : z;
    t.z.push_back(std::move(z));
  }
  t.yhat = relu_batch(t.z.back()).rowwise().sum();
  return t;
}

DenseGradient dense_gradient_batch(const DenseStudent& s, const DenseBatchTrace& t,
                                   const Vector& labels) {
  const Index batch = labels.size();
  DenseGradient g;
  g.dweights.resize(s.weights.size());
  g.dshifts.resize(s.weights.size());
  const Vector dyhat = (t.yhat - labels) * (2.0 / static_cast<double>(batch));
  Matrix dz =
      ((t.z.back().array() > 0.0).cast<double>().colwise() * dyhat.array()).matrix();
  for (std::size_t i = s.weights.size(); i-- > 0;) {
    g.dweights[i] = dz.transpose() * t.inputs[i];
    g.dshifts[i] = dz.colwise().sum().transpose();
    if (i > 0) {
      Matrix dh = dz * s.weights[i];
      dz = dh.cwiseProduct((t.z[i - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

double teacher_label(const TargetNetwork& g, const Vector& x) {
  return relu(forward_target(g, x)).sum();
}

Dataset make_gaussian_dataset(const TargetNetwork& g, Index n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.inputs = rng.gaussian_matrix(n, g.input_dim);
  data.labels.resize(n);
  for (Index i = 0; i < n; ++i)
    data.labels(i) = teacher_label(g, Vector(data.inputs.row(i).transpose()));
  return data;
}

double bn_mse(const WideStack& f, const Matrix& inputs, const Vector& labels) {
  double total = 0.0;
  for (Index start = 0; start < inputs.rows(); start += kEvalChunk) {
    const Index len = std::min<Index>(kEvalChunk, inputs.rows() - start);
    const WideBatchTrace t = wide_forward_batch(f, inputs.middleRows(start, len));
    total += (t.yhat - labels.segment(start, len)).squaredNorm();
  }
  return total / static_cast<double>(inputs.rows());
}

BnGradient bn_gradient(const WideStack& f, const Matrix& inputs, const Vector& labels) {
  return bn_gradient_batch(f, wide_forward_batch(f, inputs), labels);
}

TrainResult sgd_train_bn(WideStack& f, const Dataset& data, const SgdConfig& cfg) {
  TrainResult result;
  std::mt19937_64 engine(mix_seed(cfg.seed, 0xb7));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = scheduled_lr(cfg, epoch);
    double epoch_total = 0.0;
    Matrix bx;
    Vector by;
    for (const auto& idx : make_batches(data.size(), cfg.batch_size, engine)) {
      gather(data.inputs, data.labels, idx, bx, by);
      const WideBatchTrace t = wide_forward_batch(f, bx);
      epoch_total += (t.yhat - by).squaredNorm();
      const BnGradient g = bn_gradient_batch(f, t, by);
      for (std::size_t s = 0; s < f.stages.size(); ++s) {
        f.stages[s].norm_odd.gamma -= lr * g.dgamma_odd[s];
        f.stages[s].norm_odd.beta -= lr * g.dbeta_odd[s];
        f.stages[s].norm_even.gamma -= lr * g.dgamma_even[s];
        f.stages[s].norm_even.beta -= lr * g.dbeta_even[s];
      }
    }
    const double loss = epoch_total / static_cast<double>(data.size());
    result.epoch_loss.push_back(loss);
    if (!finite(loss)) {
      result.diverged = true;
      break;
    }
  }
  return result;
}

DenseStudent init_student(Index d, int depth, std::uint64_t seed) {
  Rng rng(seed);
  DenseStudent s;
  s.input_dim = d;
  const double a = std::sqrt(6.0 / (2.0 * static_cast<double>(d)));
  for (int i = 0; i < depth; ++i) {
    s.weights.push_back(rng.uniform_matrix(d, d, -a, a));
    s.shifts.push_back(Vector::Zero(d));
  }
  return s;
}

DenseStudent student_from_target(const TargetNetwork& g) {
  DenseStudent s;
  s.input_dim = g.input_dim;
  for (const TargetLayer& layer : g.layers) {
    s.weights.push_back(layer.effective_weight());
    s.shifts.push_back(layer.shift);
  }
  return s;
}

TargetNetwork student_to_target(const DenseStudent& s) {
  TargetNetwork g;
  g.input_dim = s.input_dim;
  for (std::size_t i = 0; i < s.weights.size(); ++i) {
    TargetLayer layer;
    layer.scale = Vector::Ones(s.weights[i].rows());
    layer.weight = s.weights[i];
    layer.shift = s.shifts[i];
    g.layers.push_back(std::move(layer));
  }
  return g;
}

double dense_mse(const DenseStudent& s, const Matrix& inputs, const Vector& labels) {
  double total = 0.0;
  for (Index start = 0; start < inputs.rows(); start += kEvalChunk) {
    const Index len = std::min<Index>(kEvalChunk, inputs.rows() - start);
    const DenseBatchTrace t = dense_forward_batch(s, inputs.middleRows(start, len));
    total += (t.yhat - labels.segment(start, len)).squaredNorm();
  }
  return total / static_cast<double>(inputs.rows());
}

DenseGradient dense_gradient(const DenseStudent& s, const Matrix& inputs,
                             const Vector& labels) {
  return dense_gradient_batch(s, dense_forward_batch(s, inputs), labels);
}

TrainResult sgd_train_dense(DenseStudent& s, const Dataset& data, const SgdConfig& cfg) {
  TrainResult result;
  std::mt19937_64 engine(mix_seed(cfg.seed, 0xd5));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = scheduled_lr(cfg, epoch);
    double epoch_total = 0.0;
    Matrix bx;
    Vector by;
    for (const auto& idx : make_batches(data.size(), cfg.batch_size, engine)) {
      gather(data.inputs, data.labels, idx, bx, by);
      const DenseBatchTrace t = dense_forward_batch(s, bx);
      epoch_total += (t.yhat - by).squaredNorm();
      const DenseGradient g = dense_gradient_batch(s, t, by);
      for (std::size_t i = 0; i < s.weights.size(); ++i) {
        s.weights[i] -= lr * g.dweights[i];
        s.shifts[i] -= lr * g.dshifts[i];
      }
    }
    const double loss = epoch_total / static_cast<double>(data.size());
    result.epoch_loss.push_back(loss);
    if (!finite(loss)) {
      result.diverged = true;
      break;
    }
  }
  return result;
}

}  // namespace nzl
