#pragma once

#include "nzl/network.hpp"

#include <cstdint>
#include <vector>

namespace nzl {

struct Dataset {
  Matrix inputs;  // n x d, one sample per row
  Vector labels;  // n

  Index size() const { return inputs.rows(); }
};

/// Scalar readout used by the experiments: sum of the positive parts of the
/// network's final pre-activation (the hidden layer's output for depth 1).
double teacher_label(const TargetNetwork& g, const Vector& x);

Dataset make_gaussian_dataset(const TargetNetwork& g, Index n, std::uint64_t seed);

enum class LrSchedule { kConstant, kCosine, kExponential };

struct SgdConfig {
  double learning_rate = 1e-3;
  int batch_size = 128;
  int epochs = 20;
  LrSchedule schedule = LrSchedule::kConstant;
  double exp_decay = 0.97;  // per-epoch factor for the exponential schedule
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> epoch_loss;
  bool diverged = false;
};

// --- normalization-parameter training of a frozen wide stack ---

/// Mean squared error of the scalar readout over a dataset.
double bn_mse(const WideStack& f, const Matrix& inputs, const Vector& labels);

struct BnGradient {
  std::vector<Vector> dgamma_odd, dbeta_odd, dgamma_even, dbeta_even;
};

/// Full-batch MSE gradient with respect to every gamma/beta (frozen weights,
/// means and variances untouched), by explicit backpropagation.
BnGradient bn_gradient(const WideStack& f, const Matrix& inputs, const Vector& labels);

/// Minibatch SGD on the normalization parameters only.
TrainResult sgd_train_bn(WideStack& f, const Dataset& data, const SgdConfig& cfg);

// --- dense student with the target's architecture ---

struct DenseStudent {
  std::vector<Matrix> weights;
  std::vector<Vector> shifts;
  Index input_dim = 0;
};

DenseStudent init_student(Index d, int depth, std::uint64_t seed);
DenseStudent student_from_target(const TargetNetwork& g);
TargetNetwork student_to_target(const DenseStudent& s);

double dense_mse(const DenseStudent& s, const Matrix& inputs, const Vector& labels);

struct DenseGradient {
  std::vector<Matrix> dweights;
  std::vector<Vector> dshifts;
};

DenseGradient dense_gradient(const DenseStudent& s, const Matrix& inputs,
                             const Vector& labels);

TrainResult sgd_train_dense(DenseStudent& s, const Dataset& data, const SgdConfig& cfg);

}  // namespace nzl
