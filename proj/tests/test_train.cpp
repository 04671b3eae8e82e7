#include "nzl/train.hpp"

#include "nzl/wide.hpp"

#include <doctest.h>

#include <cmath>

using namespace nzl;

namespace {

double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-12});
  return std::abs(a - b) / scale;
}

// Central finite difference of the BN loss in one parameter slot.
double bn_fd(WideStack f, const Matrix& x, const Vector& y, std::size_t stage,
             int which, Index idx, double h) {
  auto& slot = [&]() -> Vector& {
    WideStage& s = f.stages[stage];
    switch (which) {
      case 0: return s.norm_odd.gamma;
      case 1: return s.norm_odd.beta;
      case 2: return s.norm_even.gamma;
      default: return s.norm_even.beta;
    }
  }();
  const double saved = slot(idx);
  slot(idx) = saved + h;
  const double up = bn_mse(f, x, y);
  slot(idx) = saved - h;
  const double down = bn_mse(f, x, y);
  return (up - down) / (2.0 * h);
}

}  // namespace

TEST_CASE("teacher_label is the summed positive part of the final pre-activation") {
  const TargetNetwork g = sample_target(4, 1, 201);
  Rng rng(202);
  const Vector x = rng.gaussian_vector(4);
  CHECK(teacher_label(g, x) == doctest::Approx(relu(forward_target(g, x)).sum()));
}

TEST_CASE("gaussian datasets are reproducible") {
  const TargetNetwork g = sample_target(3, 1, 203);
  const Dataset a = make_gaussian_dataset(g, 50, 204);
  const Dataset b = make_gaussian_dataset(g, 50, 204);
  CHECK(a.inputs == b.inputs);
  CHECK(a.labels == b.labels);
}

TEST_CASE("BN gradients match central finite differences") {
  const TargetNetwork g = sample_target(4, 2, 205);
  WideStack f = sample_wide_stack(g, 206);
  const Dataset data = make_gaussian_dataset(g, 64, 207);

  const BnGradient grad = bn_gradient(f, data.inputs, data.labels);
  Rng rng(208);
  int checked = 0;
  while (checked < 24) {
    const std::size_t stage = rng.next_u64() % f.stages.size();
    const int which = static_cast<int>(rng.next_u64() % 4);
    const Vector& ref = which == 0   ? grad.dgamma_odd[stage]
                        : which == 1 ? grad.dbeta_odd[stage]
                        : which == 2 ? grad.dgamma_even[stage]
                                     : grad.dbeta_even[stage];
    const Index idx = static_cast<Index>(rng.next_u64() % ref.size());
    const double numeric = bn_fd(f, data.inputs, data.labels, stage, which, idx, 1e-6);
    CHECK(rel_err(ref(idx), numeric) <= 1e-5);
    ++checked;
  }
}

TEST_CASE("dense gradients match central finite differences") {
  const TargetNetwork g = sample_target(4, 2, 209);
  DenseStudent s = init_student(4, 2, 210);
  const Dataset data = make_gaussian_dataset(g, 64, 211);
  const DenseGradient grad = dense_gradient(s, data.inputs, data.labels);

  Rng rng(212);
  for (int checked = 0; checked < 24; ++checked) {
    const std::size_t layer = rng.next_u64() % s.weights.size();
    const bool weight = rng.bernoulli(0.7);
    DenseStudent probe = s;
    double analytic;
    double* slot;
    if (weight) {
      const Index i = static_cast<Index>(rng.next_u64() % 4);
      const Index j = static_cast<Index>(rng.next_u64() % 4);
      analytic = grad.dweights[layer](i, j);
      slot = &probe.weights[layer](i, j);
    } else {
      const Index i = static_cast<Index>(rng.next_u64() % 4);
      analytic = grad.dshifts[layer](i);
      slot = &probe.shifts[layer](i);
    }
    const double saved = *slot, h = 1e-6;
    *slot = saved + h;
    const double up = dense_mse(probe, data.inputs, data.labels);
    *slot = saved - h;
    const double down = dense_mse(probe, data.inputs, data.labels);
    CHECK(rel_err(analytic, (up - down) / (2.0 * h)) <= 1e-5);
  }
}

TEST_CASE("student initialized at the teacher has zero loss") {
  const TargetNetwork g = sample_target(5, 2, 213);
  DenseStudent s = student_from_target(g);
  const Dataset data = make_gaussian_dataset(g, 200, 214);
  CHECK(dense_mse(s, data.inputs, data.labels) <= 1e-20);
}

TEST_CASE("BN training reduces the loss on teacher data") {
  const TargetNetwork g = sample_target(4, 1, 215);
  WideStack f = sample_wide_stack(g, 216);
  const Dataset data = make_gaussian_dataset(g, 1000, 217);
  const double before = bn_mse(f, data.inputs, data.labels);
  SgdConfig cfg;
  cfg.learning_rate = 2e-3;
  cfg.epochs = 12;
  cfg.seed = 218;
  const TrainResult res = sgd_train_bn(f, data, cfg);
  REQUIRE(!res.diverged);
  const double after = bn_mse(f, data.inputs, data.labels);
  CHECK(after < before);
  CHECK(res.epoch_loss.front() >= res.epoch_loss.back());
}

TEST_CASE("dense training fits a small teacher") {
  const TargetNetwork g = sample_target(8, 1, 219);
  DenseStudent s = init_student(8, 1, 220);
  const Dataset train = make_gaussian_dataset(g, 4000, 221);
  const Dataset test = make_gaussian_dataset(g, 1000, 222);
  const double before = dense_mse(s, test.inputs, test.labels);
  SgdConfig cfg;
  cfg.learning_rate = 5e-3;
  cfg.epochs = 40;
  cfg.seed = 223;
  const TrainResult res = sgd_train_dense(s, train, cfg);
  REQUIRE(!res.diverged);
  const double after = dense_mse(s, test.inputs, test.labels);
  CHECK(after < 0.2 * before);
}

TEST_CASE("construction from a learned student cannot beat the student's own fit") {
  const TargetNetwork g = sample_target(6, 1, 233);
  const Dataset train = make_gaussian_dataset(g, 3000, 234);
  DenseStudent s = init_student(6, 1, 235);
  SgdConfig cfg;
  cfg.learning_rate = 2e-3;
  cfg.epochs = 15;
  cfg.seed = 236;
  REQUIRE(!sgd_train_dense(s, train, cfg).diverged);
  const double student_mse = dense_mse(s, train.inputs, train.labels);

  ConstructOptions opt;
  opt.allow_rank_deficient = true;
  double radius = 0.0;
  for (Index i = 0; i < train.inputs.rows(); ++i)
    radius = std::max(radius, train.inputs.row(i).norm());
  opt.domain_radius = radius;
  auto [f, report] = construct_wide(student_to_target(s), 237, opt);
  const double constructed_mse = bn_mse(f, train.inputs, train.labels);
  CHECK(constructed_mse >= student_mse - 1e-9);
  CHECK(constructed_mse <= student_mse + 1e-6 * (1.0 + student_mse));
}

TEST_CASE("divergence is detected and flagged") {
  const TargetNetwork g = sample_target(4, 1, 225);
  WideStack f = sample_wide_stack(g, 226);
  const Dataset data = make_gaussian_dataset(g, 256, 227);
  SgdConfig cfg;
  cfg.learning_rate = 1e9;
  cfg.epochs = 5;
  cfg.seed = 228;
  const TrainResult res = sgd_train_bn(f, data, cfg);
  CHECK(res.diverged);
}

TEST_CASE("learning-rate schedules stay finite and trainable") {
  const TargetNetwork g = sample_target(4, 1, 229);
  const Dataset data = make_gaussian_dataset(g, 500, 230);
  for (const LrSchedule sched :
       {LrSchedule::kConstant, LrSchedule::kCosine, LrSchedule::kExponential}) {
    WideStack f = sample_wide_stack(g, 231);
    SgdConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.epochs = 5;
    cfg.schedule = sched;
    cfg.seed = 232;
    const TrainResult res = sgd_train_bn(f, data, cfg);
    CHECK(!res.diverged);
    CHECK(res.epoch_loss.size() == 5);
  }
}
