#pragma once

#include "nzl/train.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nzl {

enum class Algorithm { kSgdBn, kConstructFromTeacher, kConstructFromLearned };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct ExperimentConfig {
  Index teacher_width = 16;
  int teacher_depth = 1;
  std::uint64_t teacher_seed = 7;
  std::vector<Index> student_widths;  // empty: the single width d^2
  double sparsity = 1.0;
  Index n_train = 50000;
  Index n_test = 50000;
  SgdConfig sgd;
  double dense_learning_rate = 0.0;  // 0: reuse sgd.learning_rate
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<Algorithm> algorithms = {Algorithm::kSgdBn,
                                       Algorithm::kConstructFromTeacher,
                                       Algorithm::kConstructFromLearned};
  bool record_wall_time = true;
};

struct SweepRow {
  std::string algorithm;
  Index width = 0;
  double sparsity = 1.0;
  std::uint64_t seed = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double wall_time_s = 0.0;
  std::string status = "ok";  // not part of the CSV schema
};

/// Train/construct every (width, algorithm, seed) cell on shared teacher data.
/// Construction or training failures become rows with NaN losses and a reason
/// code in `status`.
std::vector<SweepRow> run_experiment(const ExperimentConfig& cfg);

/// CSV with the fixed header algorithm,width,sparsity,seed,train_mse,test_mse,
/// wall_time_s and deterministic row order/formatting.
void emit_results(const std::vector<SweepRow>& rows, const std::string& path);

std::vector<SweepRow> parse_results(const std::string& path);

/// Per-algorithm gnuplot data: width, trimmed-mean/min/max test MSE per width.
void emit_plot_data(const std::vector<SweepRow>& rows, const std::string& prefix);

/// Mean after dropping one min and one max when three or more values exist.
double trimmed_mean(std::vector<double> values);

}  // namespace nzl
