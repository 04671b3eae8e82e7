#include "nzl/experiment.hpp"

#include "nzl/sparse.hpp"
#include "nzl/wide.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nzl {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ConstructOptions cell_options(Index width, double sparsity, double radius) {
  ConstructOptions opt;
  opt.width = width;
  opt.sparsity = sparsity;
  // Gaussian inputs leave the unit ball, so linearization must hold on a ball
  // that covers the data.
  opt.domain_radius = radius;
  // Mirrors the pseudo-inverse usage at widths where the system cannot be
  // square full rank.
  opt.allow_rank_deficient = true;
  return opt;
}

SweepRow run_cell(const TargetNetwork& teacher, const Dataset& train,
                  const Dataset& test, Algorithm alg, Index width,
                  const ExperimentConfig& cfg, std::uint64_t seed, double radius) {
  SweepRow row;
  row.algorithm = algorithm_name(alg);
  row.width = width;
  row.sparsity = cfg.sparsity;
  row.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    switch (alg) {
      case Algorithm::kSgdBn: {
        WideStack f = sample_wide_stack(teacher, seed, cell_options(width, cfg.sparsity, radius));
        SgdConfig sgd = cfg.sgd;
        sgd.seed = mix_seed(seed, 11);
        const TrainResult res = sgd_train_bn(f, train, sgd);
        if (res.diverged) row.status = "diverged";
        row.train_mse = bn_mse(f, train.inputs, train.labels);
        row.test_mse = bn_mse(f, test.inputs, test.labels);
        break;
      }
      case Algorithm::kConstructFromTeacher: {
        auto [f, report] = construct_wide(teacher, seed, cell_options(width, cfg.sparsity, radius));
        row.train_mse = bn_mse(f, train.inputs, train.labels);
        row.test_mse = bn_mse(f, test.inputs, test.labels);
        break;
      }
      case Algorithm::kConstructFromLearned: {
        DenseStudent student =
            init_student(teacher.input_dim, static_cast<int>(teacher.depth()),
                         mix_seed(seed, 21));
        SgdConfig sgd = cfg.sgd;
        sgd.seed = mix_seed(seed, 22);
        if (cfg.dense_learning_rate > 0.0) sgd.learning_rate = cfg.dense_learning_rate;
        const TrainResult res = sgd_train_dense(student, train, sgd);
        if (res.diverged) row.status = "diverged";
        const TargetNetwork learned = student_to_target(student);
        auto [f, report] = construct_wide(learned, seed, cell_options(width, cfg.sparsity, radius));
        row.train_mse = bn_mse(f, train.inputs, train.labels);
        row.test_mse = bn_mse(f, test.inputs, test.labels);
        break;
      }
    }
  } catch (const ConstructError&) {
    row.status = "singular";
    row.train_mse = kNan;
    row.test_mse = kNan;
  }
  if (cfg.record_wall_time) {
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kSgdBn:
      return "sgd_bn";
    case Algorithm::kConstructFromTeacher:
      return "construct_from_teacher";
    case Algorithm::kConstructFromLearned:
      return "construct_from_learned";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "sgd_bn") return Algorithm::kSgdBn;
  if (name == "construct_from_teacher") return Algorithm::kConstructFromTeacher;
  if (name == "construct_from_learned") return Algorithm::kConstructFromLearned;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::vector<SweepRow> run_experiment(const ExperimentConfig& cfg) {
  require_shape(cfg.n_train > 0 && cfg.n_test > 0 && cfg.sgd.learning_rate > 0.0,
                "run_experiment: counts and learning rate must be positive");
  require_shape(cfg.sparsity > 0.0 && cfg.sparsity <= 1.0,
                "run_experiment: sparsity must be in (0, 1]");
  const TargetNetwork teacher =
      sample_target(cfg.teacher_width, cfg.teacher_depth, cfg.teacher_seed);
  const Dataset train =
      make_gaussian_dataset(teacher, cfg.n_train, mix_seed(cfg.teacher_seed, 101));
  const Dataset test =
      make_gaussian_dataset(teacher, cfg.n_test, mix_seed(cfg.teacher_seed, 202));

  std::vector<Index> widths = cfg.student_widths;
  if (widths.empty()) widths.push_back(cfg.teacher_width * cfg.teacher_width);

  double radius = 0.0;
  for (Index i = 0; i < train.inputs.rows(); ++i)
    radius = std::max(radius, train.inputs.row(i).norm());
  for (Index i = 0; i < test.inputs.rows(); ++i)
    radius = std::max(radius, test.inputs.row(i).norm());

  std::vector<SweepRow> rows;
  for (Index width : widths)
    for (Algorithm alg : cfg.algorithms)
      for (std::uint64_t seed : cfg.seeds)
        rows.push_back(run_cell(teacher, train, test, alg, width, cfg, seed, radius));
  return rows;
}

void emit_results(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_results: cannot open " + path);
  out << "algorithm,width,sparsity,seed,train_mse,test_mse,wall_time_s\n";
  for (const SweepRow& r : rows) {
    out << r.algorithm << ',' << r.width << ',' << fmt(r.sparsity) << ',' << r.seed
        << ',' << fmt(r.train_mse) << ',' << fmt(r.test_mse) << ','
        << fmt(r.wall_time_s) << '\n';
  }
  if (!out) throw std::runtime_error("emit_results: write failed for " + path);
}

std::vector<SweepRow> parse_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_results: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "algorithm,width,sparsity,seed,train_mse,test_mse,wall_time_s")
    throw std::runtime_error("parse_results: unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    SweepRow r;
    std::getline(ss, r.algorithm, ',');
    std::getline(ss, field, ',');
    r.width = std::stoll(field);
    std::getline(ss, field, ',');
    r.sparsity = std::stod(field);
    std::getline(ss, field, ',');
    r.seed = std::stoull(field);
    std::getline(ss, field, ',');
    r.train_mse = std::stod(field);
    std::getline(ss, field, ',');
    r.test_mse = std::stod(field);
    std::getline(ss, field, ',');
    r.wall_time_s = std::stod(field);
    rows.push_back(std::move(r));
  }
  return rows;
}

double trimmed_mean(std::vector<double> values) {
  require_shape(!values.empty(), "trimmed_mean: no values");
  std::sort(values.begin(), values.end());
  std::size_t lo = 0, hi = values.size();
  if (values.size() >= 3) {
    ++lo;
    --hi;
  }
  double total = 0.0;
  for (std::size_t i = lo; i < hi; ++i) total += values[i];
  return total / static_cast<double>(hi - lo);
}

void emit_plot_data(const std::vector<SweepRow>& rows, const std::string& prefix) {
  std::map<std::string, std::map<Index, std::vector<double>>> by_algorithm;
  for (const SweepRow& r : rows)
    by_algorithm[r.algorithm][r.width].push_back(r.test_mse);
  for (const auto& [alg, by_width] : by_algorithm) {
    std::ofstream out(prefix + "-" + alg + ".dat", std::ios::binary);
    if (!out) throw std::runtime_error("emit_plot_data: cannot open output");
    out << "# width trimmed_mean_test_mse min_test_mse max_test_mse\n";
    for (const auto& [width, mses] : by_width) {
      const auto [lo, hi] = std::minmax_element(mses.begin(), mses.end());
      out << width << ' ' << fmt(trimmed_mean(mses)) << ' ' << fmt(*lo) << ' '
          << fmt(*hi) << '\n';
    }
  }
}

}  // namespace nzl
