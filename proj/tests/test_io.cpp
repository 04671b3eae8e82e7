#include "nzl/io.hpp"

#include "nzl/deep.hpp"
#include "nzl/experiment.hpp"
#include "nzl/wide.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace nzl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("matrix JSON round trip is exact") {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(mix_seed(301, trial));
    const Index rows = 1 + static_cast<Index>(rng.next_u64() % 5);
    const Index cols = 1 + static_cast<Index>(rng.next_u64() % 5);
    const Matrix m = rng.gaussian_matrix(rows, cols);
    // Serialize through text to exercise the shortest-round-trip printer.
    const Json j = Json::parse(matrix_to_json(m).dump());
    CHECK(matrix_from_json(j) == m);
  }
  Json j = matrix_to_json(Matrix::Identity(2, 2));
  CHECK(j.at("rows") == 2);
  CHECK(j.at("cols") == 2);
  CHECK(j.at("data").size() == 4);
}

TEST_CASE("network JSON round trips preserve forward passes bitwise") {
  const TargetNetwork g = sample_target(4, 2, 303);
  const TargetNetwork g2 = target_from_json(Json::parse(to_json(g).dump()));
  auto [wide, wide_report] = construct_wide(g, 304);
  const WideStack wide2 = wide_from_json(Json::parse(to_json(wide).dump()));
  auto [deep, deep_report] = construct_deep(g, 2, 305);
  const SkipStack deep2 = skip_from_json(Json::parse(to_json(deep).dump()));

  Rng rng(306);
  for (int i = 0; i < 50; ++i) {
    const Vector x = rng.uniform_vector(4, -0.5, 0.5);
    CHECK(forward_target(g, x) == forward_target(g2, x));
    CHECK(forward_wide(wide, x) == forward_wide(wide2, x));
    CHECK(forward_skip(deep, x) == forward_skip(deep2, x));
  }
}

TEST_CASE("network kind dispatch and version checks") {
  const TargetNetwork g = sample_target(3, 1, 307);
  Json j = to_json(g);
  CHECK(std::holds_alternative<TargetNetwork>(network_from_json(j)));
  j["kind"] = "mystery";
  CHECK_THROWS(network_from_json(j));
  Json j2 = to_json(g);
  j2["version"] = 2;
  CHECK_THROWS(target_from_json(j2));
}

TEST_CASE("emit_results writes the exact schema") {
  const std::string path = "/tmp/nzl_test_rows.csv";
  emit_results({}, path);
  CHECK(slurp(path) == "algorithm,width,sparsity,seed,train_mse,test_mse,wall_time_s\n");

  std::vector<SweepRow> rows(2);
  rows[0] = {"sgd_bn", 16, 1.0, 3, 0.25, 0.5, 1.5, "ok"};
  rows[1] = {"construct_from_teacher", 256, 0.2, 4, 1e-12, 2e-12, 0.25, "ok"};
  emit_results(rows, path);
  const std::vector<SweepRow> parsed = parse_results(path);
  REQUIRE(parsed.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(parsed[i].algorithm == rows[i].algorithm);
    CHECK(parsed[i].width == rows[i].width);
    CHECK(parsed[i].sparsity == rows[i].sparsity);
    CHECK(parsed[i].seed == rows[i].seed);
    CHECK(parsed[i].train_mse == rows[i].train_mse);
    CHECK(parsed[i].test_mse == rows[i].test_mse);
    CHECK(parsed[i].wall_time_s == rows[i].wall_time_s);
  }
  std::remove(path.c_str());
}

TEST_CASE("trimmed_mean drops one extreme on each side") {
  CHECK(trimmed_mean({5.0}) == doctest::Approx(5.0));
  CHECK(trimmed_mean({1.0, 3.0}) == doctest::Approx(2.0));
  CHECK(trimmed_mean({100.0, 1.0, 2.0, 3.0, -50.0}) == doctest::Approx(2.0));
}

TEST_CASE("experiment config parses from JSON") {
  const Json j = Json::parse(R"({
    "teacher_width": 8, "teacher_depth": 1, "teacher_seed": 5,
    "student_widths": [16, 64], "sparsity": 0.5,
    "n_train": 1000, "n_test": 500,
    "sgd": {"learning_rate": 0.01, "batch_size": 32, "epochs": 3, "schedule": "cosine"},
    "seeds": [1, 2, 3],
    "algorithms": ["sgd_bn", "construct_from_teacher"],
    "record_wall_time": false
  })");
  const ExperimentConfig cfg = experiment_config_from_json(j);
  CHECK(cfg.teacher_width == 8);
  CHECK(cfg.student_widths == std::vector<Index>{16, 64});
  CHECK(cfg.sparsity == 0.5);
  CHECK(cfg.sgd.schedule == LrSchedule::kCosine);
  CHECK(cfg.sgd.batch_size == 32);
  CHECK(cfg.seeds.size() == 3);
  CHECK(cfg.algorithms.size() == 2);
  CHECK(!cfg.record_wall_time);
}

TEST_CASE("tiny experiment: construction is exact and deterministic") {
  ExperimentConfig cfg;
  cfg.teacher_width = 4;
  cfg.teacher_depth = 1;
  cfg.teacher_seed = 9;
  cfg.student_widths = {16};
  cfg.n_train = 400;
  cfg.n_test = 200;
  cfg.sgd.epochs = 2;
  cfg.sgd.learning_rate = 1e-3;
  cfg.seeds = {1, 2};
  cfg.algorithms = {Algorithm::kConstructFromTeacher};
  cfg.record_wall_time = false;

  const std::vector<SweepRow> rows = run_experiment(cfg);
  REQUIRE(rows.size() == 2);
  for (const SweepRow& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.test_mse <= 1e-10);
  }

  const std::string a = "/tmp/nzl_det_a.csv", b = "/tmp/nzl_det_b.csv";
  emit_results(rows, a);
  emit_results(run_experiment(cfg), b);
  CHECK(slurp(a) == slurp(b));
  std::remove(a.c_str());
  std::remove(b.c_str());
}
