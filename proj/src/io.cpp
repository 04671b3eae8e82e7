#include "nzl/io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace nzl {

namespace {

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& e : j) v(i++) = e.get<double>();
  return v;
}

Json norm_to_json(const NormParams& n) {
  return Json{{"gamma", vector_to_json(n.gamma)},
              {"beta", vector_to_json(n.beta)},
              {"mu", vector_to_json(n.mu)},
              {"s", vector_to_json(n.s)}};
}

NormParams norm_from_json(const Json& j) {
  NormParams n;
  n.gamma = vector_from_json(j.at("gamma"));
  n.beta = vector_from_json(j.at("beta"));
  n.mu = vector_from_json(j.at("mu"));
  n.s = vector_from_json(j.at("s"));
  return n;
}

void check_kind(const Json& j, const char* kind) {
  if (j.at("kind").get<std::string>() != kind)
    throw std::runtime_error(std::string("expected network kind '") + kind + "', got '" +
                             j.at("kind").get<std::string>() + "'");
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("unsupported network schema version");
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  if (static_cast<Index>(data.size()) != rows * cols)
    throw std::runtime_error("matrix JSON: data length does not match rows*cols");
  Matrix m(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index jj = 0; jj < cols; ++jj) m(i, jj) = data[k++].get<double>();
  return m;
}

Json to_json(const TargetNetwork& g) {
  Json layers = Json::array();
  for (const TargetLayer& layer : g.layers) {
    layers.push_back(Json{{"scale", vector_to_json(layer.scale)},
                          {"weight", matrix_to_json(layer.weight)},
                          {"shift", vector_to_json(layer.shift)}});
  }
  return Json{{"kind", "target"},
              {"version", 1},
              {"input_dim", g.input_dim},
              {"seed", g.seed},
              {"layers", std::move(layers)}};
}

Json to_json(const WideStack& f) {
  Json layers = Json::array();
  for (const WideStage& s : f.stages) {
    layers.push_back(Json{{"w_odd", matrix_to_json(s.w_odd)},
                          {"w_even", matrix_to_json(s.w_even)},
                          {"norm_odd", norm_to_json(s.norm_odd)},
                          {"norm_even", norm_to_json(s.norm_even)}});
  }
  return Json{{"kind", "wide"},
              {"version", 1},
              {"input_dim", f.input_dim},
              {"seed", f.seed},
              {"layers", std::move(layers)}};
}

Json to_json(const SkipStack& f) {
  Json layers = Json::array();
  for (const SkipLayer& layer : f.layers) {
    Json blocks = Json::array();
    for (const SkipBlock& b : layer.blocks) {
      blocks.push_back(Json{{"weight", matrix_to_json(b.weight)},
                            {"proj", matrix_to_json(b.proj)},
                            {"norm", norm_to_json(b.norm)}});
    }
    layers.push_back(
        Json{{"blocks", std::move(blocks)}, {"w_final", matrix_to_json(layer.w_final)}});
  }
  return Json{{"kind", "skip"},    {"version", 1},
              {"input_dim", f.input_dim}, {"padded_dim", f.padded_dim},
              {"chunk", f.chunk},  {"seed", f.seed},
              {"layers", std::move(layers)}};
}

TargetNetwork target_from_json(const Json& j) {
  check_kind(j, "target");
  TargetNetwork g;
  g.input_dim = j.at("input_dim").get<Index>();
  g.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& lj : j.at("layers")) {
    TargetLayer layer;
    layer.scale = vector_from_json(lj.at("scale"));
    layer.weight = matrix_from_json(lj.at("weight"));
    layer.shift = vector_from_json(lj.at("shift"));
    g.layers.push_back(std::move(layer));
  }
  return g;
}

WideStack wide_from_json(const Json& j) {
  check_kind(j, "wide");
  WideStack f;
  f.input_dim = j.at("input_dim").get<Index>();
  f.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& lj : j.at("layers")) {
    WideStage s;
    s.w_odd = matrix_from_json(lj.at("w_odd"));
    s.w_even = matrix_from_json(lj.at("w_even"));
    s.norm_odd = norm_from_json(lj.at("norm_odd"));
    s.norm_even = norm_from_json(lj.at("norm_even"));
    f.stages.push_back(std::move(s));
  }
  return f;
}

SkipStack skip_from_json(const Json& j) {
  check_kind(j, "skip");
  SkipStack f;
  f.input_dim = j.at("input_dim").get<Index>();
  f.padded_dim = j.at("padded_dim").get<Index>();
  f.chunk = j.at("chunk").get<Index>();
  f.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& lj : j.at("layers")) {
    SkipLayer layer;
    for (const auto& bj : lj.at("blocks")) {
      SkipBlock b;
      b.weight = matrix_from_json(bj.at("weight"));
      b.proj = matrix_from_json(bj.at("proj"));
      b.norm = norm_from_json(bj.at("norm"));
      layer.blocks.push_back(std::move(b));
    }
    layer.w_final = matrix_from_json(lj.at("w_final"));
    f.layers.push_back(std::move(layer));
  }
  return f;
}

AnyNetwork network_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "target") return target_from_json(j);
  if (kind == "wide") return wide_from_json(j);
  if (kind == "skip") return skip_from_json(j);
  throw std::runtime_error("unknown network kind: " + kind);
}

void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

Json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

Json report_to_json(const ReconstructionReport& report) {
  Json entries = Json::array();
  for (const SolveDiagnostics& d : report.entries) {
    Json e{{"layer", d.layer},
           {"residual", d.residual},
           {"condition", d.condition},
           {"min_preactivation_margin", d.margin},
           {"gamma_min_abs", d.gamma_min_abs},
           {"full_rank", d.full_rank},
           {"used_pinv", d.used_pinv}};
    if (d.block >= 0) e["block"] = d.block;
    if (d.density < 1.0) e["density"] = d.density;
    if (d.zero_row_or_col) e["zero_row_or_col"] = true;
    if (d.bias_residual > 0.0) e["bias_residual"] = d.bias_residual;
    entries.push_back(std::move(e));
  }
  return Json{{"kind", report.kind},
              {"entries", std::move(entries)},
              {"resamples", report.resamples},
              {"singular_layers", report.singular_layers}};
}

Json equivalence_to_json(const EquivalenceResult& r) {
  return Json{{"samples", r.samples},
              {"max_abs_error", r.max_abs_error},
              {"mean_abs_error", r.mean_abs_error},
              {"domain_radius", r.domain_radius}};
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  ExperimentConfig cfg;
  if (j.contains("teacher_width")) cfg.teacher_width = j.at("teacher_width").get<Index>();
  if (j.contains("teacher_depth")) cfg.teacher_depth = j.at("teacher_depth").get<int>();
  if (j.contains("teacher_seed"))
    cfg.teacher_seed = j.at("teacher_seed").get<std::uint64_t>();
  if (j.contains("student_widths")) {
    cfg.student_widths.clear();
    for (const auto& w : j.at("student_widths"))
      cfg.student_widths.push_back(w.get<Index>());
  }
  if (j.contains("sparsity")) cfg.sparsity = j.at("sparsity").get<double>();
  if (j.contains("n_train")) cfg.n_train = j.at("n_train").get<Index>();
  if (j.contains("n_test")) cfg.n_test = j.at("n_test").get<Index>();
  if (j.contains("sgd")) {
    const Json& s = j.at("sgd");
    if (s.contains("learning_rate"))
      cfg.sgd.learning_rate = s.at("learning_rate").get<double>();
    if (s.contains("batch_size")) cfg.sgd.batch_size = s.at("batch_size").get<int>();
    if (s.contains("epochs")) cfg.sgd.epochs = s.at("epochs").get<int>();
    if (s.contains("schedule")) {
      const std::string name = s.at("schedule").get<std::string>();
      if (name == "constant")
        cfg.sgd.schedule = LrSchedule::kConstant;
      else if (name == "cosine")
        cfg.sgd.schedule = LrSchedule::kCosine;
      else if (name == "exponential")
        cfg.sgd.schedule = LrSchedule::kExponential;
      else
        throw std::runtime_error("unknown schedule: " + name);
    }
  }
  if (j.contains("dense_learning_rate"))
    cfg.dense_learning_rate = j.at("dense_learning_rate").get<double>();
  if (j.contains("seeds")) {
    cfg.seeds.clear();
    for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (j.contains("algorithms")) {
    cfg.algorithms.clear();
    for (const auto& a : j.at("algorithms"))
      cfg.algorithms.push_back(algorithm_from_name(a.get<std::string>()));
  }
  if (j.contains("record_wall_time"))
    cfg.record_wall_time = j.at("record_wall_time").get<bool>();
  return cfg;
}

}  // namespace nzl
