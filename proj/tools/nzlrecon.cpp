// Command-line front end: sample targets, run the wide/deep/sparse
// constructions, verify functional equivalence, estimate Khatri-Rao
// singularity rates, and drive experiment sweeps.

#include "nzl/deep.hpp"
#include "nzl/experiment.hpp"
#include "nzl/io.hpp"
#include "nzl/sparse.hpp"
#include "nzl/verify.hpp"
#include "nzl/wide.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConstructionFailure = 2;
constexpr int kExitVerificationFailure = 3;

struct VerifyArgs {
  std::string network_path;
  std::string target_path;
  int samples = 1000;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  std::string report_path;
};

int do_verify(const VerifyArgs& args) {
  const nzl::TargetNetwork g = nzl::target_from_json(nzl::load_json(args.target_path));
  const nzl::AnyNetwork net = nzl::network_from_json(nzl::load_json(args.network_path));
  nzl::EquivalenceResult result;
  if (std::holds_alternative<nzl::WideStack>(net)) {
    result = nzl::verify_equivalence(std::get<nzl::WideStack>(net), g, args.samples,
                                     args.seed);
  } else if (std::holds_alternative<nzl::SkipStack>(net)) {
    result = nzl::verify_equivalence(std::get<nzl::SkipStack>(net), g, args.samples,
                                     args.seed);
  } else {
    const auto& g2 = std::get<nzl::TargetNetwork>(net);
    result = nzl::verify_equivalence(
        [&g2](const nzl::Vector& x) { return nzl::forward_target(g2, x); }, g,
        args.samples, args.seed);
  }
  const nzl::Json out = nzl::equivalence_to_json(result);
  std::cout << out.dump(2) << '\n';
  if (!args.report_path.empty()) nzl::save_json(out, args.report_path);
  return result.max_abs_error <= args.tolerance ? kExitOk : kExitVerificationFailure;
}

void write_outputs(const nzl::Json& network, const nzl::ReconstructionReport& report,
                   const std::string& out_path, const std::string& report_path) {
  if (!out_path.empty()) nzl::save_json(network, out_path);
  if (!report_path.empty()) nzl::save_json(nzl::report_to_json(report), report_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact reconstruction of ReLU networks by tuning only the "
               "normalization layers of frozen random networks"};
  app.require_subcommand(1);

  // sample-target
  auto* sample = app.add_subcommand("sample-target", "Sample a random target network");
  nzl::Index st_dim = 8;
  int st_depth = 1;
  std::uint64_t st_seed = 0;
  std::string st_out = "target.json";
  sample->add_option("--dim", st_dim, "Layer width d")->required();
  sample->add_option("--depth", st_depth, "Number of layers");
  sample->add_option("--seed", st_seed, "RNG seed");
  sample->add_option("--out", st_out, "Output path");

  // construct-wide
  auto* wide = app.add_subcommand("construct-wide",
                                  "Construct a wide frozen network matching a target");
  std::string cw_target, cw_out, cw_report;
  std::uint64_t cw_seed = 0;
  nzl::Index cw_width = 0;
  nzl::Index cw_rank = 0;
  double cw_margin = 1e-3;
  bool cw_allow_pinv = false;
  wide->add_option("--target", cw_target, "Target network JSON")->required();
  wide->add_option("--seed", cw_seed, "RNG seed");
  wide->add_option("--out", cw_out, "Constructed network path");
  wide->add_option("--report", cw_report, "Report path");
  wide->add_option("--width", cw_width, "Odd-layer width (default d^2)");
  wide->add_option("--rank", cw_rank, "Low-rank construction at width d*r");
  wide->add_option("--margin", cw_margin, "Linearization margin");
  wide->add_flag("--allow-rank-deficient", cw_allow_pinv,
                 "Fall back to the pseudo-inverse instead of failing");

  // construct-deep
  auto* deep = app.add_subcommand("construct-deep",
                                  "Construct a skip-block network matching a target");
  std::string cd_target, cd_out, cd_report;
  std::uint64_t cd_seed = 0;
  nzl::Index cd_chunk = 1;
  double cd_margin = 1e-3;
  deep->add_option("--target", cd_target, "Target network JSON")->required();
  deep->add_option("--chunk", cd_chunk, "Chunk size k in [1, d]")->required();
  deep->add_option("--seed", cd_seed, "RNG seed");
  deep->add_option("--out", cd_out, "Constructed network path");
  deep->add_option("--report", cd_report, "Report path");
  deep->add_option("--margin", cd_margin, "Linearization margin");

  // construct-sparse
  auto* sparse = app.add_subcommand(
      "construct-sparse", "Construct a wide network with sparsified frozen weights");
  std::string cs_target, cs_out, cs_report;
  std::uint64_t cs_seed = 0;
  double cs_sparsity = 0.0;
  double cs_cbar = 1.0;
  nzl::Index cs_width = 0;
  sparse->add_option("--target", cs_target, "Target network JSON")->required();
  sparse->add_option("--sparsity", cs_sparsity,
                     "Keep probability p in (0,1]; 0 = choose from --cbar");
  sparse->add_option("--cbar", cs_cbar, "Constant for the sqrt(log d / d) rate");
  sparse->add_option("--seed", cs_seed, "RNG seed");
  sparse->add_option("--out", cs_out, "Constructed network path");
  sparse->add_option("--report", cs_report, "Report path");
  sparse->add_option("--width", cs_width, "Odd-layer width (default d^2)");

  // verify
  auto* verify = app.add_subcommand("verify", "Check functional equivalence");
  VerifyArgs vargs;
  verify->add_option("--network", vargs.network_path, "Constructed network JSON")
      ->required();
  verify->add_option("--target", vargs.target_path, "Target network JSON")->required();
  verify->add_option("--samples", vargs.samples, "Unit-ball sample count");
  verify->add_option("--seed", vargs.seed, "RNG seed");
  verify->add_option("--tolerance", vargs.tolerance, "Max |error| to accept");
  verify->add_option("--report", vargs.report_path, "Report path");

  // singularity-rate
  auto* singular = app.add_subcommand(
      "singularity-rate", "Monte-Carlo singularity rate of sparsified Khatri-Rao products");
  nzl::Index sr_dim = 8;
  double sr_sparsity = 0.5;
  int sr_trials = 200;
  std::uint64_t sr_seed = 0;
  std::string sr_out;
  singular->add_option("--dim", sr_dim, "Factor dimension d")->required();
  singular->add_option("--sparsity", sr_sparsity, "Keep probability p")->required();
  singular->add_option("--trials", sr_trials, "Trial count");
  singular->add_option("--seed", sr_seed, "RNG seed");
  singular->add_option("--out", sr_out, "Write the JSON result here too");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the experiment suite from a config");
  std::string sw_config, sw_out = "results.csv", sw_plots;
  sweep->add_option("--config", sw_config, "ExperimentConfig JSON")->required();
  sweep->add_option("--out", sw_out, "CSV output path");
  sweep->add_option("--plots", sw_plots, "Prefix for gnuplot data files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      const nzl::TargetNetwork g = nzl::sample_target(st_dim, st_depth, st_seed);
      nzl::save_json(nzl::to_json(g), st_out);
      std::cout << "wrote " << st_out << '\n';
      return kExitOk;
    }
    if (*wide) {
      const nzl::TargetNetwork g = nzl::target_from_json(nzl::load_json(cw_target));
      nzl::ConstructOptions opt;
      opt.width = cw_width;
      opt.margin = cw_margin;
      opt.allow_rank_deficient = cw_allow_pinv;
      auto [f, report] = cw_rank > 0 ? nzl::construct_lowrank(g, cw_rank, cw_seed, opt)
                                     : nzl::construct_wide(g, cw_seed, opt);
      write_outputs(nzl::to_json(f), report, cw_out, cw_report);
      std::cout << nzl::report_to_json(report).dump(2) << '\n';
      return kExitOk;
    }
    if (*deep) {
      const nzl::TargetNetwork g = nzl::target_from_json(nzl::load_json(cd_target));
      nzl::DeepOptions opt;
      opt.margin = cd_margin;
      auto [f, report] = nzl::construct_deep(g, cd_chunk, cd_seed, opt);
      write_outputs(nzl::to_json(f), report, cd_out, cd_report);
      std::cout << nzl::report_to_json(report).dump(2) << '\n';
      return kExitOk;
    }
    if (*sparse) {
      const nzl::TargetNetwork g = nzl::target_from_json(nzl::load_json(cs_target));
      const double p =
          cs_sparsity > 0.0 ? cs_sparsity : nzl::choose_sparsity(g.input_dim, cs_cbar);
      nzl::ConstructOptions opt;
      opt.width = cs_width;
      auto [f, report] = nzl::construct_sparse(g, p, cs_seed, opt);
      write_outputs(nzl::to_json(f), report, cs_out, cs_report);
      std::cout << nzl::report_to_json(report).dump(2) << '\n';
      return kExitOk;
    }
    if (*verify) return do_verify(vargs);
    if (*singular) {
      const nzl::SingularityEstimate est =
          nzl::estimate_singularity_rate(sr_dim, sr_sparsity, sr_trials, sr_seed);
      const nzl::Json j{{"rate", est.rate},
                        {"interval", {est.wilson_lo, est.wilson_hi}},
                        {"trials", est.trials},
                        {"failures", est.failures}};
      std::cout << j.dump(2) << '\n';
      if (!sr_out.empty()) nzl::save_json(j, sr_out);
      return kExitOk;
    }
    if (*sweep) {
      const nzl::ExperimentConfig cfg =
          nzl::experiment_config_from_json(nzl::load_json(sw_config));
      const std::vector<nzl::SweepRow> rows = nzl::run_experiment(cfg);
      nzl::emit_results(rows, sw_out);
      if (!sw_plots.empty()) nzl::emit_plot_data(rows, sw_plots);
      int failures = 0;
      for (const nzl::SweepRow& r : rows) {
        if (r.status != "ok") {
          ++failures;
          std::cerr << "cell failed (" << r.status << "): " << r.algorithm
                    << " width=" << r.width << " seed=" << r.seed << '\n';
        }
      }
      std::cout << "wrote " << rows.size() << " rows to " << sw_out << " ("
                << failures << " failed cells)\n";
      return kExitOk;
    }
  } catch (const nzl::ConstructError& e) {
    std::cerr << "construction failed: " << e.what() << '\n';
    return kExitConstructionFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
