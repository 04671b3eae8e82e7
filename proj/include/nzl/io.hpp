#pragma once

#include "nzl/experiment.hpp"
#include "nzl/network.hpp"
#include "nzl/report.hpp"
#include "nzl/verify.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <variant>

namespace nzl {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

// Network files: {"kind": "target"|"wide"|"skip", "version": 1, "input_dim",
// "seed", "layers": [...]} with matrices in {rows, cols, data} form.
Json to_json(const TargetNetwork& g);
Json to_json(const WideStack& f);
Json to_json(const SkipStack& f);

TargetNetwork target_from_json(const Json& j);
WideStack wide_from_json(const Json& j);
SkipStack skip_from_json(const Json& j);

using AnyNetwork = std::variant<TargetNetwork, WideStack, SkipStack>;
AnyNetwork network_from_json(const Json& j);

void save_json(const Json& j, const std::string& path);
Json load_json(const std::string& path);

Json report_to_json(const ReconstructionReport& report);
Json equivalence_to_json(const EquivalenceResult& result);

ExperimentConfig experiment_config_from_json(const Json& j);

}  // namespace nzl
