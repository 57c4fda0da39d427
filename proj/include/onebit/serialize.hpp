#pragma once

#include <string>

#include "json.hpp"
#include "onebit/erm.hpp"
#include "onebit/generator.hpp"
#include "onebit/landscape.hpp"
#include "onebit/sensing.hpp"

namespace onebit {

using json = nlohmann::json;

// Network JSON: {"dims": [...], "weights": [[[...]]], "label": "..."} with
// weights as nested row-major arrays; doubles render in round-trip precision.
json network_to_json(const ReluNetwork& net);
ReluNetwork network_from_json(const json& j);

// MeasurementSet JSON:
// {"lambda": ..., "dist": "...", "seed": ..., "a": [[...]], "xi": [...],
//  "tau": [...], "y": [...]}
json measurements_to_json(const MeasurementSet& ms);
MeasurementSet measurements_from_json(const json& j);

std::string measurements_to_csv(const MeasurementSet& ms);  // rows of (i, y_i)

json solver_options_to_json(const SolverOptions& o);
SolverOptions solver_options_from_json(const json& j);

json recovery_result_to_json(const RecoveryResult& r);
std::string loss_trace_to_csv(const RecoveryResult& r);  // rows of (iteration, loss)

json landscape_report_to_json(const LandscapeReport& r);  // summary, no per-cell data
std::string landscape_report_to_csv(const LandscapeReport& r);

json wdc_report_to_json(const WdcReport& r);

// Loss heatmap with zone-boundary circles overlaid. Color scale: loss
// normalized to [0,1] over the grid, mapped through a fixed 5-stop viridis
// ramp (#440154, #3b528b, #21918c, #5ec962, #fde725). No timestamps, so
// identical reports render byte-identical files.
std::string landscape_report_to_svg(const LandscapeReport& r);

void save_json(const std::string& path, const json& j);
json load_json(const std::string& path);  // io_error on missing file, config_error on bad JSON

}  // namespace onebit
