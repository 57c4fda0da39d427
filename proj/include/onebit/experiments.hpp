#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "onebit/erm.hpp"
#include "onebit/landscape.hpp"
#include "onebit/sensing.hpp"
#include "onebit/serialize.hpp"

namespace onebit {

enum class ExperimentKind { rate_sweep, dither_ablation, landscape, wdc_check };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string experiment_kind_name(ExperimentKind kind);

// Exactly one of: random gaussian (dims + seed), serialized net (path),
// group-sparse construction (gs_k, gs_d).
struct NetSpec {
    std::vector<std::size_t> dims;
    std::uint64_t seed = 0;
    std::string path;
    std::size_t gs_k = 0, gs_d = 0;
};

ReluNetwork build_net(const NetSpec& spec);

struct SensingSpec {
    SensingDist dist = SensingDist::gaussian;
    NoiseSpec noise{NoiseKind::gaussian, 0.1};
    double lambda = 10.0;
};

struct LandscapeExpSpec {
    std::string mode = "surrogate";  // or "empirical"
    std::size_t m = 100000;          // empirical mode sample count
    Vec x0 = {1.0, 1.0};
    GridSpec grid;
    double plot_ball_scale = 0.3;
    double plot_origin_scale = 0.1;
    double eps_wdc = 0.0;  // 0 = estimate
    std::size_t wdc_pairs = 200;
};

struct AblationSpec {
    std::size_t m = 10000;
    std::size_t d = 16;
    std::size_t seeds = 20;
};

struct WdcSpec {
    std::size_t pairs = 500;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::rate_sweep;
    NetSpec net;
    SensingSpec sensing;
    std::vector<std::size_t> m_list;
    std::size_t trials = 1;
    SolverOptions solver;
    std::string output_dir = "out";
    std::uint64_t base_seed = 0;
    std::optional<Vec> x0;  // rate-sweep target override; default random unit
    LandscapeExpSpec landscape;
    AblationSpec ablation;
    WdcSpec wdc;
    int threads = 1;

    json echo;  // the effective config, recorded verbatim in manifests
};

ExperimentConfig parse_experiment_config(const json& j);
json experiment_config_to_json(const ExperimentConfig& cfg);

struct RateRow {
    std::size_t m = 0;
    double median_rel_error = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double mean_iters = 0.0;
    std::size_t failures = 0;
};

// Fixed x0 (drawn once from derive(base_seed, "x0") unless overridden), fresh
// measurements per (m, trial), recovery from a random start. Writes
// rate_sweep.csv, slope.json and manifest.json under output_dir. A trial that
// throws numerical_error is counted as a failure; only an m where every trial
// fails is fatal.
std::vector<RateRow> rate_sweep(const ExperimentConfig& cfg);

// Least-squares slope of log(median error) vs log(m), excluding medians below
// the saturation floor 1e-3.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points_used = 0;
    std::vector<std::size_t> excluded_m;
};

SlopeFit fit_rate_slope(const std::vector<RateRow>& rows);

struct AblationReport {
    double dh_no_dither = 0.0;         // must be exactly 0 for the Rademacher pair
    double dh_dithered_mean = 0.0;
    std::vector<double> dh_dithered;   // one per seed
    std::size_t separation_successes = 0;  // seeds where losses ranked both ways
    std::size_t trials = 0;
};

// Rademacher sensing with theta1 = e1 and theta2 = e1 - e2/2: without dither
// the two are indistinguishable; with dither the sign-difference fraction is
// positive and the empirical risk ranks the true parameter lower. Writes
// ablation.json and manifest.json.
AblationReport dither_ablation(const ExperimentConfig& cfg);

// Thin wrappers writing the landscape / WDC outputs plus a manifest:
// grid.csv, heatmap.svg, landscape.json / wdc_report.json.
LandscapeReport run_landscape(const ExperimentConfig& cfg);
std::vector<WdcReport> run_wdc_check(const ExperimentConfig& cfg);

}  // namespace onebit
