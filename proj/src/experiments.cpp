#include "onebit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "onebit/errors.hpp"
#include "onebit/hash.hpp"
#include "onebit/parallel.hpp"
#include "onebit/rng.hpp"
#include "onebit/textio.hpp"

namespace onebit {

ExperimentKind parse_experiment_kind(const std::string& name) {
    if (name == "rate_sweep") return ExperimentKind::rate_sweep;
    if (name == "dither_ablation") return ExperimentKind::dither_ablation;
    if (name == "landscape") return ExperimentKind::landscape;
    if (name == "wdc_check") return ExperimentKind::wdc_check;
    throw config_error("unknown experiment: " + name);
}

std::string experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::rate_sweep: return "rate_sweep";
        case ExperimentKind::dither_ablation: return "dither_ablation";
        case ExperimentKind::landscape: return "landscape";
        case ExperimentKind::wdc_check: return "wdc_check";
    }
    return "unknown";
}

ReluNetwork build_net(const NetSpec& spec) {
    if (!spec.path.empty()) return network_from_json(load_json(spec.path));
    if (spec.gs_k > 0 || spec.gs_d > 0) return group_sparse_network(spec.gs_k, spec.gs_d);
    if (spec.dims.empty()) throw config_error("net spec: need dims, a path, or a group_sparse block");
    return new_random_gaussian(spec.dims, WeightScaleRule::variance_one_over_fanout, spec.seed);
}

namespace {

NoiseSpec parse_noise(const json& j) {
    NoiseSpec n;
    const std::string kind = j.value("kind", "none");
    if (kind == "none") {
        n.kind = NoiseKind::none;
    } else if (kind == "gaussian") {
        n.kind = NoiseKind::gaussian;
    } else if (kind == "laplace") {
        n.kind = NoiseKind::laplace;
    } else {
        throw config_error("unknown noise kind: " + kind);
    }
    n.param = j.value("param", 0.0);
    return n;
}

json noise_to_json(const NoiseSpec& n) {
    const char* kind = n.kind == NoiseKind::none ? "none"
                       : n.kind == NoiseKind::gaussian ? "gaussian"
                                                       : "laplace";
    return json{{"kind", kind}, {"param", n.param}};
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
    ExperimentConfig cfg;
    try {
        const int version = j.value("schema_version", 1);
        if (version != 1) throw config_error("unsupported schema_version");
        cfg.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());

        if (j.contains("net")) {
            const json& n = j.at("net");
            if (n.contains("path")) cfg.net.path = n.at("path").get<std::string>();
            if (n.contains("dims")) cfg.net.dims = n.at("dims").get<std::vector<std::size_t>>();
            cfg.net.seed = n.value("seed", std::uint64_t{0});
            if (n.contains("group_sparse")) {
                cfg.net.gs_k = n.at("group_sparse").value("k", std::size_t{0});
                cfg.net.gs_d = n.at("group_sparse").value("d", std::size_t{0});
            }
        }
        if (j.contains("sensing")) {
            const json& s = j.at("sensing");
            cfg.sensing.dist = parse_sensing_dist(s.value("dist", "gaussian"));
            if (s.contains("noise")) cfg.sensing.noise = parse_noise(s.at("noise"));
            cfg.sensing.lambda = s.value("lambda", cfg.sensing.lambda);
        }
        if (j.contains("m_list")) cfg.m_list = j.at("m_list").get<std::vector<std::size_t>>();
        cfg.trials = j.value("trials", cfg.trials);
        if (j.contains("solver")) cfg.solver = solver_options_from_json(j.at("solver"));
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
        cfg.threads = j.value("threads", cfg.threads);
        if (j.contains("x0")) cfg.x0 = j.at("x0").get<Vec>();

        if (j.contains("landscape")) {
            const json& l = j.at("landscape");
            cfg.landscape.mode = l.value("mode", cfg.landscape.mode);
            cfg.landscape.m = l.value("m", cfg.landscape.m);
            if (l.contains("x0")) cfg.landscape.x0 = l.at("x0").get<Vec>();
            if (l.contains("range")) {
                const auto range = l.at("range").get<std::vector<double>>();
                if (range.size() != 2 || range[0] >= range[1])
                    throw config_error("landscape range must be [lo, hi]");
                cfg.landscape.grid.x1_min = cfg.landscape.grid.x2_min = range[0];
                cfg.landscape.grid.x1_max = cfg.landscape.grid.x2_max = range[1];
            }
            cfg.landscape.grid.resolution = l.value("resolution", cfg.landscape.grid.resolution);
            cfg.landscape.plot_ball_scale = l.value("plot_ball_scale", cfg.landscape.plot_ball_scale);
            cfg.landscape.plot_origin_scale =
                l.value("plot_origin_scale", cfg.landscape.plot_origin_scale);
            cfg.landscape.eps_wdc = l.value("eps_wdc", cfg.landscape.eps_wdc);
            cfg.landscape.wdc_pairs = l.value("wdc_pairs", cfg.landscape.wdc_pairs);
        }
        if (j.contains("ablation")) {
            const json& a = j.at("ablation");
            cfg.ablation.m = a.value("m", cfg.ablation.m);
            cfg.ablation.d = a.value("d", cfg.ablation.d);
            cfg.ablation.seeds = a.value("seeds", cfg.ablation.seeds);
        }
        if (j.contains("wdc")) cfg.wdc.pairs = j.at("wdc").value("pairs", cfg.wdc.pairs);
    } catch (const json::exception& e) {
        throw config_error(std::string("experiment config: ") + e.what());
    }

    if (cfg.trials < 1) throw config_error("experiment config: trials must be >= 1");
    if (cfg.threads < 1) cfg.threads = 1;
    cfg.echo = experiment_config_to_json(cfg);
    return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["experiment"] = experiment_kind_name(cfg.experiment);
    json net;
    if (!cfg.net.path.empty()) net["path"] = cfg.net.path;
    if (!cfg.net.dims.empty()) net["dims"] = cfg.net.dims;
    net["seed"] = cfg.net.seed;
    if (cfg.net.gs_k > 0) net["group_sparse"] = json{{"k", cfg.net.gs_k}, {"d", cfg.net.gs_d}};
    j["net"] = std::move(net);
    j["sensing"] = json{{"dist", sensing_dist_name(cfg.sensing.dist)},
                        {"noise", noise_to_json(cfg.sensing.noise)},
                        {"lambda", cfg.sensing.lambda}};
    j["m_list"] = cfg.m_list;
    j["trials"] = cfg.trials;
    j["solver"] = solver_options_to_json(cfg.solver);
    j["output_dir"] = cfg.output_dir;
    j["base_seed"] = cfg.base_seed;
    j["threads"] = cfg.threads;
    if (cfg.x0) j["x0"] = *cfg.x0;
    j["landscape"] = json{{"mode", cfg.landscape.mode},
                          {"m", cfg.landscape.m},
                          {"x0", cfg.landscape.x0},
                          {"range", json::array({cfg.landscape.grid.x1_min, cfg.landscape.grid.x1_max})},
                          {"resolution", cfg.landscape.grid.resolution},
                          {"plot_ball_scale", cfg.landscape.plot_ball_scale},
                          {"plot_origin_scale", cfg.landscape.plot_origin_scale},
                          {"eps_wdc", cfg.landscape.eps_wdc},
                          {"wdc_pairs", cfg.landscape.wdc_pairs}};
    j["ablation"] =
        json{{"m", cfg.ablation.m}, {"d", cfg.ablation.d}, {"seeds", cfg.ablation.seeds}};
    j["wdc"] = json{{"pairs", cfg.wdc.pairs}};
    return j;
}

namespace {

// Writes the named artifacts plus manifest.json (config echo, seeds, net
// hash, sha256 of every artifact).
void write_outputs(const ExperimentConfig& cfg, const json& seeds, const std::string& net_hash,
                   const std::vector<std::pair<std::string, std::string>>& artifacts) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw io_error("cannot create output directory: " + cfg.output_dir);

    json outputs;
    for (const auto& [name, contents] : artifacts) {
        write_file(cfg.output_dir + "/" + name, contents);
        outputs[name] = json{{"sha256", sha256_hex(contents)}, {"bytes", contents.size()}};
    }
    json manifest;
    manifest["schema_version"] = 1;
    manifest["experiment"] = experiment_kind_name(cfg.experiment);
    manifest["config"] = cfg.echo.is_null() ? experiment_config_to_json(cfg) : cfg.echo;
    manifest["base_seed"] = cfg.base_seed;
    manifest["seeds"] = seeds;
    manifest["net_sha256"] = net_hash;
    manifest["outputs"] = std::move(outputs);
    save_json(cfg.output_dir + "/manifest.json", manifest);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::nan("");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return sorted[lo] + f * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<RateRow> rate_sweep(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::rate_sweep)
        throw config_error("rate_sweep: config is for a different experiment");
    if (cfg.m_list.empty()) throw config_error("rate_sweep: m_list must be nonempty");
    for (std::size_t i = 1; i < cfg.m_list.size(); ++i) {
        if (cfg.m_list[i] <= cfg.m_list[i - 1])
            throw config_error("rate_sweep: m_list must be strictly increasing");
    }

    const ReluNetwork net = build_net(cfg.net);
    const std::string net_text = network_to_json(net).dump();
    const std::size_t k = net.input_dim();
    const std::size_t d = net.output_dim();

    // Fixed target representation across the sweep: the guarantee is uniform
    // over x0, so one draw from the unit sphere is a valid probe.
    Vec x0;
    const std::uint64_t x0_seed = derive_seed(cfg.base_seed, "x0");
    if (cfg.x0) {
        if (cfg.x0->size() != k) throw config_error("rate_sweep: x0 dimension mismatch");
        x0 = *cfg.x0;
    } else {
        Rng rng(x0_seed);
        x0.resize(k);
        double n = 0.0;
        do {
            for (auto& v : x0) v = rng.gaussian();
            n = norm2(x0);
        } while (n == 0.0);
        for (auto& v : x0) v /= n;
    }
    const Vec theta0 = forward(net, x0);

    std::vector<RateRow> rows;
    json seeds;
    seeds["x0"] = x0_seed;
    json trial_seeds = json::array();

    for (std::size_t m : cfg.m_list) {
        struct TrialOut {
            bool failed = false;
            double rel_error = 0.0;
            int iterations = 0;
        };
        std::vector<TrialOut> outs(cfg.trials);
        std::vector<std::uint64_t> mt_seeds(cfg.trials);
        for (std::size_t t = 0; t < cfg.trials; ++t)
            mt_seeds[t] = derive_seed(cfg.base_seed, "m", m, "trial", t);

        parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
            try {
                const std::uint64_t s = mt_seeds[t];
                Mat a = sample_sensing(cfg.sensing.dist, m, d, derive_seed(s, "a"));
                QuantizeOptions qo;
                qo.dist_label = sensing_dist_name(cfg.sensing.dist);
                MeasurementSet ms = quantize(std::move(a), theta0, cfg.sensing.noise,
                                             cfg.sensing.lambda, derive_seed(s, "q"), qo);
                SolverOptions so = cfg.solver;
                so.seed = derive_seed(s, "solver");
                const RecoveryResult res = recover(net, ms, so, x0);
                outs[t].rel_error = res.relative_error.value();
                outs[t].iterations = res.iterations;
            } catch (const numerical_error&) {
                outs[t].failed = true;
            }
        });

        RateRow row;
        row.m = m;
        std::vector<double> errs;
        double iter_sum = 0.0;
        for (const auto& o : outs) {
            if (o.failed) {
                ++row.failures;
            } else {
                errs.push_back(o.rel_error);
                iter_sum += o.iterations;
            }
        }
        if (errs.empty()) throw numerical_error("rate_sweep: every trial failed at m=" + std::to_string(m));
        std::sort(errs.begin(), errs.end());
        row.median_rel_error = quantile_sorted(errs, 0.5);
        row.q25 = quantile_sorted(errs, 0.25);
        row.q75 = quantile_sorted(errs, 0.75);
        row.mean_iters = iter_sum / static_cast<double>(errs.size());
        rows.push_back(row);

        json ms_seeds = json::array();
        for (auto s : mt_seeds) ms_seeds.push_back(s);
        trial_seeds.push_back(json{{"m", m}, {"seeds", std::move(ms_seeds)}});
    }
    seeds["trials"] = std::move(trial_seeds);

    std::string csv = "m,median,q25,q75,mean_iters,failures\n";
    for (const auto& r : rows) {
        csv += std::to_string(r.m) + "," + fmt_double(r.median_rel_error) + "," + fmt_double(r.q25) +
               "," + fmt_double(r.q75) + "," + fmt_double(r.mean_iters) + "," +
               std::to_string(r.failures) + "\n";
    }

    const SlopeFit fit = fit_rate_slope(rows);
    json slope;
    slope["slope"] = fit.slope;
    slope["intercept"] = fit.intercept;
    slope["points_used"] = fit.points_used;
    slope["excluded_saturated_m"] = fit.excluded_m;

    write_outputs(cfg, seeds, sha256_hex(net_text),
                  {{"rate_sweep.csv", csv}, {"slope.json", slope.dump(2) + "\n"}});
    return rows;
}

SlopeFit fit_rate_slope(const std::vector<RateRow>& rows) {
    SlopeFit fit;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) {
        if (r.median_rel_error < 1e-3) {
            fit.excluded_m.push_back(r.m);  // quantization noise floors the curve
            continue;
        }
        pts.emplace_back(std::log(static_cast<double>(r.m)), std::log(r.median_rel_error));
    }
    fit.points_used = pts.size();
    if (pts.size() < 2) return fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

AblationReport dither_ablation(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::dither_ablation)
        throw config_error("dither_ablation: config is for a different experiment");
    const std::size_t d = cfg.ablation.d;
    const std::size_t m = cfg.ablation.m;
    if (d < 2) throw config_error("dither_ablation: d must be >= 2");

    Vec theta1(d, 0.0), theta2(d, 0.0);
    theta1[0] = 1.0;
    theta2[0] = 1.0;
    theta2[1] = -0.5;

    // Empirical risk on a raw candidate vector (identity-like generator):
    // ||theta||^2 - (2 lambda / m) sum_i y_i <a_i, theta>.
    auto vec_loss = [](const MeasurementSet& ms, const Vec& theta) {
        return dot(theta, theta) - 2.0 * dot(ms.dither_scaled_mean, theta);
    };

    AblationReport report;

    {
        Mat a = sample_sensing(SensingDist::rademacher, m, d,
                               derive_seed(cfg.base_seed, "ablation-nodither-a"));
        QuantizeOptions qo;
        qo.dither_disabled = true;
        qo.dist_label = "rademacher";
        const MeasurementSet ms = quantize(std::move(a), theta1, NoiseSpec{}, cfg.sensing.lambda,
                                           derive_seed(cfg.base_seed, "ablation-nodither-q"), qo);
        report.dh_no_dither = sign_difference_fraction(ms, theta1, theta2);
    }

    double dh_sum = 0.0;
    for (std::size_t s = 0; s < cfg.ablation.seeds; ++s) {
        const std::uint64_t seed = derive_seed(cfg.base_seed, "ablation-seed", s);
        Mat a = sample_sensing(SensingDist::rademacher, m, d, derive_seed(seed, "a"));
        QuantizeOptions qo;
        qo.dist_label = "rademacher";
        const MeasurementSet ms1 =
            quantize(a, theta1, cfg.sensing.noise, cfg.sensing.lambda, derive_seed(seed, "q1"), qo);
        const MeasurementSet ms2 = quantize(std::move(a), theta2, cfg.sensing.noise,
                                            cfg.sensing.lambda, derive_seed(seed, "q2"), qo);
        const double dh = sign_difference_fraction(ms1, theta1, theta2);
        report.dh_dithered.push_back(dh);
        dh_sum += dh;
        const bool separated = vec_loss(ms1, theta1) < vec_loss(ms1, theta2) &&
                               vec_loss(ms2, theta2) < vec_loss(ms2, theta1);
        if (separated) ++report.separation_successes;
    }
    report.trials = cfg.ablation.seeds;
    report.dh_dithered_mean = cfg.ablation.seeds ? dh_sum / static_cast<double>(cfg.ablation.seeds) : 0.0;

    json out;
    out["no_dither"] = json{{"d_h", report.dh_no_dither}, {"m", m}};
    out["dithered"] = json{{"d_h_mean", report.dh_dithered_mean},
                           {"d_h_per_seed", report.dh_dithered},
                           {"separation_successes", report.separation_successes},
                           {"trials", report.trials},
                           {"m", m}};
    write_outputs(cfg, json{{"base", cfg.base_seed}}, "",
                  {{"ablation.json", out.dump(2) + "\n"}});
    return report;
}

LandscapeReport run_landscape(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::landscape)
        throw config_error("run_landscape: config is for a different experiment");
    const ReluNetwork net = build_net(cfg.net);
    const std::string net_text = network_to_json(net).dump();

    LandscapeOptions opts;
    opts.grid = cfg.landscape.grid;
    opts.plot_ball_scale = cfg.landscape.plot_ball_scale;
    opts.plot_origin_scale = cfg.landscape.plot_origin_scale;
    opts.eps_wdc = cfg.landscape.eps_wdc;
    opts.wdc_pairs = cfg.landscape.wdc_pairs;
    opts.wdc_seed = derive_seed(cfg.base_seed, "landscape-wdc");

    json seeds;
    seeds["wdc"] = opts.wdc_seed;

    LandscapeReport report;
    if (cfg.landscape.mode == "surrogate") {
        report = landscape_grid(net, cfg.landscape.x0, opts);
    } else if (cfg.landscape.mode == "empirical") {
        const Vec theta0 = forward(net, cfg.landscape.x0);
        const std::uint64_t a_seed = derive_seed(cfg.base_seed, "landscape-a");
        const std::uint64_t q_seed = derive_seed(cfg.base_seed, "landscape-q");
        seeds["a"] = a_seed;
        seeds["q"] = q_seed;
        Mat a = sample_sensing(cfg.sensing.dist, cfg.landscape.m, net.output_dim(), a_seed);
        QuantizeOptions qo;
        qo.dist_label = sensing_dist_name(cfg.sensing.dist);
        const MeasurementSet ms =
            quantize(std::move(a), theta0, cfg.sensing.noise, cfg.sensing.lambda, q_seed, qo);
        report = landscape_grid(net, cfg.landscape.x0, opts, ms);
    } else {
        throw config_error("landscape mode must be 'surrogate' or 'empirical'");
    }

    write_outputs(cfg, seeds, sha256_hex(net_text),
                  {{"grid.csv", landscape_report_to_csv(report)},
                   {"heatmap.svg", landscape_report_to_svg(report)},
                   {"landscape.json", landscape_report_to_json(report).dump(2) + "\n"}});
    return report;
}

std::vector<WdcReport> run_wdc_check(const ExperimentConfig& cfg) {
    if (cfg.experiment != ExperimentKind::wdc_check)
        throw config_error("run_wdc_check: config is for a different experiment");
    const ReluNetwork net = build_net(cfg.net);
    const std::string net_text = network_to_json(net).dump();

    std::vector<WdcReport> reports;
    json layers = json::array();
    json seeds = json::array();
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
        const std::uint64_t seed = derive_seed(cfg.base_seed, "wdc-layer", i);
        seeds.push_back(seed);
        reports.push_back(estimate_wdc(net.weights[i], cfg.wdc.pairs, seed, i));
        layers.push_back(wdc_report_to_json(reports.back()));
    }
    json out;
    out["layers"] = std::move(layers);
    write_outputs(cfg, json{{"layers", seeds}}, sha256_hex(net_text),
                  {{"wdc_report.json", out.dump(2) + "\n"}});
    return reports;
}

}  // namespace onebit
