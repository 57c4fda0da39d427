#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "onebit/erm.hpp"
#include "onebit/errors.hpp"
#include "onebit/experiments.hpp"
#include "onebit/landscape.hpp"
#include "onebit/rng.hpp"
#include "onebit/serialize.hpp"
#include "onebit/textio.hpp"

namespace {

using onebit::json;

onebit::Vec parse_vec(const std::string& csv) {
    onebit::Vec v;
    for (const auto& part : onebit::split(csv, ',')) {
        if (part.empty()) throw onebit::config_error("empty component in vector: " + csv);
        v.push_back(std::stod(part));
    }
    return v;
}

// Experiment subcommands share one flag surface; every flag mirrors its
// config key (dotted path), and a flag given on the command line wins over
// the config file.
struct ExperimentFlags {
    std::string config_path;
    std::string net_dims, net_path;
    std::uint64_t net_seed = 0;
    std::string sensing_dist, noise_kind;
    double noise_param = 0.0, lambda = 0.0;
    std::string m_list;
    std::size_t trials = 0;
    double solver_step = 0.0, solver_tol_grad = 0.0, solver_tol_loss = 0.0, solver_init_radius = 0.0;
    int solver_max_iters = 0, solver_negation_period = 0;
    std::uint64_t solver_seed = 0;
    std::string output_dir;
    std::uint64_t base_seed = 0;
    int threads = 0;
    std::string ls_mode, ls_x0, ls_range;
    std::size_t ls_m = 0, ls_resolution = 0, ls_wdc_pairs = 0;
    double ls_plot_ball = 0.0, ls_plot_origin = 0.0, ls_eps = 0.0;
    std::size_t abl_m = 0, abl_d = 0, abl_seeds = 0;
    std::size_t wdc_pairs = 0;

    CLI::App* cmd = nullptr;

    void attach(CLI::App* app) {
        cmd = app;
        app->add_option("--config", config_path, "JSON experiment config file");
        app->add_option("--net.dims", net_dims, "config key net.dims (comma-separated widths)");
        app->add_option("--net.seed", net_seed, "config key net.seed");
        app->add_option("--net.path", net_path, "config key net.path (serialized network JSON)");
        app->add_option("--sensing.dist", sensing_dist, "config key sensing.dist");
        app->add_option("--sensing.noise.kind", noise_kind, "config key sensing.noise.kind");
        app->add_option("--sensing.noise.param", noise_param, "config key sensing.noise.param");
        app->add_option("--sensing.lambda", lambda, "config key sensing.lambda");
        app->add_option("--m_list", m_list, "config key m_list (comma-separated)");
        app->add_option("--trials", trials, "config key trials");
        app->add_option("--solver.step", solver_step, "config key solver.step");
        app->add_option("--solver.max_iters", solver_max_iters, "config key solver.max_iters");
        app->add_option("--solver.tol_grad", solver_tol_grad, "config key solver.tol_grad");
        app->add_option("--solver.tol_loss", solver_tol_loss, "config key solver.tol_loss");
        app->add_option("--solver.negation_period", solver_negation_period,
                        "config key solver.negation_period");
        app->add_option("--solver.init_radius", solver_init_radius, "config key solver.init_radius");
        app->add_option("--solver.seed", solver_seed, "config key solver.seed");
        app->add_option("--output_dir", output_dir, "config key output_dir");
        app->add_option("--base_seed", base_seed, "config key base_seed");
        app->add_option("--threads", threads, "config key threads (ONEBIT_THREADS is the fallback)");
        app->add_option("--landscape.mode", ls_mode, "config key landscape.mode");
        app->add_option("--landscape.m", ls_m, "config key landscape.m");
        app->add_option("--landscape.x0", ls_x0, "config key landscape.x0 (comma-separated)");
        app->add_option("--landscape.range", ls_range, "config key landscape.range (lo,hi)");
        app->add_option("--landscape.resolution", ls_resolution, "config key landscape.resolution");
        app->add_option("--landscape.plot_ball_scale", ls_plot_ball,
                        "config key landscape.plot_ball_scale");
        app->add_option("--landscape.plot_origin_scale", ls_plot_origin,
                        "config key landscape.plot_origin_scale");
        app->add_option("--landscape.eps_wdc", ls_eps, "config key landscape.eps_wdc");
        app->add_option("--landscape.wdc_pairs", ls_wdc_pairs, "config key landscape.wdc_pairs");
        app->add_option("--ablation.m", abl_m, "config key ablation.m");
        app->add_option("--ablation.d", abl_d, "config key ablation.d");
        app->add_option("--ablation.seeds", abl_seeds, "config key ablation.seeds");
        app->add_option("--wdc.pairs", wdc_pairs, "config key wdc.pairs");
    }

    bool seen(const std::string& name) const { return cmd->count(name) > 0; }

    json effective_config(const std::string& experiment) const {
        json j;
        if (!config_path.empty()) j = onebit::load_json(config_path);
        j["experiment"] = experiment;
        if (seen("--net.dims")) {
            std::vector<std::size_t> dims;
            for (const auto& p : onebit::split(net_dims, ',')) dims.push_back(std::stoul(p));
            j["net"]["dims"] = dims;
        }
        if (seen("--net.seed")) j["net"]["seed"] = net_seed;
        if (seen("--net.path")) j["net"]["path"] = net_path;
        if (seen("--sensing.dist")) j["sensing"]["dist"] = sensing_dist;
        if (seen("--sensing.noise.kind")) j["sensing"]["noise"]["kind"] = noise_kind;
        if (seen("--sensing.noise.param")) j["sensing"]["noise"]["param"] = noise_param;
        if (seen("--sensing.lambda")) j["sensing"]["lambda"] = lambda;
        if (seen("--m_list")) {
            std::vector<std::size_t> ms;
            for (const auto& p : onebit::split(m_list, ',')) ms.push_back(std::stoul(p));
            j["m_list"] = ms;
        }
        if (seen("--trials")) j["trials"] = trials;
        if (seen("--solver.step")) j["solver"]["step"] = solver_step;
        if (seen("--solver.max_iters")) j["solver"]["max_iters"] = solver_max_iters;
        if (seen("--solver.tol_grad")) j["solver"]["tol_grad"] = solver_tol_grad;
        if (seen("--solver.tol_loss")) j["solver"]["tol_loss"] = solver_tol_loss;
        if (seen("--solver.negation_period")) j["solver"]["negation_period"] = solver_negation_period;
        if (seen("--solver.init_radius")) j["solver"]["init_radius"] = solver_init_radius;
        if (seen("--solver.seed")) j["solver"]["seed"] = solver_seed;
        if (seen("--output_dir")) j["output_dir"] = output_dir;
        if (seen("--base_seed")) j["base_seed"] = base_seed;
        if (seen("--threads")) {
            j["threads"] = threads;
        } else if (!j.contains("threads")) {
            if (const char* env = std::getenv("ONEBIT_THREADS")) j["threads"] = std::atoi(env);
        }
        if (seen("--landscape.mode")) j["landscape"]["mode"] = ls_mode;
        if (seen("--landscape.m")) j["landscape"]["m"] = ls_m;
        if (seen("--landscape.x0")) j["landscape"]["x0"] = parse_vec(ls_x0);
        if (seen("--landscape.range")) {
            const auto v = parse_vec(ls_range);
            j["landscape"]["range"] = v;
        }
        if (seen("--landscape.resolution")) j["landscape"]["resolution"] = ls_resolution;
        if (seen("--landscape.plot_ball_scale")) j["landscape"]["plot_ball_scale"] = ls_plot_ball;
        if (seen("--landscape.plot_origin_scale")) j["landscape"]["plot_origin_scale"] = ls_plot_origin;
        if (seen("--landscape.eps_wdc")) j["landscape"]["eps_wdc"] = ls_eps;
        if (seen("--landscape.wdc_pairs")) j["landscape"]["wdc_pairs"] = ls_wdc_pairs;
        if (seen("--ablation.m")) j["ablation"]["m"] = abl_m;
        if (seen("--ablation.d")) j["ablation"]["d"] = abl_d;
        if (seen("--ablation.seeds")) j["ablation"]["seeds"] = abl_seeds;
        if (seen("--wdc.pairs")) j["wdc"]["pairs"] = wdc_pairs;
        return j;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"onebit: dithered one-bit compressed sensing with ReLU generative priors"};
    app.require_subcommand(1);
    bool no_timestamp = true;
    app.add_flag("--no-timestamp", no_timestamp,
                 "outputs never carry timestamps; flag kept for interface stability");
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "increase verbosity");

    // gen-net
    auto* gen = app.add_subcommand("gen-net", "construct a network and write it as JSON");
    std::string gen_dims, gen_out = "net.json", gen_label;
    std::uint64_t gen_seed = 0;
    std::size_t gen_gs_k = 0, gen_gs_d = 0;
    gen->add_option("--dims", gen_dims, "layer widths, e.g. 2,64,1024");
    gen->add_option("--seed", gen_seed, "weight seed");
    gen->add_option("--group-sparse-k", gen_gs_k, "group-sparse construction: number of blocks");
    gen->add_option("--group-sparse-d", gen_gs_d, "group-sparse construction: output dimension");
    gen->add_option("--label", gen_label, "free-form provenance label");
    gen->add_option("-o,--output", gen_out, "output path");

    // measure
    auto* meas = app.add_subcommand("measure", "simulate dithered one-bit measurements");
    std::string meas_net, meas_x0, meas_theta0, meas_out = "measurements.json", meas_csv;
    std::string meas_dist = "gaussian", meas_noise_kind = "none";
    double meas_noise_param = 0.0, meas_lambda = 10.0;
    std::size_t meas_m = 1000;
    std::uint64_t meas_seed = 0;
    bool meas_no_dither = false;
    meas->add_option("--net", meas_net, "network JSON (with --x0)");
    meas->add_option("--x0", meas_x0, "representation, comma-separated; theta0 = G(x0)");
    meas->add_option("--theta0", meas_theta0, "raw target vector, comma-separated");
    meas->add_option("-m,--m", meas_m, "number of measurements");
    meas->add_option("--sensing.dist", meas_dist, "gaussian | rademacher | laplace");
    meas->add_option("--sensing.noise.kind", meas_noise_kind, "none | gaussian | laplace");
    meas->add_option("--sensing.noise.param", meas_noise_param, "sigma (gaussian) or scale (laplace)");
    meas->add_option("--sensing.lambda", meas_lambda, "dither half-width");
    meas->add_option("--seed", meas_seed, "measurement seed");
    meas->add_flag("--dither-disabled", meas_no_dither,
                   "test-only: tau_i = 0, reproduces the no-dither counterexample");
    meas->add_option("-o,--output", meas_out, "output path");
    meas->add_option("--csv", meas_csv, "also write (i, y_i) rows to this CSV");

    // recover
    auto* rec = app.add_subcommand("recover", "estimate x from a measurement set");
    std::string rec_net, rec_ms, rec_out = "recovery.json", rec_trace, rec_x0, rec_init, rec_config;
    ExperimentFlags rec_flags;  // reuse solver dotted flags
    rec->add_option("--net", rec_net, "network JSON")->required();
    rec->add_option("--measurements", rec_ms, "measurement-set JSON")->required();
    rec->add_option("--config", rec_config, "JSON config; its solver block seeds the options");
    rec->add_option("--x0", rec_x0, "true representation, for relative error");
    rec->add_option("--init", rec_init, "explicit solver start point");
    rec->add_option("--solver.step", rec_flags.solver_step, "config key solver.step");
    rec->add_option("--solver.max_iters", rec_flags.solver_max_iters, "config key solver.max_iters");
    rec->add_option("--solver.tol_grad", rec_flags.solver_tol_grad, "config key solver.tol_grad");
    rec->add_option("--solver.tol_loss", rec_flags.solver_tol_loss, "config key solver.tol_loss");
    rec->add_option("--solver.negation_period", rec_flags.solver_negation_period,
                    "config key solver.negation_period");
    rec->add_option("--solver.init_radius", rec_flags.solver_init_radius,
                    "config key solver.init_radius");
    rec->add_option("--solver.seed", rec_flags.solver_seed, "config key solver.seed");
    rec->add_option("-o,--output", rec_out, "output path");
    rec->add_option("--trace", rec_trace, "also write the loss trace CSV here");

    // experiment subcommands
    auto* ls = app.add_subcommand("landscape", "landscape grid over [range]^2 (k = 2)");
    ExperimentFlags ls_flags;
    ls_flags.attach(ls);
    auto* rate = app.add_subcommand("rate-sweep", "statistical-rate sweep over m_list");
    ExperimentFlags rate_flags;
    rate_flags.attach(rate);
    auto* abl = app.add_subcommand("dither-ablation", "no-dither counterexample plus dithered run");
    ExperimentFlags abl_flags;
    abl_flags.attach(abl);
    auto* wdc = app.add_subcommand("wdc-check", "sampled WDC deviation per layer");
    ExperimentFlags wdc_flags;
    wdc_flags.attach(wdc);

    // rho
    auto* rho = app.add_subcommand("rho", "print rho_n and the rho-check sequence");
    int rho_layers = 2;
    rho->add_option("--n", rho_layers, "number of layers")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // any command-line problem is a configuration error
    }

    if (gen->parsed()) {
        onebit::ReluNetwork net;
        if (gen_gs_k > 0 || gen_gs_d > 0) {
            net = onebit::group_sparse_network(gen_gs_k, gen_gs_d);
        } else if (!gen_dims.empty()) {
            std::vector<std::size_t> dims;
            for (const auto& p : onebit::split(gen_dims, ',')) dims.push_back(std::stoul(p));
            net = onebit::new_random_gaussian(dims, onebit::WeightScaleRule::variance_one_over_fanout,
                                              gen_seed);
        } else {
            throw onebit::config_error("gen-net: need --dims or --group-sparse-k/--group-sparse-d");
        }
        if (!gen_label.empty()) net.label = gen_label;
        onebit::save_json(gen_out, onebit::network_to_json(net));
        if (verbosity > 0) std::cerr << "wrote " << gen_out << "\n";
        return 0;
    }

    if (meas->parsed()) {
        onebit::Vec theta0;
        if (!meas_theta0.empty()) {
            theta0 = parse_vec(meas_theta0);
        } else if (!meas_net.empty() && !meas_x0.empty()) {
            const auto net = onebit::network_from_json(onebit::load_json(meas_net));
            theta0 = onebit::forward(net, parse_vec(meas_x0));
        } else {
            throw onebit::config_error("measure: need --theta0, or --net together with --x0");
        }
        onebit::NoiseSpec noise;
        if (meas_noise_kind == "none") noise.kind = onebit::NoiseKind::none;
        else if (meas_noise_kind == "gaussian") noise.kind = onebit::NoiseKind::gaussian;
        else if (meas_noise_kind == "laplace") noise.kind = onebit::NoiseKind::laplace;
        else throw onebit::config_error("unknown noise kind: " + meas_noise_kind);
        noise.param = meas_noise_param;

        const auto dist = onebit::parse_sensing_dist(meas_dist);
        onebit::Mat a = onebit::sample_sensing(dist, meas_m, theta0.size(),
                                               onebit::derive_seed(meas_seed, "a"));
        onebit::QuantizeOptions qo;
        qo.dither_disabled = meas_no_dither;
        qo.dist_label = meas_dist;
        const auto ms = onebit::quantize(std::move(a), theta0, noise, meas_lambda,
                                         onebit::derive_seed(meas_seed, "q"), qo);
        onebit::save_json(meas_out, onebit::measurements_to_json(ms));
        if (!meas_csv.empty()) onebit::write_file(meas_csv, onebit::measurements_to_csv(ms));
        if (verbosity > 0) std::cerr << "wrote " << meas_out << "\n";
        return 0;
    }

    if (rec->parsed()) {
        const auto net = onebit::network_from_json(onebit::load_json(rec_net));
        const auto ms = onebit::measurements_from_json(onebit::load_json(rec_ms));
        onebit::SolverOptions opts;
        if (!rec_config.empty()) {
            const json cfg = onebit::load_json(rec_config);
            if (cfg.contains("solver")) opts = onebit::solver_options_from_json(cfg.at("solver"));
        }
        if (rec->count("--solver.step")) opts.step = rec_flags.solver_step;
        if (rec->count("--solver.max_iters")) opts.max_iters = rec_flags.solver_max_iters;
        if (rec->count("--solver.tol_grad")) opts.tol_grad = rec_flags.solver_tol_grad;
        if (rec->count("--solver.tol_loss")) opts.tol_loss = rec_flags.solver_tol_loss;
        if (rec->count("--solver.negation_period"))
            opts.negation_period = rec_flags.solver_negation_period;
        if (rec->count("--solver.init_radius")) opts.init_radius = rec_flags.solver_init_radius;
        if (rec->count("--solver.seed")) opts.seed = rec_flags.solver_seed;
        if (!rec_init.empty()) opts.init = parse_vec(rec_init);
        std::optional<onebit::Vec> x0;
        if (!rec_x0.empty()) x0 = parse_vec(rec_x0);
        const auto result = onebit::recover(net, ms, opts, x0);
        onebit::save_json(rec_out, onebit::recovery_result_to_json(result));
        if (!rec_trace.empty()) onebit::write_file(rec_trace, onebit::loss_trace_to_csv(result));
        if (verbosity > 0) std::cerr << "wrote " << rec_out << "\n";
        return 0;
    }

    if (rho->parsed()) {
        const auto seq = onebit::rho_check_sequence(rho_layers);
        std::cout << "rho_" << rho_layers << " = " << onebit::fmt_double(onebit::rho_n(rho_layers))
                  << "\n";
        std::cout << "rho_check =";
        for (double v : seq) std::cout << " " << onebit::fmt_double(v);
        std::cout << "\n";
        return 0;
    }

    auto run_experiment = [&](const ExperimentFlags& flags, const std::string& kind) {
        const json j = flags.effective_config(kind);
        const auto cfg = onebit::parse_experiment_config(j);
        switch (cfg.experiment) {
            case onebit::ExperimentKind::rate_sweep: onebit::rate_sweep(cfg); break;
            case onebit::ExperimentKind::dither_ablation: onebit::dither_ablation(cfg); break;
            case onebit::ExperimentKind::landscape: onebit::run_landscape(cfg); break;
            case onebit::ExperimentKind::wdc_check: onebit::run_wdc_check(cfg); break;
        }
        if (verbosity > 0) std::cerr << "outputs under " << cfg.output_dir << "\n";
    };

    if (ls->parsed()) run_experiment(ls_flags, "landscape");
    if (rate->parsed()) run_experiment(rate_flags, "rate_sweep");
    if (abl->parsed()) run_experiment(abl_flags, "dither_ablation");
    if (wdc->parsed()) run_experiment(wdc_flags, "wdc_check");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const onebit::config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const onebit::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const onebit::io_error& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
