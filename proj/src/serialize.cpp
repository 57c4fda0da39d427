#include "onebit/serialize.hpp"

#include <algorithm>
#include <cmath>

#include "onebit/errors.hpp"
#include "onebit/textio.hpp"

namespace onebit {

json network_to_json(const ReluNetwork& net) {
    json j;
    j["dims"] = net.dims;
    json layers = json::array();
    for (const Mat& w : net.weights) {
        json rows = json::array();
        for (std::size_t i = 0; i < w.rows; ++i) {
            json row = json::array();
            for (std::size_t c = 0; c < w.cols; ++c) row.push_back(w(i, c));
            rows.push_back(std::move(row));
        }
        layers.push_back(std::move(rows));
    }
    j["weights"] = std::move(layers);
    j["label"] = net.label;
    return j;
}

ReluNetwork network_from_json(const json& j) {
    ReluNetwork net;
    try {
        net.dims = j.at("dims").get<std::vector<std::size_t>>();
        net.label = j.value("label", "");
        for (const auto& layer : j.at("weights")) {
            const std::size_t rows = layer.size();
            if (rows == 0) throw config_error("network JSON: empty weight matrix");
            const std::size_t cols = layer[0].size();
            Mat w(rows, cols);
            for (std::size_t i = 0; i < rows; ++i) {
                if (layer[i].size() != cols) throw config_error("network JSON: ragged weight rows");
                for (std::size_t c = 0; c < cols; ++c) w(i, c) = layer[i][c].get<double>();
            }
            net.weights.push_back(std::move(w));
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("network JSON: ") + e.what());
    }
    net.validate();
    return net;
}

json measurements_to_json(const MeasurementSet& ms) {
    json j;
    j["lambda"] = ms.lambda;
    j["dist"] = ms.dist;
    j["seed"] = ms.seed;
    json rows = json::array();
    for (std::size_t i = 0; i < ms.m(); ++i) {
        json row = json::array();
        const double* r = ms.a.row(i);
        for (std::size_t c = 0; c < ms.d(); ++c) row.push_back(r[c]);
        rows.push_back(std::move(row));
    }
    j["a"] = std::move(rows);
    j["xi"] = ms.xi;
    j["tau"] = ms.tau;
    json y = json::array();
    for (std::int8_t v : ms.y) y.push_back(static_cast<int>(v));
    j["y"] = std::move(y);
    return j;
}

MeasurementSet measurements_from_json(const json& j) {
    MeasurementSet ms;
    try {
        ms.lambda = j.at("lambda").get<double>();
        ms.dist = j.value("dist", "unknown");
        ms.seed = j.value("seed", std::uint64_t{0});
        const auto& rows = j.at("a");
        const std::size_t m = rows.size();
        if (m == 0) throw config_error("measurements JSON: empty matrix");
        const std::size_t d = rows[0].size();
        ms.a = Mat(m, d);
        for (std::size_t i = 0; i < m; ++i) {
            if (rows[i].size() != d) throw config_error("measurements JSON: ragged rows");
            for (std::size_t c = 0; c < d; ++c) ms.a(i, c) = rows[i][c].get<double>();
        }
        ms.xi = j.at("xi").get<Vec>();
        ms.tau = j.at("tau").get<Vec>();
        for (const auto& v : j.at("y")) ms.y.push_back(static_cast<std::int8_t>(v.get<int>()));
    } catch (const json::exception& e) {
        throw config_error(std::string("measurements JSON: ") + e.what());
    }
    ms.validate();
    ms.rebuild_cache();
    return ms;
}

std::string measurements_to_csv(const MeasurementSet& ms) {
    std::string s = "i,y_i\n";
    for (std::size_t i = 0; i < ms.m(); ++i) {
        s += std::to_string(i);
        s += ',';
        s += std::to_string(static_cast<int>(ms.y[i]));
        s += '\n';
    }
    return s;
}

json solver_options_to_json(const SolverOptions& o) {
    json j;
    j["step"] = o.step;
    j["max_iters"] = o.max_iters;
    j["tol_grad"] = o.tol_grad;
    j["tol_loss"] = o.tol_loss;
    j["negation_period"] = o.negation_period;
    j["init_radius"] = o.init_radius;
    j["seed"] = o.seed;
    if (o.init) j["init"] = *o.init;
    return j;
}

SolverOptions solver_options_from_json(const json& j) {
    SolverOptions o;
    try {
        o.step = j.value("step", o.step);
        o.max_iters = j.value("max_iters", o.max_iters);
        o.tol_grad = j.value("tol_grad", o.tol_grad);
        o.tol_loss = j.value("tol_loss", o.tol_loss);
        o.negation_period = j.value("negation_period", o.negation_period);
        o.init_radius = j.value("init_radius", o.init_radius);
        o.seed = j.value("seed", o.seed);
        if (j.contains("init")) o.init = j.at("init").get<Vec>();
    } catch (const json::exception& e) {
        throw config_error(std::string("solver JSON: ") + e.what());
    }
    return o;
}

json recovery_result_to_json(const RecoveryResult& r) {
    json j;
    j["x_hat"] = r.x_hat;
    j["g_x_hat"] = r.g_x_hat;
    json trace = json::array();
    for (const auto& [it, l] : r.loss_trace) trace.push_back(json::array({it, l}));
    j["loss_trace"] = std::move(trace);
    j["restarts"] = r.restarts;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    if (r.relative_error) {
        j["relative_error"] = *r.relative_error;
    } else {
        j["relative_error"] = nullptr;
    }
    j["config_echo"] = solver_options_to_json(r.config_echo);
    return j;
}

std::string loss_trace_to_csv(const RecoveryResult& r) {
    std::string s = "iteration,loss\n";
    for (const auto& [it, l] : r.loss_trace) {
        s += std::to_string(it);
        s += ',';
        s += fmt_double(l);
        s += '\n';
    }
    return s;
}

namespace {

json radii_to_json(const Radii& r) {
    return json{{"delta_check", r.delta_check}, {"delta_1", r.delta_1}, {"delta_2", r.delta_2}};
}

}  // namespace

json landscape_report_to_json(const LandscapeReport& r) {
    json j;
    j["mode"] = r.mode;
    j["x0"] = r.x0;
    j["rho_n"] = r.rho;
    j["eps_wdc"] = r.eps_wdc;
    j["theorem_radii"] = radii_to_json(r.theorem_radii);
    j["plot_radii"] = radii_to_json(r.plot_radii);
    j["resolution"] = r.resolution;
    j["range"] = json::array({r.grid.x1_min, r.grid.x1_max});
    return j;
}

std::string landscape_report_to_csv(const LandscapeReport& r) {
    std::string s = "x1,x2,loss,grad_norm,descent_ok,zone\n";
    for (const auto& c : r.cells) {
        s += fmt_double(c.x1);
        s += ',';
        s += fmt_double(c.x2);
        s += ',';
        s += fmt_double(c.loss);
        s += ',';
        s += fmt_double(c.grad_norm);
        s += ',';
        s += c.descent_ok ? '1' : '0';
        s += ',';
        s += zone_name(c.zone);
        s += '\n';
    }
    return s;
}

json wdc_report_to_json(const WdcReport& r) {
    json j;
    j["layer_index"] = r.layer_index;
    j["epsilon_hat"] = r.epsilon_hat;
    j["pair_count"] = r.pair_count;
    j["worst_pair"] = json{{"x", r.worst_pair.x},
                           {"z", r.worst_pair.z},
                           {"angle", r.worst_pair.angle},
                           {"deviation", r.worst_pair.deviation}};
    json q = json::array();
    for (const auto& [p, v] : r.deviation_quantiles) q.push_back(json::array({p, v}));
    j["deviation_quantiles"] = std::move(q);
    return j;
}

namespace {

struct Rgb {
    double r, g, b;
};

Rgb viridis5(double t) {
    static const Rgb stops[5] = {{0x44 / 255.0, 0x01 / 255.0, 0x54 / 255.0},
                                 {0x3b / 255.0, 0x52 / 255.0, 0x8b / 255.0},
                                 {0x21 / 255.0, 0x91 / 255.0, 0x8c / 255.0},
                                 {0x5e / 255.0, 0xc9 / 255.0, 0x62 / 255.0},
                                 {0xfd / 255.0, 0xe7 / 255.0, 0x25 / 255.0}};
    t = std::clamp(t, 0.0, 1.0) * 4.0;
    const int i = std::min(3, static_cast<int>(t));
    const double f = t - i;
    return {stops[i].r + f * (stops[i + 1].r - stops[i].r),
            stops[i].g + f * (stops[i + 1].g - stops[i].g),
            stops[i].b + f * (stops[i + 1].b - stops[i].b)};
}

std::string hex_color(const Rgb& c) {
    static const char* hex = "0123456789abcdef";
    auto channel = [&](double v) {
        const int b = std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255);
        std::string s;
        s += hex[b >> 4];
        s += hex[b & 0xf];
        return s;
    };
    return "#" + channel(c.r) + channel(c.g) + channel(c.b);
}

}  // namespace

std::string landscape_report_to_svg(const LandscapeReport& r) {
    const std::size_t res = r.resolution;
    const double px = 6.0;  // pixels per cell
    const double w = px * static_cast<double>(res);

    double lo = r.cells.front().loss, hi = lo;
    for (const auto& c : r.cells) {
        lo = std::min(lo, c.loss);
        hi = std::max(hi, c.loss);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    const double x1_span = r.grid.x1_max - r.grid.x1_min;
    const double x2_span = r.grid.x2_max - r.grid.x2_min;
    auto to_px_x = [&](double x1) { return (x1 - r.grid.x1_min) / x1_span * w; };
    auto to_px_y = [&](double x2) { return w - (x2 - r.grid.x2_min) / x2_span * w; };
    const double r_px_scale = w / x1_span;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_double(w + 140.0) +
           "\" height=\"" + fmt_double(w) + "\" viewBox=\"0 0 " + fmt_double(w + 140.0) + " " +
           fmt_double(w) + "\">\n";
    for (std::size_t i = 0; i < res; ++i) {
        for (std::size_t j = 0; j < res; ++j) {
            const auto& c = r.cells[i * res + j];
            const double t = (c.loss - lo) / span;
            svg += "<rect x=\"" + fmt_double(to_px_x(c.x1) - px / 2.0) + "\" y=\"" +
                   fmt_double(to_px_y(c.x2) - px / 2.0) + "\" width=\"" + fmt_double(px) +
                   "\" height=\"" + fmt_double(px) + "\" fill=\"" + hex_color(viridis5(t)) + "\"/>\n";
        }
    }

    auto circle = [&](double cx, double cy, double radius, const char* stroke) {
        svg += "<circle cx=\"" + fmt_double(to_px_x(cx)) + "\" cy=\"" + fmt_double(to_px_y(cy)) +
               "\" r=\"" + fmt_double(radius * r_px_scale) +
               "\" fill=\"none\" stroke-width=\"1.5\" stroke=\"" + stroke + "\"/>\n";
    };
    circle(r.x0[0], r.x0[1], r.plot_radii.delta_1, "#ffffff");
    circle(-r.rho * r.x0[0], -r.rho * r.x0[1], r.plot_radii.delta_2, "#ff8800");
    circle(0.0, 0.0, r.plot_radii.delta_check, "#bbbbbb");

    svg += "<text x=\"" + fmt_double(w + 8.0) + "\" y=\"16\" font-size=\"11\" fill=\"#000\">" +
           r.mode + "</text>\n";
    svg += "<text x=\"" + fmt_double(w + 8.0) + "\" y=\"32\" font-size=\"11\" fill=\"#000\">min " +
           fmt_double(lo) + "</text>\n";
    svg += "<text x=\"" + fmt_double(w + 8.0) + "\" y=\"48\" font-size=\"11\" fill=\"#000\">max " +
           fmt_double(hi) + "</text>\n";
    svg += "<text x=\"" + fmt_double(w + 8.0) + "\" y=\"64\" font-size=\"11\" fill=\"#000\">rho_n " +
           fmt_double(r.rho) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

void save_json(const std::string& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

json load_json(const std::string& path) {
    const std::string text = read_file(path);
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw config_error("malformed JSON: " + path);
    return j;
}

}  // namespace onebit
