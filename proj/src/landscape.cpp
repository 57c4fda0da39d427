#include "onebit/landscape.hpp"

#include <algorithm>
#include <cmath>

#include "onebit/erm.hpp"
#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

namespace onebit {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

double angle_between(const Vec& x, const Vec& z) {
    const double nx = norm2(x);
    const double nz = norm2(z);
    if (nx == 0.0 || nz == 0.0) throw config_error("angle_between: zero vector");
    const double c = std::clamp(dot(x, z) / (nx * nz), -1.0, 1.0);
    return std::acos(c);
}

Mat m_matrix(const Vec& x_hat, const Vec& z_hat) {
    if (x_hat.size() != z_hat.size()) throw config_error("m_matrix: dimension mismatch");
    const std::size_t p = x_hat.size();
    if (std::abs(norm2(x_hat) - 1.0) > 1e-10 || std::abs(norm2(z_hat) - 1.0) > 1e-10)
        throw config_error("m_matrix: inputs must be unit vectors");

    const double theta = angle_between(x_hat, z_hat);
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    Mat m(p, p);
    if (s < 1e-12) {
        // Collinear: x_hat x_hat^T at angle 0, its negation at angle pi.
        const double sign = c >= 0.0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) m(i, j) = sign * x_hat[i] * x_hat[j];
        return m;
    }

    // Orthonormal basis (u1, u2) of span{x_hat, z_hat} with u1 = x_hat; in
    // that basis M is the 2x2 block [[cos, sin], [sin, -cos]].
    Vec u1 = x_hat;
    Vec u2(p);
    for (std::size_t i = 0; i < p; ++i) u2[i] = (z_hat[i] - c * x_hat[i]) / s;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            m(i, j) = c * u1[i] * u1[j] + s * u1[i] * u2[j] + s * u2[i] * u1[j] - c * u2[i] * u2[j];
        }
    }
    return m;
}

Mat q_matrix(const Vec& x, const Vec& z) {
    const double nx = norm2(x);
    const double nz = norm2(z);
    if (nx == 0.0 || nz == 0.0) throw config_error("q_matrix: zero vector");
    const double theta = angle_between(x, z);
    Mat m = m_matrix(scaled(x, 1.0 / nx), scaled(z, 1.0 / nz));
    const std::size_t p = x.size();
    const double ci = (kPi - theta) / (2.0 * kPi);
    const double cm = std::sin(theta) / (2.0 * kPi);
    Mat q(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) q(i, j) = cm * m(i, j);
        q(i, i) += ci;
    }
    return q;
}

double wdc_deviation(const Mat& w, const Vec& x, const Vec& z) {
    const std::size_t p = w.cols;
    if (x.size() != p || z.size() != p) throw config_error("wdc_deviation: dimension mismatch");
    if (norm2(x) == 0.0 || norm2(z) == 0.0) throw config_error("wdc_deviation: zero vector");

    // W_{+,x}^T W_{+,z} = sum over rows active at both anchors of w_i w_i^T.
    Mat gram(p, p);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* row = w.row(i);
        double px = 0.0, pz = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            px += row[j] * x[j];
            pz += row[j] * z[j];
        }
        if (px > 0.0 && pz > 0.0) {
            for (std::size_t a = 0; a < p; ++a) {
                const double ra = row[a];
                for (std::size_t b = 0; b < p; ++b) gram(a, b) += ra * row[b];
            }
        }
    }
    const Mat q = q_matrix(x, z);
    for (std::size_t i = 0; i < p * p; ++i) gram.data[i] -= q.data[i];
    return spectral_norm_sym(gram);
}

WdcReport estimate_wdc(const Mat& w, std::size_t n_pairs, std::uint64_t seed,
                       std::size_t layer_index) {
    if (n_pairs < 1) throw config_error("estimate_wdc: n_pairs must be >= 1");
    const std::size_t p = w.cols;

    Rng rng(derive_seed(seed, "wdc"));
    auto random_dir = [&]() {
        Vec v(p);
        double n = 0.0;
        do {
            for (auto& e : v) e = rng.gaussian();
            n = norm2(v);
        } while (n == 0.0);
        for (auto& e : v) e /= n;
        return v;
    };

    std::vector<std::pair<Vec, Vec>> pairs;
    pairs.reserve(n_pairs + 12);
    for (std::size_t i = 0; i < n_pairs; ++i) pairs.emplace_back(random_dir(), random_dir());
    // Forced special angles: identical, antipodal, and near-parallel pairs.
    const Vec x_special = random_dir();
    pairs.emplace_back(x_special, x_special);
    pairs.emplace_back(x_special, scaled(x_special, -1.0));
    for (int i = 0; i < 10; ++i) {
        Vec zp = x_special;
        const Vec d = random_dir();
        add_scaled(zp, d, 1e-3 * (i + 1));
        const double n = norm2(zp);
        for (auto& e : zp) e /= n;
        pairs.emplace_back(x_special, zp);
    }

    WdcReport report;
    report.layer_index = layer_index;
    report.pair_count = pairs.size();

    std::vector<double> deviations;
    deviations.reserve(pairs.size());
    for (const auto& [x, z] : pairs) {
        const double dev = wdc_deviation(w, x, z);
        deviations.push_back(dev);
        if (dev >= report.epsilon_hat) {
            report.epsilon_hat = dev;
            report.worst_pair = {x, z, angle_between(x, z), dev};
        }
    }

    std::sort(deviations.begin(), deviations.end());
    for (double q : {0.25, 0.5, 0.75, 0.9, 0.99, 1.0}) {
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(deviations.size() - 1));
        report.deviation_quantiles.emplace_back(q, deviations[idx]);
    }
    return report;
}

double g_angle(double rho) {
    if (rho < 0.0 || rho > kPi) throw config_error("g_angle: argument must lie in [0, pi]");
    const double c = std::clamp(((kPi - rho) * std::cos(rho) + std::sin(rho)) / kPi, -1.0, 1.0);
    return std::acos(c);
}

std::vector<double> rho_check_sequence(int n) {
    if (n < 1) throw config_error("rho_check_sequence: n must be >= 1");
    std::vector<double> seq(static_cast<std::size_t>(n));
    seq[0] = kPi;
    for (int i = 1; i < n; ++i) seq[i] = g_angle(seq[i - 1]);
    return seq;
}

double rho_n(int n) {
    const std::vector<double> seq = rho_check_sequence(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        // sin(rho_check_0) = sin(pi) = 0 identically; fold it in so the
        // base case is exact.
        const double s = i == 0 ? 0.0 : std::sin(seq[i]);
        double prod = 1.0;
        for (int j = i + 1; j < n; ++j) prod *= (kPi - seq[j]) / kPi;
        total += (s / kPi) * prod;
    }
    return total;
}

Vec h_vector(const Vec& x, const Vec& x0, int n) {
    if (n < 1) throw config_error("h_vector: n must be >= 1");
    const double nx = norm2(x);
    const double nx0 = norm2(x0);
    if (nx == 0.0 || nx0 == 0.0) throw config_error("h_vector: zero vector");
    if (x.size() != x0.size()) throw config_error("h_vector: dimension mismatch");

    std::vector<double> rho_bar(static_cast<std::size_t>(n));
    rho_bar[0] = angle_between(x, x0);
    for (int i = 1; i < n; ++i) rho_bar[i] = g_angle(rho_bar[i - 1]);

    double prod_all = 1.0;
    for (int i = 0; i < n; ++i) prod_all *= (kPi - rho_bar[i]) / kPi;

    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double prod = 1.0;
        for (int j = i + 1; j < n; ++j) prod *= (kPi - rho_bar[j]) / kPi;
        sum += (std::sin(rho_bar[i]) / kPi) * prod;
    }

    const double inv2n = std::ldexp(1.0, -n);  // 2^{-n}
    Vec h(x.size());
    const double xcoef = inv2n * (1.0 - sum * nx0 / nx);
    for (std::size_t j = 0; j < x.size(); ++j) h[j] = xcoef * x[j] - inv2n * prod_all * x0[j];
    return h;
}

Radii radii(int n, double eps_wdc, double x0_norm, double c4, double c5) {
    if (eps_wdc <= 0.0) throw config_error("radii: eps_wdc must be positive");
    if (x0_norm < 0.0) throw config_error("radii: x0_norm must be nonnegative");
    const double quarter = std::pow(eps_wdc, 0.25);
    const double n3 = std::pow(static_cast<double>(n), 3.0);
    const double n14 = std::pow(static_cast<double>(n), 14.0);
    Radii r;
    r.delta_check = std::pow(2.0, 0.5 * n) * std::sqrt(eps_wdc);
    r.delta_1 = c4 * n3 * quarter * x0_norm;
    r.delta_2 = c5 * n14 * quarter * x0_norm;
    return r;
}

bool wdc_condition_converge_set(int n, double eps_wdc) {
    const double n6 = std::pow(static_cast<double>(n), 6.0);
    return 8.0 * kPi * n6 * std::sqrt(eps_wdc) <= 1.0;
}

bool wdc_condition_theorem(int n, double eps_wdc) {
    const double n6 = std::pow(static_cast<double>(n), 6.0);
    return 88.0 * kPi * n6 * std::pow(eps_wdc, 0.25) < 1.0;
}

std::string zone_name(Zone z) {
    switch (z) {
        case Zone::near_x0: return "near_x0";
        case Zone::near_neg_rho_x0: return "near_neg_rho_x0";
        case Zone::near_zero: return "near_zero";
        case Zone::outside: return "outside";
    }
    return "outside";
}

Zone classify(const Vec& x, const Vec& x0, const Radii& r, double rho) {
    if (x.size() != x0.size()) throw config_error("classify: dimension mismatch");
    if (norm2(vsub(x, x0)) <= r.delta_1) return Zone::near_x0;
    Vec neg = scaled(x0, -rho);
    if (norm2(vsub(x, neg)) <= r.delta_2) return Zone::near_neg_rho_x0;
    if (norm2(x) <= r.delta_check) return Zone::near_zero;
    return Zone::outside;
}

namespace {

LandscapeReport grid_against_target(const ReluNetwork& net, const Vec& x0,
                                    const LandscapeOptions& opts, const Vec& target,
                                    const std::string& mode) {
    if (net.input_dim() != 2) throw config_error("landscape_grid: grid mode requires k = 2");
    if (x0.size() != 2) throw config_error("landscape_grid: x0 must be 2-dimensional");
    if (opts.grid.resolution < 2) throw config_error("landscape_grid: resolution must be >= 2");

    LandscapeReport report;
    report.resolution = opts.grid.resolution;
    report.mode = mode;
    report.x0 = x0;
    report.grid = opts.grid;

    const int n = static_cast<int>(net.depth());
    report.rho = rho_n(n);

    double eps = opts.eps_wdc;
    if (eps <= 0.0) {
        // Sampled per-layer certification; the max over layers feeds the
        // theorem radii.
        for (std::size_t i = 0; i < net.weights.size(); ++i) {
            const WdcReport wr =
                estimate_wdc(net.weights[i], opts.wdc_pairs, derive_seed(opts.wdc_seed, "layer", i), i);
            eps = std::max(eps, wr.epsilon_hat);
        }
    }
    report.eps_wdc = eps;
    const double x0n = norm2(x0);
    report.theorem_radii = radii(n, eps, x0n);
    report.plot_radii = Radii{opts.plot_origin_scale * x0n, opts.plot_ball_scale * x0n,
                              opts.plot_ball_scale * x0n};

    const std::size_t res = opts.grid.resolution;
    const double dx1 = (opts.grid.x1_max - opts.grid.x1_min) / static_cast<double>(res - 1);
    const double dx2 = (opts.grid.x2_max - opts.grid.x2_min) / static_cast<double>(res - 1);

    report.cells.resize(res * res);
    for (std::size_t i = 0; i < res; ++i) {
        for (std::size_t j = 0; j < res; ++j) {
            LandscapeCell& cell = report.cells[i * res + j];
            cell.x1 = opts.grid.x1_min + static_cast<double>(i) * dx1;
            cell.x2 = opts.grid.x2_min + static_cast<double>(j) * dx2;
            const Vec x = {cell.x1, cell.x2};
            cell.loss = target_loss(net, target, x);
            const Vec v = target_subgradient(net, target, x);
            cell.grad_norm = norm2(v);
            if (cell.grad_norm > 0.0) {
                const double dd = target_directional_derivative(net, target, x, scaled(v, -1.0));
                cell.descent_ok = dd < 0.0;
            } else {
                cell.descent_ok = false;  // exactly stationary under the masks
            }
            cell.zone = classify(x, x0, report.plot_radii, report.rho);
        }
    }
    return report;
}

}  // namespace

LandscapeReport landscape_grid(const ReluNetwork& net, const Vec& x0, const LandscapeOptions& opts) {
    const Vec target = forward(net, x0);
    return grid_against_target(net, x0, opts, target, "surrogate");
}

LandscapeReport landscape_grid(const ReluNetwork& net, const Vec& x0, const LandscapeOptions& opts,
                               const MeasurementSet& ms) {
    if (ms.d() != net.output_dim()) throw config_error("landscape_grid: measurement dimension mismatch");
    return grid_against_target(net, x0, opts, ms.dither_scaled_mean,
                               "empirical(m=" + std::to_string(ms.m()) + ")");
}

}  // namespace onebit
