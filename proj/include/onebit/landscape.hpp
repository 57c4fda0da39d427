#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "onebit/generator.hpp"
#include "onebit/sensing.hpp"

namespace onebit {

// Angle between nonzero vectors, arccos of the clamped normalized inner
// product. Throws config_error on zero input.
double angle_between(const Vec& x, const Vec& z);

// M_{x_hat <-> z_hat}: swaps x_hat and z_hat and annihilates the orthogonal
// complement of their span. Angle 0 gives x_hat x_hat^T, angle pi gives
// -x_hat x_hat^T. Inputs must be unit within 1e-10.
Mat m_matrix(const Vec& x_hat, const Vec& z_hat);

// Q_{x,z} = (pi - angle)/(2 pi) I + sin(angle)/(2 pi) M.
Mat q_matrix(const Vec& x, const Vec& z);

// || W_{+,x}^T W_{+,z} - Q_{x,z} ||_2 by power iteration.
double wdc_deviation(const Mat& w, const Vec& x, const Vec& z);

struct WdcReport {
    std::size_t layer_index = 0;
    double epsilon_hat = 0.0;  // max sampled deviation; a LOWER bound on the true sup
    std::size_t pair_count = 0;
    struct WorstPair {
        Vec x, z;
        double angle = 0.0;
        double deviation = 0.0;
    } worst_pair;
    std::vector<std::pair<double, double>> deviation_quantiles;  // (q, value)
};

// Sampled certification of the WDC sup: n_pairs uniform direction pairs plus
// forced special pairs (x,x), (x,-x) and near-parallel perturbations.
WdcReport estimate_wdc(const Mat& w, std::size_t n_pairs, std::uint64_t seed,
                       std::size_t layer_index = 0);

// g(rho) = arccos(((pi - rho) cos rho + sin rho) / pi) on [0, pi].
double g_angle(double rho);

// [rho_check_0, ..., rho_check_{n-1}]: rho_check_0 = pi, then g-iterates.
std::vector<double> rho_check_sequence(int n);

// rho_n = sum_i (sin rho_check_i / pi) prod_{j>i} (pi - rho_check_j)/pi.
// sin(rho_check_0) = sin(pi) = 0 is folded in analytically so rho_1 == 0.
double rho_n(int n);

// h_{x,x0}: closed-form proxy for half the expected gradient. The angle
// recursion runs rho_bar_0 = angle(x, x0), rho_bar_i = g(rho_bar_{i-1}), and
// both product upper limits are n-1.
Vec h_vector(const Vec& x, const Vec& x0, int n);

struct Radii {
    double delta_check = 0.0;  // around the origin
    double delta_1 = 0.0;      // around x0
    double delta_2 = 0.0;      // around -rho_n x0
};

// Theorem radii (2^{n/2} sqrt(eps), c4 n^3 eps^{1/4} ||x0||,
// c5 n^14 eps^{1/4} ||x0||) with the proof constants c4 = 616, c5 = 5500 as
// defaults.
Radii radii(int n, double eps_wdc, double x0_norm, double c4 = 616.0, double c5 = 5500.0);

// Checkable epsilon conditions lifted from the proofs.
bool wdc_condition_converge_set(int n, double eps_wdc);  // 8 pi n^6 sqrt(eps) <= 1
bool wdc_condition_theorem(int n, double eps_wdc);       // 88 pi n^6 eps^{1/4} < 1

enum class Zone { near_x0, near_neg_rho_x0, near_zero, outside };

std::string zone_name(Zone z);

// Priority order: the x0 ball wins, then the -rho_n x0 ball, then the origin
// ball.
Zone classify(const Vec& x, const Vec& x0, const Radii& r, double rho);

struct GridSpec {
    double x1_min = -2.0, x1_max = 2.0;
    double x2_min = -2.0, x2_max = 2.0;
    std::size_t resolution = 81;  // points per axis, >= 2
};

struct LandscapeOptions {
    GridSpec grid;
    // Zone labels for plots use empirical radii: plot_ball_scale * ||x0||
    // around x0 and -rho_n x0, plot_origin_scale * ||x0|| around 0. The
    // theorem radii with the 616/5500 proof constants exceed any plot scale
    // and are reported alongside.
    double plot_ball_scale = 0.3;
    double plot_origin_scale = 0.1;
    // epsilon_WDC for the theorem radii: estimated per layer over wdc_pairs
    // sampled pairs unless given explicitly (eps_wdc > 0).
    double eps_wdc = 0.0;
    std::size_t wdc_pairs = 200;
    std::uint64_t wdc_seed = 1;
};

struct LandscapeCell {
    double x1 = 0.0, x2 = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
    bool descent_ok = false;  // directional derivative along -v_x is negative
    Zone zone = Zone::outside;
};

struct LandscapeReport {
    std::vector<LandscapeCell> cells;  // row-major over (x1 index, x2 index)
    std::size_t resolution = 0;
    std::string mode;  // "surrogate" or "empirical(m=...)"
    Vec x0;
    double rho = 0.0;
    double eps_wdc = 0.0;
    Radii theorem_radii;
    Radii plot_radii;
    GridSpec grid;
};

// Loss / gradient-norm / descent sweep over a 2-D grid (k must be 2), in
// measurement-free surrogate mode or against a MeasurementSet.
LandscapeReport landscape_grid(const ReluNetwork& net, const Vec& x0, const LandscapeOptions& opts);
LandscapeReport landscape_grid(const ReluNetwork& net, const Vec& x0, const LandscapeOptions& opts,
                               const MeasurementSet& ms);

}  // namespace onebit
