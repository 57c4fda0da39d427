#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "onebit/generator.hpp"
#include "onebit/sensing.hpp"

namespace onebit {

// The empirical risk L(x) = ||G(x)||^2 - (2 lambda / m) sum_i y_i <a_i, G(x)>
// only sees the data through t = (lambda/m) sum_i y_i a_i, so the loss,
// gradient and directional-derivative machinery is written against an
// arbitrary fixed target vector t:
//   L_t(x)      = ||G(x)||^2 - 2 <t, G(x)>
//   grad L_t(x) = 2 H_x^T (G(x) - t)        (masked local linear map H_x)
// The measurement-free surrogate landscape is the same machinery with
// t = G(x0).
double target_loss(const ReluNetwork& net, const Vec& target, const Vec& x);
Vec target_subgradient(const ReluNetwork& net, const Vec& target, const Vec& x);
double target_directional_derivative(const ReluNetwork& net, const Vec& target, const Vec& x,
                                     const Vec& w);

double loss(const ReluNetwork& net, const MeasurementSet& ms, const Vec& x);

// v_x: equals grad L(x) wherever L is differentiable; at kinks it uses the
// masks of x itself under the strict "> 0" convention.
Vec subgradient(const ReluNetwork& net, const MeasurementSet& ms, const Vec& x);

// One-sided derivative along w/||w||, realized through the masks of the probe
// point x + t0 w_hat with t0 = 1e-9 max(1, ||x||).
double directional_derivative(const ReluNetwork& net, const MeasurementSet& ms, const Vec& x,
                              const Vec& w);

// Infinite-sample proxy ||G(x)||^2 - 2 <G(x0), G(x)>; deterministic and
// measurement-free.
double surrogate_loss(const ReluNetwork& net, const Vec& x, const Vec& x0);

// Central differences of the empirical risk, the oracle for subgradient.
Vec finite_diff_gradient(const ReluNetwork& net, const MeasurementSet& ms, const Vec& x, double h);

struct SolverOptions {
    double step = 0.1;          // initial line-search step
    int max_iters = 2000;
    double tol_grad = 1e-8;     // stop when ||v_x|| falls below
    double tol_loss = 1e-12;    // relative loss change over tol_loss_window iters
    int tol_loss_window = 10;
    int negation_period = 50;   // try the mirrored iterate every this many iters
    double init_radius = 0.1;   // radius of the random starting point
    std::uint64_t seed = 0;
    std::optional<Vec> init;    // explicit start overrides the random one
};

struct RecoveryResult {
    Vec x_hat;
    Vec g_x_hat;
    std::vector<std::pair<int, double>> loss_trace;  // (iteration, accepted loss)
    int restarts = 0;                                // negation jumps taken
    std::optional<double> relative_error;            // only when x0 was supplied
    bool converged = false;
    int iterations = 0;
    SolverOptions config_echo;
};

// Subgradient descent with Armijo backtracking (halving, sufficient decrease
// 1e-4) plus negation restarts: every negation_period iterations and at
// convergence, jump to -x when L(-x) is strictly smaller. Throws
// numerical_error (with the trace rendered into the message) if the loss goes
// non-finite.
RecoveryResult recover(const ReluNetwork& net, const MeasurementSet& ms, const SolverOptions& opts,
                       const std::optional<Vec>& x0 = std::nullopt);

}  // namespace onebit
