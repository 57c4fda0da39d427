#include "onebit/erm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

namespace onebit {

double target_loss(const ReluNetwork& net, const Vec& target, const Vec& x) {
    const Vec g = forward(net, x);
    return dot(g, g) - 2.0 * dot(target, g);
}

Vec target_subgradient(const ReluNetwork& net, const Vec& target, const Vec& x) {
    const Masks masks = active_masks(net, x);
    Vec r = masked_apply(net, masks, x);  // G(x)
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= target[j];
    Vec g = masked_apply_transpose(net, masks, r);
    for (double& v : g) v *= 2.0;
    return g;
}

double target_directional_derivative(const ReluNetwork& net, const Vec& target, const Vec& x,
                                     const Vec& w) {
    const double wn = norm2(w);
    if (wn == 0.0) throw config_error("directional_derivative: direction must be nonzero");
    Vec w_hat = scaled(w, 1.0 / wn);

    const double t0 = 1e-9 * std::max(1.0, norm2(x));
    Vec probe = x;
    add_scaled(probe, w_hat, t0);
    const Masks masks = active_masks(net, probe);

    // Gradient formula evaluated at x itself, with the probe's masks.
    Vec r = masked_apply(net, masks, x);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] -= target[j];
    Vec g = masked_apply_transpose(net, masks, r);
    return 2.0 * dot(g, w_hat);
}

double loss(const ReluNetwork& net, const MeasurementSet& ms, const Vec& x) {
    if (ms.d() != net.output_dim()) throw config_error("loss: measurement dimension mismatch");
    return target_loss(net, ms.dither_scaled_mean, x);
}

Vec subgradient(const ReluNetwork& net, const MeasurementSet& ms, const Vec& x) {
    if (ms.d() != net.output_dim()) throw config_error("subgradient: measurement dimension mismatch");
    return target_subgradient(net, ms.dither_scaled_mean, x);
}

double directional_derivative(const ReluNetwork& net, const MeasurementSet& ms, const Vec& x,
                              const Vec& w) {
    if (ms.d() != net.output_dim())
        throw config_error("directional_derivative: measurement dimension mismatch");
    return target_directional_derivative(net, ms.dither_scaled_mean, x, w);
}

double surrogate_loss(const ReluNetwork& net, const Vec& x, const Vec& x0) {
    const Vec g0 = forward(net, x0);
    return target_loss(net, g0, x);
}

Vec finite_diff_gradient(const ReluNetwork& net, const MeasurementSet& ms, const Vec& x, double h) {
    if (h <= 0.0) throw config_error("finite_diff_gradient: h must be positive");
    Vec g(x.size());
    Vec xp = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double saved = xp[j];
        xp[j] = saved + h;
        const double lp = loss(net, ms, xp);
        xp[j] = saved - h;
        const double lm = loss(net, ms, xp);
        xp[j] = saved;
        g[j] = (lp - lm) / (2.0 * h);
    }
    return g;
}

namespace {

std::string trace_to_string(const std::vector<std::pair<int, double>>& trace) {
    std::string s;
    const std::size_t start = trace.size() > 10 ? trace.size() - 10 : 0;
    for (std::size_t i = start; i < trace.size(); ++i) {
        s += " (" + std::to_string(trace[i].first) + ", " + std::to_string(trace[i].second) + ")";
    }
    return s;
}

}  // namespace

RecoveryResult recover(const ReluNetwork& net, const MeasurementSet& ms, const SolverOptions& opts,
                       const std::optional<Vec>& x0) {
    if (opts.step <= 0.0) throw config_error("recover: step must be positive");
    if (opts.max_iters < 1) throw config_error("recover: max_iters must be >= 1");
    const std::size_t k = net.input_dim();

    RecoveryResult res;
    res.config_echo = opts;

    Vec x;
    if (opts.init) {
        if (opts.init->size() != k) throw config_error("recover: init dimension mismatch");
        x = *opts.init;
    } else {
        Rng rng(derive_seed(opts.seed, "init"));
        x.resize(k);
        double n = 0.0;
        do {
            for (auto& v : x) v = rng.gaussian();
            n = norm2(x);
        } while (n == 0.0);
        for (auto& v : x) v *= opts.init_radius / n;
    }

    double cur = loss(net, ms, x);
    if (!std::isfinite(cur)) throw numerical_error("recover: non-finite initial loss");
    res.loss_trace.emplace_back(0, cur);

    constexpr double kArmijo = 1e-4;
    constexpr double kBacktrack = 0.5;
    constexpr int kMaxBacktracks = 60;

    auto try_negation = [&](int it) -> bool {
        Vec xneg = scaled(x, -1.0);
        const double lneg = loss(net, ms, xneg);
        if (!std::isfinite(lneg))
            throw numerical_error("recover: non-finite loss at negation; trace:" + trace_to_string(res.loss_trace));
        if (lneg < cur) {
            x = std::move(xneg);
            cur = lneg;
            ++res.restarts;
            res.loss_trace.emplace_back(it, cur);
            return true;
        }
        return false;
    };

    // Armijo backtracking along -g; commits the step when sufficient decrease
    // is reached.
    auto line_search = [&](const Vec& g, int it) -> bool {
        const double gnorm2 = dot(g, g);
        double eta = opts.step;
        Vec cand(k);
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            cand = x;
            add_scaled(cand, g, -eta);
            const double cand_loss = loss(net, ms, cand);
            if (!std::isfinite(cand_loss))
                throw numerical_error("recover: non-finite loss during line search; trace:" +
                                      trace_to_string(res.loss_trace));
            if (cand_loss <= cur - kArmijo * eta * gnorm2) {
                x = std::move(cand);
                cur = cand_loss;
                res.loss_trace.emplace_back(it, cur);
                return true;
            }
            eta *= kBacktrack;
        }
        return false;
    };

    // Kink escape. The iterate can creep into a mask boundary where the
    // active piece's gradient points across the kink and the Armijo search
    // stalls with the loss pinned; descent then runs along the kink, not
    // across it. A deterministic direction-set search covers that case: the
    // probe-mask gradient direction first (the same neighboring-piece
    // realization the directional derivative uses), then the coordinate
    // axes and a few seeded random units. Acceptance demands a decrease of
    // at least 1e-4 eta^2 and one resolvable against the loss-stall
    // tolerance, so a strict local minimum of the piecewise-quadratic risk
    // terminates the search instead of treadmilling.
    Rng escape_rng(derive_seed(opts.seed, "escape"));
    auto escape_step = [&](const Vec& u, int it) -> bool {
        double eta = opts.step;
        Vec cand(k);
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            cand = x;
            add_scaled(cand, u, eta);
            const double cand_loss = loss(net, ms, cand);
            if (!std::isfinite(cand_loss))
                throw numerical_error("recover: non-finite loss during escape; trace:" +
                                      trace_to_string(res.loss_trace));
            const double decrease = cur - cand_loss;
            if (decrease >= kArmijo * eta * eta &&
                decrease >= opts.tol_loss * std::max(1.0, std::abs(cur))) {
                x = std::move(cand);
                cur = cand_loss;
                res.loss_trace.emplace_back(it, cur);
                return true;
            }
            eta *= kBacktrack;
        }
        return false;
    };
    auto try_escape = [&](const Vec& v, double gnorm, int it) -> bool {
        std::vector<Vec> dirs;
        if (gnorm > 0.0) {
            // gradient seen from the pieces on the far side of the kink, at
            // two probe depths
            for (double t : {1e-6, 1e-3}) {
                Vec probe = x;
                add_scaled(probe, v, -t * std::max(1.0, norm2(x)) / gnorm);
                const Masks masks = active_masks(net, probe);
                Vec r = masked_apply(net, masks, x);
                for (std::size_t j = 0; j < r.size(); ++j) r[j] -= ms.dither_scaled_mean[j];
                Vec w = masked_apply_transpose(net, masks, r);
                const double wn = norm2(w);
                if (wn > 0.0) dirs.push_back(scaled(w, -1.0 / wn));
            }
        }
        for (std::size_t j = 0; j < k; ++j) {
            Vec e(k, 0.0);
            e[j] = 1.0;
            dirs.push_back(e);
            e[j] = -1.0;
            dirs.push_back(e);
        }
        for (int j = 0; j < 10; ++j) {
            Vec u(k);
            double n = 0.0;
            do {
                for (auto& e : u) e = escape_rng.gaussian();
                n = norm2(u);
            } while (n == 0.0);
            dirs.push_back(scaled(u, 1.0 / n));
        }
        for (const Vec& u : dirs) {
            if (escape_step(u, it)) return true;
        }
        return false;
    };

    bool converged = false;
    int it = 1;
    for (; it <= opts.max_iters; ++it) {
        Vec v = subgradient(net, ms, x);
        const double gnorm = norm2(v);
        if (gnorm <= opts.tol_grad) {
            if (try_escape(v, gnorm, it)) continue;
            if (try_negation(it)) continue;
            converged = true;
            break;
        }

        if (opts.negation_period > 0 && it % opts.negation_period == 0 && try_negation(it)) continue;

        if (!line_search(v, it)) {
            if (try_escape(v, gnorm, it)) continue;
            if (try_negation(it)) continue;
            converged = gnorm <= opts.tol_grad;
            break;
        }

        const int window = std::max(1, opts.tol_loss_window);
        if (static_cast<int>(res.loss_trace.size()) > window) {
            const double before = res.loss_trace[res.loss_trace.size() - 1 - window].second;
            if (before - cur <= opts.tol_loss * std::max(1.0, std::abs(cur))) {
                if (try_escape(v, gnorm, it)) continue;
                if (try_negation(it)) continue;
                converged = true;
                break;
            }
        }
    }

    res.iterations = std::min(it, opts.max_iters);
    res.converged = converged;
    res.x_hat = std::move(x);
    res.g_x_hat = forward(net, res.x_hat);
    if (x0) {
        const Vec g0 = forward(net, *x0);
        const double denom = std::max(norm2(g0), 1e-15);
        res.relative_error = norm2(vsub(res.g_x_hat, g0)) / denom;
    }
    return res;
}

}  // namespace onebit
