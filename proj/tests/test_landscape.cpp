#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "onebit/erm.hpp"
#include "onebit/errors.hpp"
#include "onebit/landscape.hpp"
#include "onebit/rng.hpp"

using namespace onebit;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Vec unit_random(Rng& rng, std::size_t p) {
    Vec v(p);
    double n = 0.0;
    do {
        for (auto& e : v) e = rng.gaussian();
        n = norm2(v);
    } while (n == 0.0);
    for (auto& e : v) e /= n;
    return v;
}

Mat masked_gram(const Mat& w, const Vec& x, const Vec& z) {
    Mat gram(w.cols, w.cols);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* row = w.row(i);
        double px = 0.0, pz = 0.0;
        for (std::size_t j = 0; j < w.cols; ++j) {
            px += row[j] * x[j];
            pz += row[j] * z[j];
        }
        if (px > 0.0 && pz > 0.0) {
            for (std::size_t a = 0; a < w.cols; ++a)
                for (std::size_t b = 0; b < w.cols; ++b) gram(a, b) += row[a] * row[b];
        }
    }
    return gram;
}

}  // namespace

TEST_CASE("m_matrix closed forms") {
    SUBCASE("coincident unit vectors") {
        const Vec e1 = {1.0, 0.0, 0.0};
        const Mat m = m_matrix(e1, e1);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(m(i, j) == doctest::Approx(i == 0 && j == 0 ? 1.0 : 0.0).epsilon(1e-14));
    }
    SUBCASE("antipodal unit vectors") {
        const Vec e1 = {1.0, 0.0, 0.0};
        const Vec ne1 = {-1.0, 0.0, 0.0};
        const Mat m = m_matrix(e1, ne1);
        CHECK(m(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    }
    SUBCASE("perpendicular pair in the plane swaps the axes") {
        const Mat m = m_matrix({1.0, 0.0}, {0.0, 1.0});
        CHECK(m(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(m(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(m(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(m(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("swap, symmetry and annihilation in general position") {
        Rng rng(5);
        for (int t = 0; t < 50; ++t) {
            const Vec x = unit_random(rng, 4);
            const Vec z = unit_random(rng, 4);
            const Mat m = m_matrix(x, z);
            const Vec mx = matvec(m, x);
            const Vec mz = matvec(m, z);
            for (std::size_t j = 0; j < 4; ++j) {
                CHECK(mx[j] == doctest::Approx(z[j]).epsilon(1e-10));
                CHECK(mz[j] == doctest::Approx(x[j]).epsilon(1e-10));
                for (std::size_t i = 0; i < 4; ++i) CHECK(m(i, j) == doctest::Approx(m(j, i)));
            }
            // component orthogonal to span{x, z} maps to zero
            Vec w = unit_random(rng, 4);
            const double cx = dot(w, x);
            Vec zp = z;
            add_scaled(zp, x, -dot(z, x));
            const double zpn = norm2(zp);
            if (zpn > 1e-8) {
                for (auto& e : zp) e /= zpn;
                add_scaled(w, x, -cx);
                add_scaled(w, zp, -dot(w, zp));
                const Vec mw = matvec(m, w);
                for (double v : mw) CHECK(std::abs(v) <= 1e-9);
            }
        }
    }
    SUBCASE("non-unit inputs are rejected") {
        CHECK_THROWS_AS(m_matrix({2.0, 0.0}, {1.0, 0.0}), config_error);
    }
}

TEST_CASE("q_matrix closed forms") {
    SUBCASE("coincident directions give half the identity") {
        const Vec x = {3.0, 4.0};
        const Mat q = q_matrix(x, x);
        CHECK(q(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(q(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(q(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("antipodal directions vanish") {
        const Vec x = {1.0, -2.0, 0.5};
        const Mat q = q_matrix(x, scaled(x, -3.0));
        for (double v : q.data) CHECK(std::abs(v) <= 1e-14);
    }
    SUBCASE("orthogonal axes in the plane") {
        const Mat q = q_matrix({1.0, 0.0}, {0.0, 1.0});
        CHECK(q(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(q(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(q(0, 1) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
        CHECK(q(1, 0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
    }
    SUBCASE("zero vectors are rejected") {
        CHECK_THROWS_AS(q_matrix({0.0, 0.0}, {1.0, 0.0}), config_error);
    }
}

TEST_CASE("wdc_deviation") {
    SUBCASE("zero matrix against itself measures half the identity") {
        const Mat w(6, 3);
        const Vec x = {1.0, 2.0, -0.5};
        CHECK(wdc_deviation(w, x, x) == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("wide gaussian layers sit close to Q") {
        const auto net = new_random_gaussian({10, 2000}, WeightScaleRule::variance_one_over_fanout, 71);
        Rng rng(72);
        const Vec x = unit_random(rng, 10);
        CHECK(wdc_deviation(net.weights[0], x, x) <= 0.15);
    }

    SUBCASE("zero anchors are rejected") {
        const Mat w(6, 3);
        CHECK_THROWS_AS(wdc_deviation(w, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}), config_error);
    }

    SUBCASE("swap symmetry") {
        const auto net = new_random_gaussian({6, 300}, WeightScaleRule::variance_one_over_fanout, 73);
        Rng rng(74);
        for (int t = 0; t < 10; ++t) {
            const Vec x = unit_random(rng, 6);
            const Vec z = unit_random(rng, 6);
            CHECK(wdc_deviation(net.weights[0], x, z) ==
                  doctest::Approx(wdc_deviation(net.weights[0], z, x)).epsilon(1e-10));
        }
    }

    SUBCASE("gradient-decomposition consistency") {
        const auto net = new_random_gaussian({10, 2000}, WeightScaleRule::variance_one_over_fanout, 75);
        const Mat& w = net.weights[0];
        Rng rng(76);
        for (int t = 0; t < 10; ++t) {
            const Vec x = unit_random(rng, 10);
            const Vec z = unit_random(rng, 10);
            const double dev = wdc_deviation(w, x, z);
            const Mat gram = masked_gram(w, x, z);
            const Mat q = q_matrix(x, z);
            Vec gx = matvec(gram, x);
            const Vec qx = matvec(q, x);
            for (std::size_t j = 0; j < gx.size(); ++j) gx[j] -= qx[j];
            CHECK(norm2(gx) <= dev * norm2(x) + 1e-12);
        }
    }
}

TEST_CASE("estimate_wdc") {
    SUBCASE("expansive gaussian layer certifies a small epsilon") {
        const auto net = new_random_gaussian({5, 1000}, WeightScaleRule::variance_one_over_fanout, 81);
        const WdcReport report = estimate_wdc(net.weights[0], 500, 82);
        CHECK(report.epsilon_hat < 0.3);
        CHECK(report.pair_count >= 500);
        CHECK(report.worst_pair.deviation == report.epsilon_hat);
        for (const auto& [q, v] : report.deviation_quantiles) CHECK(v <= report.epsilon_hat);
    }

    SUBCASE("a non-expansive layer is visibly worse") {
        const auto wide = new_random_gaussian({5, 1000}, WeightScaleRule::variance_one_over_fanout, 83);
        const auto narrow = new_random_gaussian({10, 20}, WeightScaleRule::variance_one_over_fanout, 84);
        const double eps_wide = estimate_wdc(wide.weights[0], 300, 85).epsilon_hat;
        const double eps_narrow = estimate_wdc(narrow.weights[0], 300, 85).epsilon_hat;
        CHECK(eps_narrow > eps_wide);
    }

    SUBCASE("identical seeds reproduce the report") {
        const auto net = new_random_gaussian({4, 100}, WeightScaleRule::variance_one_over_fanout, 86);
        const WdcReport r1 = estimate_wdc(net.weights[0], 50, 87);
        const WdcReport r2 = estimate_wdc(net.weights[0], 50, 87);
        CHECK(r1.epsilon_hat == r2.epsilon_hat);
        CHECK(r1.worst_pair.x == r2.worst_pair.x);
        CHECK(r1.deviation_quantiles == r2.deviation_quantiles);
    }
}

TEST_CASE("angle recursion") {
    CHECK(g_angle(0.0) == 0.0);
    CHECK(g_angle(kPi) == doctest::Approx(kPi / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(g_angle(-0.1), config_error);
    CHECK_THROWS_AS(g_angle(3.2), config_error);

    SUBCASE("monotone increasing on [0, pi]") {
        Rng rng(91);
        for (int t = 0; t < 100; ++t) {
            double a = rng.uniform(0.0, kPi);
            double b = rng.uniform(0.0, kPi);
            if (a > b) std::swap(a, b);
            if (b - a < 1e-9) continue;
            CHECK(g_angle(a) < g_angle(b));
        }
    }

    SUBCASE("rho-check sequence") {
        CHECK(rho_check_sequence(1) == std::vector<double>{kPi});
        const auto two = rho_check_sequence(2);
        CHECK(two[0] == kPi);
        CHECK(two[1] == doctest::Approx(kPi / 2.0).epsilon(1e-12));
        const auto thirty = rho_check_sequence(30);
        for (std::size_t i = 1; i < thirty.size(); ++i) CHECK(thirty[i] < thirty[i - 1]);
        CHECK(thirty.back() < 0.35);
        CHECK(thirty.back() > 0.0);
    }

    SUBCASE("rho_n values and monotonicity") {
        CHECK(rho_n(1) == 0.0);
        CHECK(rho_n(2) == doctest::Approx(1.0 / kPi).epsilon(1e-13));
        double prev = 0.0;
        for (int n = 1; n <= 50; ++n) {
            const double r = rho_n(n);
            CHECK(r >= prev);
            CHECK(r <= 1.0);
            prev = r;
        }
        CHECK(rho_n(50) > rho_n(2));  // the spurious point drifts toward -x0
    }
}

TEST_CASE("h_vector closed forms") {
    const Vec x0 = {1.5, -0.5, 2.0};

    SUBCASE("coincident input vanishes") {
        const Vec h = h_vector(x0, x0, 3);
        CHECK(norm2(h) <= 1e-14);
    }

    SUBCASE("antipodal input at n = 2") {
        const Vec h = h_vector(scaled(x0, -1.0), x0, 2);
        const double rho2 = 1.0 / kPi;
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(h[j] == doctest::Approx((rho2 - 1.0) / 4.0 * x0[j]).epsilon(1e-12));
        }
        CHECK(norm2(h) == doctest::Approx((1.0 - 1.0 / kPi) / 4.0 * norm2(x0)).epsilon(1e-12));
    }

    SUBCASE("collinear positive multiple collapses the bracket") {
        for (int n : {1, 2, 4}) {
            const Vec h = h_vector(scaled(x0, 2.0), x0, n);
            const double coef = std::ldexp(1.0, -n);
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(h[j] == doctest::Approx(coef * x0[j]).epsilon(1e-12));
        }
    }

    SUBCASE("zero inputs are rejected") {
        CHECK_THROWS_AS(h_vector({0.0, 0.0, 0.0}, x0, 2), config_error);
        CHECK_THROWS_AS(h_vector(x0, {0.0, 0.0, 0.0}, 2), config_error);
    }

    SUBCASE("h vanishes at the spurious point") {
        const Vec spur = scaled(x0, -rho_n(2));
        const Vec h = h_vector(spur, x0, 2);
        CHECK(norm2(h) <= 1e-12 * norm2(x0));
    }
}

TEST_CASE("theorem radii") {
    const Radii r = radii(2, 1e-4, 1.0);
    CHECK(r.delta_check == doctest::Approx(0.02).epsilon(1e-13));

    const Radii r2 = radii(2, 1e-8, std::sqrt(2.0));
    CHECK(r2.delta_1 == doctest::Approx(616.0 * 8.0 * 1e-2 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r2.delta_2 == doctest::Approx(5500.0 * 16384.0 * 1e-2 * std::sqrt(2.0)).epsilon(1e-12));

    SUBCASE("radii shrink monotonically with epsilon") {
        double prev_check = 1e300, prev_1 = 1e300, prev_2 = 1e300;
        for (double eps : {1e-2, 1e-4, 1e-6, 1e-8}) {
            const Radii rr = radii(3, eps, 2.0);
            CHECK(rr.delta_check < prev_check);
            CHECK(rr.delta_1 < prev_1);
            CHECK(rr.delta_2 < prev_2);
            prev_check = rr.delta_check;
            prev_1 = rr.delta_1;
            prev_2 = rr.delta_2;
        }
    }

    SUBCASE("constants are overridable") {
        const Radii rc = radii(2, 1e-8, 1.0, 1.0, 1.0);
        CHECK(rc.delta_1 == doctest::Approx(8.0 * 1e-2).epsilon(1e-12));
    }

    CHECK_THROWS_AS(radii(2, 0.0, 1.0), config_error);

    SUBCASE("checkable epsilon conditions") {
        CHECK(wdc_condition_converge_set(2, 1e-8));
        CHECK_FALSE(wdc_condition_converge_set(2, 1e-2));
        CHECK(wdc_condition_theorem(2, 1e-20));
        CHECK_FALSE(wdc_condition_theorem(2, 1e-8));
    }
}

TEST_CASE("zone classification") {
    const Vec x0 = {10.0, 0.0};
    const Radii r = {0.5, 1.0, 1.0};
    const double rho = 0.3;

    CHECK(classify(x0, x0, r, rho) == Zone::near_x0);
    CHECK(classify(scaled(x0, -rho), x0, r, rho) == Zone::near_neg_rho_x0);
    CHECK(classify({0.0, 0.0}, x0, r, rho) == Zone::near_zero);
    CHECK(classify({5.0, 5.0}, x0, r, rho) == Zone::outside);

    SUBCASE("priority favors the x0 ball when balls overlap") {
        const Radii wide = {100.0, 100.0, 100.0};
        CHECK(classify({0.0, 0.0}, x0, wide, rho) == Zone::near_x0);
    }
}

TEST_CASE("landscape grid, surrogate mode") {
    // seed 3: a draw whose spurious basin is visible at this resolution
    const auto net = new_random_gaussian({2, 64, 1024}, WeightScaleRule::variance_one_over_fanout, 3);
    const Vec x0 = {1.0, 1.0};
    LandscapeOptions opts;
    const LandscapeReport report = landscape_grid(net, x0, opts);
    const std::size_t res = report.resolution;
    CHECK(res == 81);
    CHECK(report.cells.size() == res * res);
    CHECK(report.rho == doctest::Approx(1.0 / kPi).epsilon(1e-12));

    SUBCASE("global minimum cell sits on the true representation") {
        const auto best = std::min_element(
            report.cells.begin(), report.cells.end(),
            [](const LandscapeCell& a, const LandscapeCell& b) { return a.loss < b.loss; });
        CHECK(std::hypot(best->x1 - 1.0, best->x2 - 1.0) <= 0.15);
    }

    SUBCASE("a second strict local minimum sits near -rho_2 x0") {
        const double sx = -report.rho, sy = -report.rho;
        bool found = false;
        for (std::size_t i = 1; i + 1 < res && !found; ++i) {
            for (std::size_t j = 1; j + 1 < res && !found; ++j) {
                const auto& c = report.cells[i * res + j];
                if (std::hypot(c.x1 - sx, c.x2 - sy) > 0.3) continue;
                bool strict = true;
                for (int di = -1; di <= 1 && strict; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        if (report.cells[(i + di) * res + (j + dj)].loss <= c.loss) {
                            strict = false;
                            break;
                        }
                    }
                }
                if (strict) found = true;
            }
        }
        CHECK(found);
    }

    SUBCASE("loss gap between the two basins") {
        double min_x0 = 1e300, min_spur = 1e300;
        const double r = 0.1 * norm2(x0);
        for (const auto& c : report.cells) {
            if (std::hypot(c.x1 - x0[0], c.x2 - x0[1]) <= r) min_x0 = std::min(min_x0, c.loss);
            if (std::hypot(c.x1 + report.rho * x0[0], c.x2 + report.rho * x0[1]) <= r)
                min_spur = std::min(min_spur, c.loss);
        }
        CHECK(min_x0 < min_spur);
    }

    SUBCASE("zones partition the grid") {
        std::size_t outside = 0, near0 = 0, near_x0 = 0, near_spur = 0;
        for (const auto& c : report.cells) {
            switch (c.zone) {
                case Zone::outside: ++outside; break;
                case Zone::near_zero: ++near0; break;
                case Zone::near_x0: ++near_x0; break;
                case Zone::near_neg_rho_x0: ++near_spur; break;
            }
        }
        CHECK(outside + near0 + near_x0 + near_spur == res * res);
        CHECK(near_x0 > 0);
        CHECK(near_spur > 0);
        CHECK(outside > 0);
    }

    SUBCASE("descent direction exists at every outside cell away from the origin") {
        const double x0n = norm2(x0);
        for (const auto& c : report.cells) {
            const double nx = std::hypot(c.x1, c.x2);
            if (c.zone != Zone::outside || nx <= 0.3 * x0n) continue;
            CHECK(c.descent_ok);
        }
    }

    SUBCASE("small h-vector cells concentrate in the two basins") {
        const double eps = 0.05;
        const int n = 2;
        const double x0n = norm2(x0);
        for (const auto& c : report.cells) {
            const Vec x = {c.x1, c.x2};
            const double nx = norm2(x);
            if (nx == 0.0) continue;
            const Vec h = h_vector(x, x0, n);
            const double bound = std::ldexp(1.0, -n) * eps * std::max(nx, x0n);
            if (norm2(h) <= bound) {
                const bool near_x0 = std::hypot(c.x1 - x0[0], c.x2 - x0[1]) <= 0.3 * x0n;
                const bool near_spur =
                    std::hypot(c.x1 + report.rho * x0[0], c.x2 + report.rho * x0[1]) <= 0.3 * x0n;
                CHECK((near_x0 || near_spur));
            }
        }
    }

    SUBCASE("grid mode rejects other input dimensions") {
        const auto net3 = new_random_gaussian({3, 8, 16}, WeightScaleRule::variance_one_over_fanout, 9);
        CHECK_THROWS_AS(landscape_grid(net3, {1.0, 1.0, 1.0}, opts), config_error);
    }
}

// The per-cell gap between empirical and surrogate loss is 2 <t - G(x0), G(x)>
// with t = (lambda/m) sum y_i a_i, which concentrates at the lambda/sqrt(m)
// scale relative to ||G(x)||: at least 95% of cells must sit within four
// standard errors of that statistic and every cell within ten.
TEST_CASE("landscape grid, empirical mode approaches the surrogate") {
    const auto net = new_random_gaussian({2, 64, 1024}, WeightScaleRule::variance_one_over_fanout, 7);
    const Vec x0 = {1.0, 1.0};
    const Vec g0 = forward(net, x0);
    const double g0n = norm2(g0);
    const double lambda = 10.0;
    const std::size_t m = 100000;

    Mat a = sample_sensing(SensingDist::gaussian, m, 1024, 4001);
    const MeasurementSet ms = quantize(std::move(a), g0, NoiseSpec{NoiseKind::gaussian, 0.1}, lambda,
                                       4002, QuantizeOptions{false, "gaussian"});

    LandscapeOptions opts;
    opts.grid.resolution = 41;
    opts.eps_wdc = 1e-4;  // skip the sampled estimate; radii are not under test here
    const LandscapeReport emp = landscape_grid(net, x0, opts, ms);
    const LandscapeReport sur = landscape_grid(net, x0, opts);

    CHECK(emp.cells.size() == sur.cells.size());
    const double se = lambda / std::sqrt(static_cast<double>(m));
    std::size_t within_four = 0;
    for (std::size_t i = 0; i < emp.cells.size(); ++i) {
        CHECK(emp.cells[i].x1 == sur.cells[i].x1);
        CHECK(emp.cells[i].x2 == sur.cells[i].x2);
        const Vec x = {emp.cells[i].x1, emp.cells[i].x2};
        const double local = std::max(norm2(forward(net, x)), g0n);
        const double normalized = std::abs(emp.cells[i].loss - sur.cells[i].loss) / (2.0 * local);
        CHECK(normalized <= 10.0 * se);
        if (normalized <= 4.0 * se) ++within_four;
    }
    CHECK(static_cast<double>(within_four) >= 0.95 * static_cast<double>(emp.cells.size()));
}
