#include "onebit/sensing.hpp"

#include <cmath>

#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

namespace onebit {

SensingDist parse_sensing_dist(const std::string& name) {
    if (name == "gaussian") return SensingDist::gaussian;
    if (name == "rademacher") return SensingDist::rademacher;
    if (name == "laplace") return SensingDist::laplace;
    throw config_error("unknown sensing distribution: " + name);
}

std::string sensing_dist_name(SensingDist dist) {
    switch (dist) {
        case SensingDist::gaussian: return "gaussian";
        case SensingDist::rademacher: return "rademacher";
        case SensingDist::laplace: return "laplace";
    }
    return "unknown";
}

void MeasurementSet::rebuild_cache() {
    dither_scaled_mean.assign(d(), 0.0);
    for (std::size_t i = 0; i < m(); ++i) {
        const double* row = a.row(i);
        const double yi = static_cast<double>(y[i]);
        for (std::size_t j = 0; j < d(); ++j) dither_scaled_mean[j] += yi * row[j];
    }
    const double scale = lambda / static_cast<double>(m());
    for (double& v : dither_scaled_mean) v *= scale;
}

void MeasurementSet::validate() const {
    if (m() == 0) throw config_error("MeasurementSet: m must be >= 1");
    if (lambda <= 0.0) throw config_error("MeasurementSet: lambda must be positive");
    if (xi.size() != m() || tau.size() != m() || y.size() != m())
        throw config_error("MeasurementSet: per-measurement field length mismatch");
    for (std::size_t i = 0; i < m(); ++i) {
        if (std::abs(tau[i]) > lambda) throw config_error("MeasurementSet: dither outside [-lambda, lambda]");
        if (y[i] != 1 && y[i] != -1) throw config_error("MeasurementSet: labels must be +-1");
    }
}

Mat sample_sensing(SensingDist dist, std::size_t m, std::size_t d, std::uint64_t seed) {
    if (m == 0 || d == 0) throw config_error("sample_sensing: m and d must be >= 1");
    Mat a(m, d);
    const double laplace_scale = 1.0 / std::sqrt(2.0);  // unit variance
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng(derive_seed(seed, "row", i));
        double* row = a.row(i);
        switch (dist) {
            case SensingDist::gaussian:
                for (std::size_t j = 0; j < d; ++j) row[j] = rng.gaussian();
                break;
            case SensingDist::rademacher:
                for (std::size_t j = 0; j < d; ++j) row[j] = rng.rademacher();
                break;
            case SensingDist::laplace:
                for (std::size_t j = 0; j < d; ++j) row[j] = rng.laplace(laplace_scale);
                break;
        }
    }
    return a;
}

MeasurementSet quantize(Mat a, const Vec& theta0, const NoiseSpec& noise, double lambda,
                        std::uint64_t seed, const QuantizeOptions& opts) {
    if (lambda <= 0.0) throw config_error("quantize: lambda must be positive");
    if (theta0.size() != a.cols) throw config_error("quantize: theta0 dimension mismatch");
    for (double v : theta0) {
        if (!std::isfinite(v)) throw config_error("quantize: theta0 must be finite");
    }

    MeasurementSet ms;
    ms.lambda = lambda;
    ms.seed = seed;
    ms.dist = opts.dist_label;

    const std::size_t m = a.rows;
    ms.xi.resize(m);
    ms.tau.resize(m);
    ms.y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng(derive_seed(seed, "q", i));
        double xi = 0.0;
        switch (noise.kind) {
            case NoiseKind::none: break;
            case NoiseKind::gaussian: xi = noise.param * rng.gaussian(); break;
            case NoiseKind::laplace: xi = rng.laplace(noise.param); break;
        }
        const double tau = opts.dither_disabled ? 0.0 : rng.uniform(-lambda, lambda);
        const double* row = a.row(i);
        double v = xi + tau;
        for (std::size_t j = 0; j < theta0.size(); ++j) v += row[j] * theta0[j];
        ms.xi[i] = xi;
        ms.tau[i] = tau;
        ms.y[i] = static_cast<std::int8_t>(sign_pm1(v));
    }
    ms.a = std::move(a);
    ms.rebuild_cache();
    return ms;
}

double expected_sign(double V, double lambda) {
    if (lambda <= 0.0) throw config_error("expected_sign: lambda must be positive");
    if (V > lambda) return 1.0;
    if (V < -lambda) return -1.0;
    return V / lambda;
}

double sign_difference_fraction(const MeasurementSet& ms, const Vec& theta1, const Vec& theta2) {
    if (theta1.size() != ms.d() || theta2.size() != ms.d())
        throw config_error("sign_difference_fraction: dimension mismatch");
    std::size_t diff = 0;
    for (std::size_t i = 0; i < ms.m(); ++i) {
        const double* row = ms.a.row(i);
        double v1 = ms.xi[i] + ms.tau[i];
        double v2 = v1;
        for (std::size_t j = 0; j < ms.d(); ++j) {
            v1 += row[j] * theta1[j];
            v2 += row[j] * theta2[j];
        }
        if (sign_pm1(v1) != sign_pm1(v2)) ++diff;
    }
    return static_cast<double>(diff) / static_cast<double>(ms.m());
}

}  // namespace onebit
