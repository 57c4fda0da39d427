#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onebit/linalg.hpp"

namespace onebit {

enum class SensingDist { gaussian, rademacher, laplace };

SensingDist parse_sensing_dist(const std::string& name);  // throws config_error
std::string sensing_dist_name(SensingDist dist);

enum class NoiseKind { none, gaussian, laplace };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    double param = 0.0;  // sigma for gaussian, scale for laplace
};

// Per-measurement record of the dithered one-bit channel
//   y_i = sign(<a_i, theta_0> + xi_i + tau_i),  tau_i ~ Unif[-lambda, lambda],
// with sign(0) := +1. Keeping (a_i, xi_i, tau_i) lets two candidate points be
// quantized against the same randomness.
struct MeasurementSet {
    Mat a;                       // m x d sensing vectors, one per row
    Vec xi;                      // pre-quantization noise draws
    Vec tau;                     // dither draws
    std::vector<std::int8_t> y;  // quantized labels, -1 / +1
    double lambda = 0.0;
    std::string dist = "unknown";
    std::uint64_t seed = 0;

    // (lambda/m) sum_i y_i a_i, the d-vector through which the empirical risk
    // and its gradient see the data. Filled at construction / deserialization.
    Vec dither_scaled_mean;

    std::size_t m() const { return a.rows; }
    std::size_t d() const { return a.cols; }

    void rebuild_cache();
    void validate() const;  // throws config_error
};

inline double sign_pm1(double v) { return v >= 0.0 ? 1.0 : -1.0; }

// Rows i.i.d. mean-zero isotropic: standard normal entries, +-1 entries, or
// Laplace entries with scale 1/sqrt(2) (unit variance). Row i is generated
// from derive_seed(seed, "row", i), so generation order does not matter.
Mat sample_sensing(SensingDist dist, std::size_t m, std::size_t d, std::uint64_t seed);

struct QuantizeOptions {
    // Test-only: force tau_i = 0 to reproduce the no-dither counterexample
    // where Rademacher measurements cannot separate two distinct points.
    bool dither_disabled = false;
    std::string dist_label = "unknown";
};

MeasurementSet quantize(Mat a, const Vec& theta0, const NoiseSpec& noise, double lambda,
                        std::uint64_t seed, const QuantizeOptions& opts = {});

// E_tau[sign(V + tau)] for tau ~ Unif[-lambda, lambda]:
// V/lambda inside the band, saturating to +-1 outside.
double expected_sign(double V, double lambda);

// Fraction of measurements whose quantized sign differs between theta1 and
// theta2 under the stored (a_i, xi_i, tau_i) triples.
double sign_difference_fraction(const MeasurementSet& ms, const Vec& theta1, const Vec& theta2);

}  // namespace onebit
