#pragma once

#include <cstddef>
#include <vector>

namespace onebit {

using Vec = std::vector<double>;

// Dense row-major matrix. The networks and measurement sets here are small
// and dense, so no sparsity or expression machinery.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
};

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);

Vec matvec(const Mat& a, const Vec& x);    // A x
Vec matvec_t(const Mat& a, const Vec& v);  // A^T v
Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);

Vec scaled(const Vec& a, double c);
Vec vsub(const Vec& a, const Vec& b);
Vec vadd(const Vec& a, const Vec& b);
void add_scaled(Vec& y, const Vec& x, double c);  // y += c*x

// Spectral norm (largest |eigenvalue|) of a symmetric matrix by cyclic
// Jacobi sweeps; deterministic, and indifferent to degenerate spectra.
// Throws numerical_error if the off-diagonal mass has not collapsed after
// max_sweeps.
double spectral_norm_sym(const Mat& a, double tol = 1e-12, int max_sweeps = 64);

}  // namespace onebit
