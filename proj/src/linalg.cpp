#include "onebit/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "onebit/errors.hpp"

namespace onebit {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) {
    return std::sqrt(dot(a, a));
}

Vec matvec(const Mat& a, const Vec& x) {
    Vec y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vec matvec_t(const Mat& a, const Vec& v) {
    Vec y(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* r = a.row(i);
        const double vi = v[i];
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < a.cols; ++j) y[j] += r[j] * vi;
    }
    return y;
}

Mat matmul(const Mat& a, const Mat& b) {
    Mat c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ra = a.row(i);
        double* rc = c.row(i);
        for (std::size_t l = 0; l < a.cols; ++l) {
            const double v = ra[l];
            if (v == 0.0) continue;
            const double* rb = b.row(l);
            for (std::size_t j = 0; j < b.cols; ++j) rc[j] += v * rb[j];
        }
    }
    return c;
}

Mat transpose(const Mat& a) {
    Mat t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

Vec scaled(const Vec& a, double c) {
    Vec y(a);
    for (auto& v : y) v *= c;
    return y;
}

Vec vsub(const Vec& a, const Vec& b) {
    Vec y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] - b[i];
    return y;
}

Vec vadd(const Vec& a, const Vec& b) {
    Vec y(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
    return y;
}

void add_scaled(Vec& y, const Vec& x, double c) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

double spectral_norm_sym(const Mat& a, double tol, int max_sweeps) {
    if (a.rows == 0 || a.cols == 0) return 0.0;
    if (a.rows != a.cols) throw config_error("spectral_norm_sym: matrix must be square");
    const std::size_t p = a.rows;
    Mat w = a;
    double frob = 0.0;
    for (double v : w.data) frob += v * v;
    frob = std::sqrt(frob);
    if (frob == 0.0) return 0.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) off += w(i, j) * w(i, j);
        if (std::sqrt(2.0 * off) <= tol * frob) {
            double lam = 0.0;
            for (std::size_t i = 0; i < p; ++i) lam = std::max(lam, std::abs(w(i, i)));
            return lam;
        }
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                const double apq = w(i, j);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (w(j, j) - w(i, i)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t l = 0; l < p; ++l) {
                    const double wil = w(i, l);
                    const double wjl = w(j, l);
                    w(i, l) = c * wil - s * wjl;
                    w(j, l) = s * wil + c * wjl;
                }
                for (std::size_t l = 0; l < p; ++l) {
                    const double wli = w(l, i);
                    const double wlj = w(l, j);
                    w(l, i) = c * wli - s * wlj;
                    w(l, j) = s * wli + c * wlj;
                }
            }
        }
    }
    throw numerical_error("spectral_norm_sym: Jacobi sweeps did not converge");
}

}  // namespace onebit
