#include "onebit/generator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "onebit/errors.hpp"
#include "onebit/rng.hpp"

namespace onebit {

void ReluNetwork::validate() const {
    if (dims.size() < 2) throw config_error("ReluNetwork: need at least one layer");
    if (weights.size() != dims.size() - 1)
        throw config_error("ReluNetwork: weights/dims length mismatch");
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] == 0) throw config_error("ReluNetwork: zero layer width");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i].rows != dims[i + 1] || weights[i].cols != dims[i])
            throw config_error("ReluNetwork: weight shape does not match dims");
        for (double v : weights[i].data) {
            if (!std::isfinite(v)) throw config_error("ReluNetwork: non-finite weight");
        }
    }
}

ReluNetwork new_random_gaussian(const std::vector<std::size_t>& dims, WeightScaleRule rule,
                                std::uint64_t seed) {
    if (dims.size() < 2) throw config_error("new_random_gaussian: dims must list input and at least one layer");
    for (std::size_t w : dims) {
        if (w == 0) throw config_error("new_random_gaussian: zero layer width");
    }
    (void)rule;  // single rule today: variance 1/d_i with d_i the fan-out
    ReluNetwork net;
    net.dims = dims;
    net.label = "gaussian(seed=" + std::to_string(seed) + ")";
    net.weights.reserve(dims.size() - 1);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Mat w(dims[i + 1], dims[i]);
        const double sd = 1.0 / std::sqrt(static_cast<double>(dims[i + 1]));
        Rng rng(derive_seed(seed, "layer", i));
        for (auto& v : w.data) v = sd * rng.gaussian();
        net.weights.push_back(std::move(w));
    }
    return net;
}

Vec forward(const ReluNetwork& net, const Vec& x) {
    if (x.size() != net.input_dim()) throw config_error("forward: input dimension mismatch");
    Vec v = x;
    for (const Mat& w : net.weights) {
        Vec pre = matvec(w, v);
        for (auto& p : pre) p = p > 0.0 ? p : 0.0;
        v = std::move(pre);
    }
    return v;
}

Masks active_masks(const ReluNetwork& net, const Vec& x) {
    if (x.size() != net.input_dim()) throw config_error("active_masks: input dimension mismatch");
    Masks masks;
    masks.reserve(net.depth());
    Vec v = x;
    for (const Mat& w : net.weights) {
        Vec pre = matvec(w, v);
        std::vector<std::uint8_t> m(pre.size());
        for (std::size_t j = 0; j < pre.size(); ++j) {
            m[j] = pre[j] > 0.0 ? 1 : 0;
            if (!m[j]) pre[j] = 0.0;
        }
        masks.push_back(std::move(m));
        v = std::move(pre);
    }
    return masks;
}

Vec masked_apply(const ReluNetwork& net, const Masks& masks, const Vec& z) {
    if (z.size() != net.input_dim()) throw config_error("masked_apply: input dimension mismatch");
    Vec v = z;
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
        Vec pre = matvec(net.weights[i], v);
        const auto& m = masks[i];
        for (std::size_t j = 0; j < pre.size(); ++j) {
            if (!m[j]) pre[j] = 0.0;
        }
        v = std::move(pre);
    }
    return v;
}

Vec masked_apply_transpose(const ReluNetwork& net, const Masks& masks, const Vec& v) {
    if (v.size() != net.output_dim()) throw config_error("masked_apply_transpose: dimension mismatch");
    Vec u = v;
    for (std::size_t i = net.weights.size(); i-- > 0;) {
        const auto& m = masks[i];
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (!m[j]) u[j] = 0.0;
        }
        u = matvec_t(net.weights[i], u);
    }
    return u;
}

ActiveBranch active_branch(const ReluNetwork& net, const Vec& x) {
    ActiveBranch b;
    b.masks = active_masks(net, x);
    b.masked_weights.reserve(net.depth());
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
        Mat w = net.weights[i];
        for (std::size_t r = 0; r < w.rows; ++r) {
            if (!b.masks[i][r]) {
                std::fill(w.row(r), w.row(r) + w.cols, 0.0);
            }
        }
        b.masked_weights.push_back(std::move(w));
    }
    b.composite = b.masked_weights.front();
    for (std::size_t i = 1; i < b.masked_weights.size(); ++i) {
        b.composite = matmul(b.masked_weights[i], b.composite);
    }
    return b;
}

Vec branch_apply(const ActiveBranch& branch, const Vec& z) {
    if (z.size() != branch.masked_weights.front().cols)
        throw config_error("branch_apply: input dimension mismatch");
    Vec v = z;
    for (const Mat& w : branch.masked_weights) v = matvec(w, v);
    return v;
}

ReluNetwork group_sparse_network(std::size_t k, std::size_t d) {
    if (k == 0 || d == 0) throw config_error("group_sparse_network: k and d must be positive");
    if (d % k != 0) throw config_error("group_sparse_network: d must be divisible by k");
    const std::size_t q = d / k;  // slots per block

    ReluNetwork net;
    net.dims = {k + 1, k + 2 * q, 2 * d, d};
    net.label = "group_sparse(k=" + std::to_string(k) + ",d=" + std::to_string(d) + ")";

    // Layer 1: sigma(x_i) for i in [k], then sigma(r z) for r in [2d/k].
    Mat w1(k + 2 * q, k + 1);
    for (std::size_t i = 0; i < k; ++i) w1(i, i) = 1.0;
    for (std::size_t r = 1; r <= 2 * q; ++r) w1(k + r - 1, k) = static_cast<double>(r);

    // Layer 2: Upsilon at row i*q + (r-1), Upsilon' at row d + i*q + (r-1).
    Mat w2(2 * d, k + 2 * q);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t r = 1; r <= q; ++r) {
            const std::size_t row = i * q + (r - 1);
            w2(row, i) = 1.0;
            w2(row, k + r - 1) = -2.0;
            const std::size_t rowp = d + row;
            w2(rowp, i) = 1.0;
            w2(rowp, k + r - 1) = -2.0;
            w2(rowp, k) -= 1.0;  // minus sigma(1*z); merges with -2 sigma(z) when r = 1
        }
    }

    // Layer 3: Gamma = sigma(Upsilon - 2 Upsilon').
    Mat w3(d, 2 * d);
    for (std::size_t j = 0; j < d; ++j) {
        w3(j, j) = 1.0;
        w3(j, d + j) = -2.0;
    }

    net.weights = {std::move(w1), std::move(w2), std::move(w3)};
    return net;
}

Vec encode_group_sparse(const Vec& target, std::size_t k) {
    if (k == 0) throw config_error("encode_group_sparse: k must be positive");
    const std::size_t d = target.size();
    if (d == 0 || d % k != 0) throw config_error("encode_group_sparse: length must be a positive multiple of k");
    const std::size_t q = d / k;

    Vec x(k + 1, 0.0);
    x[k] = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t nonzero = q;  // sentinel: none found
        for (std::size_t j = 0; j < q; ++j) {
            const double v = target[i * q + j];
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw config_error("encode_group_sparse: entries must lie in [0,1]");
            if (v != 0.0) {
                if (nonzero != q) throw config_error("encode_group_sparse: more than one nonzero in a block");
                nonzero = j;
            }
        }
        if (nonzero != q) {
            const double v = target[i * q + nonzero];
            x[i] = 2.0 * static_cast<double>(nonzero + 1) + v;
        }
    }
    return x;
}

std::uint64_t count_pieces_bound(std::uint64_t d, std::uint64_t k) {
    std::uint64_t total = 0;
    const std::uint64_t top = std::min(d, k);
    for (std::uint64_t i = 0; i <= top; ++i) {
        // binom(d, i), multiplicative form with exactness preserved by
        // dividing at each step
        unsigned __int128 c = 1;
        for (std::uint64_t j = 1; j <= i; ++j) {
            c = c * (d - i + j) / j;
            if (c > static_cast<unsigned __int128>(UINT64_MAX))
                throw config_error("count_pieces_bound: overflow");
        }
        const std::uint64_t term = static_cast<std::uint64_t>(c);
        if (total > UINT64_MAX - term) throw config_error("count_pieces_bound: overflow");
        total += term;
    }
    return total;
}

namespace {

// Sign pattern of a probe point, packed into bits; returns false when the
// point sits too close to some hyperplane to classify.
bool sign_pattern(const std::vector<Vec>& normals, const Vec& offsets, const Vec& p,
                  std::uint32_t& pattern) {
    pattern = 0;
    for (std::size_t i = 0; i < normals.size(); ++i) {
        double s = offsets[i];
        for (std::size_t j = 0; j < p.size(); ++j) s += normals[i][j] * p[j];
        const double scale = 1.0 + std::abs(offsets[i]);
        if (std::abs(s) <= 1e-9 * scale) return false;
        if (s > 0.0) pattern |= (1u << i);
    }
    return true;
}

}  // namespace

std::uint64_t brute_force_region_count(const std::vector<Vec>& hyperplane_normals, const Vec& offsets_in) {
    const std::size_t n = hyperplane_normals.size();
    if (n == 0) return 1;
    const std::size_t k = hyperplane_normals[0].size();
    if (k == 0 || k > 3 || n > 12)
        throw config_error("brute_force_region_count: oracle handles k <= 3 and at most 12 hyperplanes");
    for (const Vec& nv : hyperplane_normals) {
        if (nv.size() != k) throw config_error("brute_force_region_count: inconsistent normal dimensions");
        if (norm2(nv) == 0.0) throw config_error("brute_force_region_count: zero normal");
    }
    Vec offsets = offsets_in;
    if (offsets.empty()) offsets.assign(n, 0.0);
    if (offsets.size() != n) throw config_error("brute_force_region_count: offsets length mismatch");

    double extent = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        extent = std::max(extent, std::abs(offsets[i]) / norm2(hyperplane_normals[i]));
    }
    const double box = 4.0 * extent;

    std::unordered_set<std::uint32_t> patterns;
    std::uint32_t pat = 0;

    // Monte-Carlo pass over the bounding box.
    Rng rng(0x0b17c0de);
    Vec p(k);
    for (int s = 0; s < 1000000; ++s) {
        for (std::size_t j = 0; j < k; ++j) p[j] = rng.uniform(-box, box);
        if (sign_pattern(hyperplane_normals, offsets, p, pat)) patterns.insert(pat);
    }

    // Deterministic pass: points on each intersection of up to k hyperplanes,
    // nudged into the adjacent cells. Catches thin cells the sampling misses.
    // Perturbations use the dual directions d_i with <d_i, n_j> = delta_ij so
    // every sign combination around the intersection is realized exactly,
    // plus slides along the intersection itself.
    auto probe_around = [&](const Vec& base, const std::vector<std::size_t>& idx,
                            const std::vector<Vec>& duals, const std::vector<Vec>& tangents) {
        static const double eps[] = {1e-7, 1e-4, 1e-2};
        std::vector<Vec> slides;
        slides.push_back(Vec(k, 0.0));
        for (const Vec& t : tangents) {
            for (double f : {0.15, -0.15, 0.45, -0.45, 0.8, -0.8}) {
                slides.push_back(scaled(t, f * box));
            }
        }
        const double local = 1.0 + norm2(base);
        const std::size_t combos = std::size_t{1} << idx.size();
        for (const Vec& slide : slides) {
            for (double e : eps) {
                for (std::size_t c = 0; c < combos; ++c) {
                    Vec q = base;
                    for (std::size_t j = 0; j < k; ++j) q[j] += slide[j];
                    for (std::size_t b = 0; b < idx.size(); ++b) {
                        const double sgn = (c >> b) & 1 ? 1.0 : -1.0;
                        add_scaled(q, duals[b], sgn * e * local);
                    }
                    if (sign_pattern(hyperplane_normals, offsets, q, pat)) patterns.insert(pat);
                }
            }
        }
    };

    // Dual directions: columns of A^T (A A^T)^{-1} for the subset's normal
    // matrix A, so stepping along dual b changes only constraint b's margin.
    auto dual_directions = [&](const std::vector<std::size_t>& idx,
                               std::vector<Vec>& duals) -> bool {
        const std::size_t r = idx.size();
        Mat g(r, r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < k; ++l)
                    s += hyperplane_normals[idx[i]][l] * hyperplane_normals[idx[j]][l];
                g(i, j) = s;
            }
        // invert g by Gauss-Jordan (r <= 3)
        Mat inv(r, r);
        for (std::size_t i = 0; i < r; ++i) inv(i, i) = 1.0;
        for (std::size_t col = 0; col < r; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < r; ++i)
                if (std::abs(g(i, col)) > std::abs(g(piv, col))) piv = i;
            if (std::abs(g(piv, col)) < 1e-12) return false;
            if (piv != col) {
                for (std::size_t j = 0; j < r; ++j) {
                    std::swap(g(col, j), g(piv, j));
                    std::swap(inv(col, j), inv(piv, j));
                }
            }
            const double p = g(col, col);
            for (std::size_t j = 0; j < r; ++j) {
                g(col, j) /= p;
                inv(col, j) /= p;
            }
            for (std::size_t i = 0; i < r; ++i) {
                if (i == col) continue;
                const double f = g(i, col);
                for (std::size_t j = 0; j < r; ++j) {
                    g(i, j) -= f * g(col, j);
                    inv(i, j) -= f * inv(col, j);
                }
            }
        }
        duals.assign(r, Vec(k, 0.0));
        for (std::size_t b = 0; b < r; ++b) {
            for (std::size_t i = 0; i < r; ++i) {
                add_scaled(duals[b], hyperplane_normals[idx[i]], inv(i, b));
            }
        }
        return true;
    };

    // Orthonormal basis of the subset's intersection directions.
    auto tangent_directions = [&](const std::vector<std::size_t>& idx) {
        std::vector<Vec> tangents;
        for (std::size_t axis = 0; axis < k; ++axis) {
            Vec t(k, 0.0);
            t[axis] = 1.0;
            for (std::size_t i : idx) {
                const Vec& nv = hyperplane_normals[i];
                const double nn = dot(nv, nv);
                add_scaled(t, nv, -dot(t, nv) / nn);
            }
            for (const Vec& prev : tangents) add_scaled(t, prev, -dot(t, prev));
            const double tn = norm2(t);
            if (tn > 1e-8) tangents.push_back(scaled(t, 1.0 / tn));
        }
        return tangents;
    };

    // Min-norm point on the intersection of the selected hyperplanes, by
    // solving the small normal-equations system (skip near-singular subsets).
    auto intersection_point = [&](const std::vector<std::size_t>& idx, Vec& out) -> bool {
        const std::size_t r = idx.size();
        Mat a(r, k);
        Vec b(r);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < k; ++j) a(i, j) = hyperplane_normals[idx[i]][j];
            b[i] = -offsets[idx[i]];
        }
        // Solve (A A^T) y = b, out = A^T y by Gaussian elimination on r <= 3.
        Mat g(r, r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < k; ++l) s += a(i, l) * a(j, l);
                g(i, j) = s;
            }
        Vec y = b;
        for (std::size_t col = 0; col < r; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < r; ++i)
                if (std::abs(g(i, col)) > std::abs(g(piv, col))) piv = i;
            if (std::abs(g(piv, col)) < 1e-12) return false;
            if (piv != col) {
                for (std::size_t j = 0; j < r; ++j) std::swap(g(col, j), g(piv, j));
                std::swap(y[col], y[piv]);
            }
            for (std::size_t i = col + 1; i < r; ++i) {
                const double f = g(i, col) / g(col, col);
                for (std::size_t j = col; j < r; ++j) g(i, j) -= f * g(col, j);
                y[i] -= f * y[col];
            }
        }
        for (std::size_t col = r; col-- > 0;) {
            for (std::size_t j = col + 1; j < r; ++j) y[col] -= g(col, j) * y[j];
            y[col] /= g(col, col);
        }
        out.assign(k, 0.0);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < k; ++j) out[j] += a(i, j) * y[i];
        return true;
    };

    Vec base(k);
    std::vector<Vec> duals;
    auto probe_subset = [&](const std::vector<std::size_t>& idx) {
        if (!intersection_point(idx, base)) return;
        if (!dual_directions(idx, duals)) return;
        probe_around(base, idx, duals, tangent_directions(idx));
    };
    for (std::size_t i = 0; i < n; ++i) {
        probe_subset({i});
        for (std::size_t j = i + 1; j < n; ++j) {
            if (k >= 2) probe_subset({i, j});
            if (k == 3) {
                for (std::size_t l = j + 1; l < n; ++l) probe_subset({i, j, l});
            }
        }
    }

    return patterns.size();
}

}  // namespace onebit
