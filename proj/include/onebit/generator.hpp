#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onebit/linalg.hpp"

namespace onebit {

// Offset-free ReLU network G: R^k -> R^d. dims = [k = d0, d1, ..., dn = d],
// weights[i] has shape d_{i+1} x d_i. The ReLU is applied after every layer,
// including the last, so outputs are entrywise nonnegative and
// G(c x) = c G(x) for c >= 0.
struct ReluNetwork {
    std::vector<std::size_t> dims;
    std::vector<Mat> weights;
    std::string label;

    std::size_t depth() const { return weights.size(); }
    std::size_t input_dim() const { return dims.front(); }
    std::size_t output_dim() const { return dims.back(); }

    void validate() const;  // throws config_error on shape/finiteness violations
};

enum class WeightScaleRule { variance_one_over_fanout };

// Layer weights i.i.d. N(0, 1/d_i) where d_i is the layer's output width.
ReluNetwork new_random_gaussian(const std::vector<std::size_t>& dims, WeightScaleRule rule,
                                std::uint64_t seed);

Vec forward(const ReluNetwork& net, const Vec& x);

// Per-layer activity masks at anchor x, strict "> 0" at every layer: an entry
// with pre-activation exactly 0 is inactive. The masked layer cascade applied
// to the anchor reproduces forward() bit for bit.
using Masks = std::vector<std::vector<std::uint8_t>>;

Masks active_masks(const ReluNetwork& net, const Vec& x);

// H_x(z): the network's local linear map at the masks of some anchor x,
// applied layer by layer.
Vec masked_apply(const ReluNetwork& net, const Masks& masks, const Vec& z);
// H_x^T v, applied layer by layer in reverse.
Vec masked_apply_transpose(const ReluNetwork& net, const Masks& masks, const Vec& v);

struct ActiveBranch {
    Masks masks;
    std::vector<Mat> masked_weights;  // diag(mask_i) W_i
    Mat composite;                    // d x k product of the masked weights
};

ActiveBranch active_branch(const ReluNetwork& net, const Vec& x);

// H_x(z) evaluated through the masked layer cascade; branch_apply(b, x) equals
// forward(net, x) exactly when b was taken at anchor x.
Vec branch_apply(const ActiveBranch& branch, const Vec& z);

// Explicit 3-layer offset-free net with input dimension k+1 generating every
// nonnegative k-group-sparse vector in [0,1]^d: first layer emits sigma(x_i)
// and the offset nodes sigma(r*z) for r in [2d/k]; the second layer forms
// Upsilon_r = sigma(sigma(x_i) - 2 sigma(r z)) and
// Upsilon'_r = sigma(sigma(x_i) - 2 sigma(r z) - sigma(z)); the third layer
// emits Gamma_r = sigma(Upsilon_r - 2 Upsilon'_r), a train of d/k
// non-overlapping width-2, height-1 triangles per block.
ReluNetwork group_sparse_network(std::size_t k, std::size_t d);

// Closed-form inverse of the construction above: slot value v at 1-based
// intra-block index r encodes as x_i = 2r + v, last coordinate 1.
Vec encode_group_sparse(const Vec& target, std::size_t k);

// C(d,k) = sum_{i=0}^{k} binom(d,i): the maximum number of pieces d
// hyperplanes can split R^k into.
std::uint64_t count_pieces_bound(std::uint64_t d, std::uint64_t k);

// Desk-scale oracle (k <= 3, at most 12 hyperplanes): counts the open cells of
// the arrangement {x : <n_i, x> + b_i = 0} by Monte-Carlo sign-pattern
// enumeration plus deterministic probes around hyperplane intersections.
// Offsets default to zero (hyperplanes through the origin, as in offset-free
// nets).
std::uint64_t brute_force_region_count(const std::vector<Vec>& hyperplane_normals,
                                       const Vec& offsets = {});

}  // namespace onebit
