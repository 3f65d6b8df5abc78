#pragma once

#include "projgeo/calkin.hpp"
#include "projgeo/instances.hpp"
#include "projgeo/projection.hpp"
#include "projgeo/random.hpp"

#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace projgeo {

inline std::uint64_t draw_seed(Rng& rng) { return rng.engine()(); }

/// d×d projections p, q whose tail index lands in the requested case.
/// InfiniteInfinite needs d ≥ 2, the other cases d ≥ 1.
inline std::pair<Projection, Projection> random_tail_pair(std::size_t d, DichotomyCase kind, Rng& rng) {
    if (d == 0 || (kind == DichotomyCase::InfiniteInfinite && d < 2)) {
        throw Error(ErrorCode::BadInput, "block dimension " + std::to_string(d) + " too small for " + to_string(kind));
    }
    HalmosDims dims;
    switch (kind) {
    case DichotomyCase::FiniteFinite: break;
    case DichotomyCase::InfiniteInfinite:
        dims.m10 = rng.index(1, d - 1);
        dims.m01 = rng.index(1, d - dims.m10);
        break;
    case DichotomyCase::Mixed:
        (rng.index(0, 1) ? dims.m10 : dims.m01) = rng.index(1, d);
        break;
    }
    const std::size_t rem = d - dims.m10 - dims.m01;
    const std::size_t blocks = rng.index(0, rem / 2);
    dims.generic = 2 * blocks;
    dims.m11 = rng.index(0, rem - dims.generic);
    dims.m00 = rem - dims.generic - dims.m11;
    const auto angles = random_angles(blocks, rng);
    return pair_with_dims(dims, angles, draw_seed(rng));
}

/// Lift of `tail` with `count` random exceptional projections of random rank.
inline BlockOperator random_fiber_lift(const Projection& tail, std::size_t count, Rng& rng) {
    const std::size_t d = tail.dim();
    std::vector<CMatrix> ex;
    for (std::size_t i = 0; i < count; ++i) ex.push_back(random_projection(d, rng.index(0, d), draw_seed(rng)).matrix());
    return {d, std::move(ex), tail.matrix()};
}

/// Random skew z with pzp = p⊥zp⊥ = 0 and ‖z‖ = norm (z = 0 if p is 0 or 1).
inline CMatrix random_codiagonal(const Projection& p, double norm, Rng& rng) {
    const std::size_t d = p.dim();
    const CMatrix x = p.matrix() * ginibre(d, d, rng) * p.complement();
    const CMatrix z = x - x.adjoint();
    const double n = op_norm(z);
    return n == 0.0 ? z : z * (norm / n);
}

/// Random block operator with `count` exceptional blocks.
inline BlockOperator random_block_operator(std::size_t d, std::size_t count, Rng& rng) {
    std::vector<CMatrix> ex;
    for (std::size_t i = 0; i < count; ++i) ex.push_back(ginibre(d, d, rng));
    return {d, std::move(ex), ginibre(d, d, rng)};
}

/// Prefix of up to 8 entries in [−10, 10], cycle of 1 to 4 entries in [−2, 2];
/// one time in ten the cycle is all zeros.
inline DiagonalSequence random_diagonal_sequence(Rng& rng) {
    DiagonalSequence s;
    s.prefix.resize(rng.index(0, 8));
    for (auto& x : s.prefix) x = rng.uniform(-10.0, 10.0);
    s.tail_cycle.resize(rng.index(1, 4));
    const bool zero = rng.index(0, 9) == 0;
    for (auto& x : s.tail_cycle) x = zero ? 0.0 : rng.uniform(-2.0, 2.0);
    return s;
}

} // namespace projgeo
