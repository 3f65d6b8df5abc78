#pragma once

#include "projgeo/projection.hpp"
#include "projgeo/random.hpp"

#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace projgeo {

/// Angles are kept this far from 0 and π/2 so that generic blocks are not
/// mistaken for intersections at the default rank threshold.
inline constexpr double kAngleMargin = 0.05;

struct PairConfig {
    HalmosDims dims;
    std::vector<double> angles;
};

inline std::vector<double> random_angles(std::size_t count, Rng& rng, double lo = kAngleMargin,
                                         double hi = std::numbers::pi / 2 - kAngleMargin) {
    std::vector<double> a(count);
    for (auto& x : a) x = rng.uniform(lo, hi);
    return a;
}

/// Random five-space dimensions with total in [1, max_n]. With `balanced`
/// the two intersection spaces R(P)∩N(Q), N(P)∩R(Q) get equal dimension.
inline PairConfig random_config(Rng& rng, std::size_t max_n, bool balanced) {
    for (;;) {
        PairConfig c;
        c.dims.m11 = rng.index(0, 3);
        c.dims.m00 = rng.index(0, 3);
        c.dims.m10 = rng.index(0, 3);
        c.dims.m01 = balanced ? c.dims.m10 : rng.index(0, 3);
        const std::size_t blocks = rng.index(0, 4);
        c.dims.generic = 2 * blocks;
        const std::size_t n = c.dims.total();
        if (n == 0 || n > max_n) continue;
        c.angles = random_angles(blocks, rng);
        return c;
    }
}

inline std::pair<Projection, Projection> realize(const PairConfig& c, std::uint64_t seed) {
    return pair_with_dims(c.dims, c.angles, seed);
}

} // namespace projgeo
