#pragma once

#include "projgeo/cmatrix.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace projgeo {

/// Seeded generator; every random construction takes one explicitly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
    }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    cplx complex_normal() { return {normal() * M_SQRT1_2, normal() * M_SQRT1_2}; }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline CMatrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
    CMatrix g(rows, cols);
    for (auto& z : g.data()) z = rng.complex_normal();
    return g;
}

/// Haar-distributed unitary: Gram-Schmidt (applied twice) on a Ginibre
/// matrix. Positive R-diagonal is automatic, which is what makes it Haar.
inline CMatrix haar_unitary(std::size_t n, Rng& rng) {
    CMatrix q = ginibre(n, n, rng);
    for (std::size_t j = 0; j < n; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                cplx dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += std::conj(q(i, k)) * q(i, j);
                for (std::size_t i = 0; i < n; ++i) q(i, j) -= dot * q(i, k);
            }
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) nrm += std::norm(q(i, j));
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
    }
    return q;
}

inline CMatrix random_hermitian(std::size_t n, Rng& rng) { return hermitian_part(ginibre(n, n, rng)); }

inline CMatrix random_skew(std::size_t n, Rng& rng) { return skew_part(ginibre(n, n, rng)); }

inline CMatrix random_unit_vector(std::size_t n, Rng& rng) {
    CMatrix v = ginibre(n, 1, rng);
    return v * (1.0 / v.frobenius_norm());
}

} // namespace projgeo
