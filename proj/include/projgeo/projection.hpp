#pragma once

#include "projgeo/cmatrix.hpp"
#include "projgeo/error.hpp"
#include "projgeo/numkernel.hpp"
#include "projgeo/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace projgeo {

inline constexpr double kProjectionTol = 1e-10;

/// Selfadjoint idempotent, validated on construction. The only way to get
/// one is make_projection() (or a generator that calls it).
class Projection {
public:
    Projection() = default;

    [[nodiscard]] const CMatrix& matrix() const noexcept { return m_; }
    [[nodiscard]] std::size_t dim() const noexcept { return m_.rows(); }
    [[nodiscard]] double rank() const { return m_.trace().real(); }
    /// 1 − P.
    [[nodiscard]] CMatrix complement() const { return CMatrix::identity(dim()) - m_; }
    /// 2P − 1.
    [[nodiscard]] CMatrix symmetry() const { return 2.0 * m_ - CMatrix::identity(dim()); }

    friend Projection make_projection(const CMatrix& m, double tol);

private:
    explicit Projection(CMatrix m) : m_(std::move(m)) {}
    CMatrix m_;
};

inline Projection make_projection(const CMatrix& m, double tol = kProjectionTol) {
    if (!m.is_square()) throw Error(ErrorCode::DimMismatch, "projection must be square, got " + m.shape());
    if (!m.all_finite()) throw Error(ErrorCode::NotAProjection, "non-finite entries");
    // ‖·‖ ≤ ‖·‖_F, so the eigensolve is only needed when Frobenius fails.
    auto bound = [](const CMatrix& r) {
        const double f = r.frobenius_norm();
        return f == 0.0 ? 0.0 : std::min(f, op_norm(r));
    };
    auto check = [&](const CMatrix& r, const char* what) {
        if (r.frobenius_norm() <= tol) return;
        const double v = bound(r);
        if (v > tol) throw Error(ErrorCode::NotAProjection, std::string(what) + " = " + std::to_string(v));
    };
    check(m - m.adjoint(), "‖P − P*‖");
    check(m * m - m, "‖P² − P‖");
    return Projection(m);
}

/// Orthogonal projection onto the span of orthonormal columns.
inline Projection projection_onto(const CMatrix& basis) {
    return make_projection(hermitian_part(basis * basis.adjoint()));
}

inline void require_same_dim(const Projection& p, const Projection& q) {
    if (p.dim() != q.dim()) {
        throw Error(ErrorCode::DimMismatch,
                    "projections of dimension " + std::to_string(p.dim()) + " and " + std::to_string(q.dim()));
    }
}

/// Haar-unitary conjugate of diag(1^r, 0^{n−r}).
inline Projection random_projection(std::size_t n, std::size_t r, std::uint64_t seed) {
    if (r > n) throw Error(ErrorCode::BadRank, "rank " + std::to_string(r) + " exceeds dimension " + std::to_string(n));
    Rng rng(seed);
    const CMatrix u = haar_unitary(n, rng);
    return projection_onto(u.cols_range(0, r));
}

/// Dimensions of the Halmos decomposition in the order
/// R(P)∩R(Q), N(P)∩N(Q), R(P)∩N(Q), N(P)∩R(Q), generic part.
struct HalmosDims {
    std::size_t m11 = 0;
    std::size_t m00 = 0;
    std::size_t m10 = 0;
    std::size_t m01 = 0;
    std::size_t generic = 0;

    [[nodiscard]] std::size_t total() const { return m11 + m00 + m10 + m01 + generic; }
    friend bool operator==(const HalmosDims&, const HalmosDims&) = default;
};

/// Pair of projections with a prescribed Halmos decomposition, conjugated by
/// a seeded Haar unitary. Each angle produces one 2×2 generic block.
inline std::pair<Projection, Projection> pair_with_dims(const HalmosDims& dims, std::span<const double> angles,
                                                        std::uint64_t seed) {
    if (dims.generic % 2 != 0 || angles.size() * 2 != dims.generic) {
        throw Error(ErrorCode::InconsistentDims, "generic dimension " + std::to_string(dims.generic) + " needs " +
                                                     std::to_string(dims.generic / 2) + " angles, got " +
                                                     std::to_string(angles.size()));
    }
    for (double a : angles) {
        if (!(a > 0.0 && a < std::numbers::pi / 2)) {
            throw Error(ErrorCode::InconsistentDims, "angle " + std::to_string(a) + " outside (0, π/2)");
        }
    }
    const std::size_t n = dims.total();
    CMatrix p(n, n);
    CMatrix q(n, n);
    std::size_t at = 0;
    for (std::size_t k = 0; k < dims.m11; ++k, ++at) p(at, at) = q(at, at) = 1.0;
    at += dims.m00;
    for (std::size_t k = 0; k < dims.m10; ++k, ++at) p(at, at) = 1.0;
    for (std::size_t k = 0; k < dims.m01; ++k, ++at) q(at, at) = 1.0;
    for (double a : angles) {
        const double c = std::cos(a);
        const double s = std::sin(a);
        p(at, at) = 1.0;
        q(at, at) = c * c;
        q(at, at + 1) = c * s;
        q(at + 1, at) = c * s;
        q(at + 1, at + 1) = s * s;
        at += 2;
    }
    Rng rng(seed);
    const CMatrix u = haar_unitary(n, rng);
    const CMatrix ua = u.adjoint();
    return {make_projection(hermitian_part(u * p * ua)), make_projection(hermitian_part(u * q * ua))};
}

/// Orthonormal bases of the five Halmos subspaces of (P, Q), together with
/// the compressions of P and Q to the generic part.
struct FiveSpace {
    CMatrix m11;
    CMatrix m00;
    CMatrix m10;
    CMatrix m01;
    CMatrix h0;
    Projection p0;
    Projection q0;
    /// Principal angles of the generic part, ascending, one per 2-dim block.
    std::vector<double> angles;

    [[nodiscard]] HalmosDims dims() const { return {m11.cols(), m00.cols(), m10.cols(), m01.cols(), h0.cols()}; }

    /// [m11 | m00 | m10 | m01 | h0], unitary when the decomposition is sound.
    [[nodiscard]] CMatrix stacked() const { return hstack(hstack(hstack(hstack(m11, m00), m10), m01), h0); }
};

struct IndexPair {
    std::size_t d_plus = 0;  ///< dim N(P−Q−1) = dim R(P)∩N(Q)
    std::size_t d_minus = 0; ///< dim N(P−Q+1) = dim N(P)∩R(Q)

    [[nodiscard]] bool balanced() const { return d_plus == d_minus; }
    friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

inline IndexPair index_pair(const Projection& p, const Projection& q, const Tolerance& tol = {}) {
    require_same_dim(p, q);
    const CMatrix id = CMatrix::identity(p.dim());
    const CMatrix a = p.matrix() - q.matrix();
    return {nullity(a - id, tol, 1.0), nullity(a + id, tol, 1.0)};
}

namespace detail {

/// Orthonormal basis of the orthogonal complement of span(basis).
inline CMatrix orthogonal_complement(const CMatrix& basis, std::size_t n, const Tolerance& tol) {
    if (basis.cols() == 0) return CMatrix::identity(n);
    if (basis.cols() >= n) return CMatrix(n, 0);
    return nullspace(hermitian_part(basis * basis.adjoint()), tol, 1.0);
}

} // namespace detail

inline FiveSpace halmos_decompose(const Projection& p, const Projection& q, const Tolerance& tol = {}) {
    require_same_dim(p, q);
    const std::size_t n = p.dim();
    const CMatrix id = CMatrix::identity(n);
    const CMatrix diff = p.matrix() - q.matrix();
    const CMatrix sum = p.matrix() + q.matrix();

    FiveSpace fs;
    fs.m10 = nullspace(diff - id, tol, 1.0);
    fs.m01 = nullspace(diff + id, tol, 1.0);
    fs.m11 = nullspace(sum - 2.0 * id, tol, 1.0);
    fs.m00 = nullspace(sum, tol, 1.0);

    const CMatrix known = hstack(hstack(hstack(fs.m11, fs.m00), fs.m10), fs.m01);
    const CMatrix rest = detail::orthogonal_complement(known, n, tol);

    // Canonical generic basis: eigenvectors of the compressed P − Q, ascending.
    if (rest.cols() > 0) {
        const auto eig = detail::jacobi_eig(rest.adjoint() * diff * rest);
        fs.h0 = rest * eig.eigenvectors;
    } else {
        fs.h0 = CMatrix(n, 0);
    }
    const CMatrix h0a = fs.h0.adjoint();
    fs.p0 = make_projection(hermitian_part(h0a * p.matrix() * fs.h0));
    fs.q0 = make_projection(hermitian_part(h0a * q.matrix() * fs.h0));

    // On each generic 2-dim block P − Q has eigenvalues ±sin θ and P + Q − 1
    // has ±cos θ. Pairing the two sorted halves gives θ through atan2, which
    // stays accurate near both 0 and π/2.
    const std::size_t g = fs.h0.cols();
    if (g > 0) {
        const CMatrix g_id = CMatrix::identity(g);
        const auto sines = detail::jacobi_eig(fs.p0.matrix() - fs.q0.matrix()).eigenvalues;
        const auto cosines = detail::jacobi_eig(fs.p0.matrix() + fs.q0.matrix() - g_id).eigenvalues;
        const std::size_t half = g / 2;
        for (std::size_t k = 0; k < half; ++k) {
            const double s = std::abs(sines[g - half + k]);
            const double c = std::abs(cosines[g - 1 - k]);
            fs.angles.push_back(std::atan2(s, c));
        }
        std::sort(fs.angles.begin(), fs.angles.end());
    }
    return fs;
}

/// a = P − Q and b = P + Q.
struct DiffSum {
    CMatrix a;
    CMatrix b;

    /// ‖a² + b² − 2b‖.
    [[nodiscard]] double sum_of_squares_residual() const { return op_norm(a * a + b * b - 2.0 * b); }
    /// ‖(b − 1)² − (1 − a)(1 + a)‖.
    [[nodiscard]] double factored_residual() const {
        const CMatrix id = CMatrix::identity(a.rows());
        const CMatrix bm = b - id;
        return op_norm(bm * bm - (id - a) * (id + a));
    }
};

inline constexpr double kDiffSumTol = 1e-11;

inline DiffSum diff_sum(const Projection& p, const Projection& q) {
    require_same_dim(p, q);
    DiffSum ds{p.matrix() - q.matrix(), p.matrix() + q.matrix()};
    const double r1 = ds.sum_of_squares_residual();
    const double r2 = ds.factored_residual();
    if (r1 > kDiffSumTol || r2 > kDiffSumTol) {
        throw Error(ErrorCode::NotAProjection,
                    "difference/sum identities fail: " + std::to_string(r1) + ", " + std::to_string(r2));
    }
    return ds;
}

} // namespace projgeo
