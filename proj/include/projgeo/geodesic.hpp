#pragma once

#include "projgeo/cmatrix.hpp"
#include "projgeo/error.hpp"
#include "projgeo/numkernel.hpp"
#include "projgeo/projection.hpp"
#include "projgeo/random.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace projgeo {

inline constexpr double kSkewTol = 1e-10;
inline constexpr double kCodiagonalTol = 1e-9;
inline constexpr double kNormalizedSlack = 1e-12;
inline constexpr double kTangentTol = 1e-9;

/// ‖PZP‖ and ‖(1−P)Z(1−P)‖, the larger of the two.
inline double codiagonal_residual(const CMatrix& p, const CMatrix& z) {
    const CMatrix pc = CMatrix::identity(p.rows()) - p;
    return std::max(op_norm(p * z * p), op_norm(pc * z * pc));
}

/// Δ(t) = e^{tZ} P e^{−tZ} with Z skew-Hermitian and P-codiagonal. The
/// spectral decomposition of −iZ is cached so evaluation at many t costs one
/// reconstruction each.
class GeodesicSegment {
public:
    static GeodesicSegment make(Projection base, CMatrix exponent) {
        if (exponent.rows() != base.dim() || exponent.cols() != base.dim()) {
            throw Error(ErrorCode::DimMismatch, "exponent " + exponent.shape() + " for base of dimension " +
                                                    std::to_string(base.dim()));
        }
        const double skew = op_norm(exponent + exponent.adjoint());
        if (skew > kSkewTol) throw Error(ErrorCode::NotSkew, "‖Z + Z*‖ = " + std::to_string(skew));
        const double codiag = codiagonal_residual(base.matrix(), exponent);
        if (codiag > kCodiagonalTol) throw Error(ErrorCode::NotCodiagonal, "‖PZP‖ or ‖P⊥ZP⊥‖ = " + std::to_string(codiag));

        GeodesicSegment seg;
        seg.spectral_ = detail::jacobi_eig(cplx(0.0, -1.0) * exponent);
        double nrm = 0.0;
        for (double l : seg.spectral_.eigenvalues) nrm = std::max(nrm, std::abs(l));
        seg.norm_ = nrm;
        seg.normalized_ = nrm <= std::numbers::pi / 2 + kNormalizedSlack;
        seg.base_ = std::move(base);
        seg.exponent_ = std::move(exponent);
        return seg;
    }

    [[nodiscard]] const Projection& base() const noexcept { return base_; }
    [[nodiscard]] const CMatrix& exponent() const noexcept { return exponent_; }
    [[nodiscard]] std::size_t dim() const noexcept { return base_.dim(); }
    /// ‖Z‖, which is also the length of the segment on [0, 1].
    [[nodiscard]] double norm() const noexcept { return norm_; }
    /// ‖Z‖ ≤ π/2: minimal on |t| ≤ 1.
    [[nodiscard]] bool normalized() const noexcept { return normalized_; }

    /// e^{tZ}.
    [[nodiscard]] CMatrix exp_at(double t) const {
        return spectral_.apply([t](double l) { return std::polar(1.0, t * l); });
    }

private:
    GeodesicSegment() = default;

    Projection base_;
    CMatrix exponent_;
    HermEig spectral_;
    double norm_ = 0.0;
    bool normalized_ = true;
};

/// Hermitian x with x = px + xp.
struct TangentVector {
    Projection at;
    CMatrix value;

    static TangentVector make(Projection at, CMatrix value) {
        const CMatrix& p = at.matrix();
        const double res = op_norm(value - (p * value + value * p));
        if (res > kTangentTol) throw Error(ErrorCode::NotCodiagonal, "tangency residual " + std::to_string(res));
        return {std::move(at), std::move(value)};
    }
};

inline Projection evaluate(const GeodesicSegment& seg, double t) {
    const CMatrix e = seg.exp_at(t);
    return make_projection(hermitian_part(e * seg.base().matrix() * e.adjoint()));
}

/// d/dt Δ(t) = e^{tZ} [Z, P] e^{−tZ}.
inline TangentVector velocity(const GeodesicSegment& seg, double t) {
    const CMatrix e = seg.exp_at(t);
    const CMatrix x = hermitian_part(e * commutator(seg.exponent(), seg.base().matrix()) * e.adjoint());
    return TangentVector::make(evaluate(seg, t), x);
}

/// A curve t ∈ [0, 1] ↦ projection, sampled on demand.
struct Curve {
    std::function<Projection(double)> sample;
};

inline Curve geodesic_curve(GeodesicSegment seg) {
    return {[seg = std::move(seg)](double t) { return evaluate(seg, t); }};
}

inline Curve constant_curve(Projection p) {
    return {[p = std::move(p)](double) { return p; }};
}

/// First leg on [0, 1/2], second on [1/2, 1], each reparametrized to unit time.
inline Curve two_leg_curve(GeodesicSegment first, GeodesicSegment second) {
    return {[a = std::move(first), b = std::move(second)](double t) {
        return t <= 0.5 ? evaluate(a, 2.0 * t) : evaluate(b, 2.0 * t - 1.0);
    }};
}

/// Chordal lower sum Σ ‖γ(t_{i+1}) − γ(t_i)‖ over m equal steps of [0, 1].
inline double curve_length(const Curve& curve, std::size_t m) {
    if (m < 2) throw Error(ErrorCode::BadInput, "curve_length needs at least 2 steps, got " + std::to_string(m));
    double len = 0.0;
    Projection prev = curve.sample(0.0);
    for (std::size_t i = 1; i <= m; ++i) {
        Projection next = curve.sample(static_cast<double>(i) / static_cast<double>(m));
        len += op_norm(next.matrix() - prev.matrix());
        prev = std::move(next);
    }
    return len;
}

inline bool exists_geodesic(const Projection& p, const Projection& q, const Tolerance& tol = {}) {
    return index_pair(p, q, tol).balanced();
}

namespace detail {

inline void require_unitary(const CMatrix& u, std::size_t k) {
    if (u.rows() != k || u.cols() != k) {
        throw Error(ErrorCode::BadUnitarySize, "expected " + std::to_string(k) + "x" + std::to_string(k) +
                                                   " unitary, got " + u.shape());
    }
    const double res = op_norm(u.adjoint() * u - CMatrix::identity(k));
    if (res > 1e-10) throw Error(ErrorCode::NotUnitary, "‖U*U − I‖ = " + std::to_string(res));
}

/// Exponent assembled over a Halmos decomposition: zero on m11 ⊕ m00,
/// iπ/2 (V + V*) on m10 ⊕ m01 with V = m10 · C · m01*, and the logarithm of
/// V₀(2P₀ − 1) on the generic part.
inline CMatrix assemble_exponent(const FiveSpace& fs, const CMatrix& pairing, const Tolerance& tol) {
    const std::size_t n = fs.stacked().rows();
    CMatrix z(n, n);
    if (fs.m10.cols() > 0) {
        const CMatrix v = fs.m10 * pairing * fs.m01.adjoint();
        z += cplx(0.0, std::numbers::pi / 2) * (v + v.adjoint());
    }
    if (fs.h0.cols() > 0) {
        const std::size_t g = fs.h0.cols();
        const CMatrix& p0 = fs.p0.matrix();
        const CMatrix v0 = polar_unitary(p0 + fs.q0.matrix() - CMatrix::identity(g), tol);
        const auto lg = logm_unitary_principal(v0 * fs.p0.symmetry(), tol, /*require_interior=*/true);
        z += fs.h0 * lg.log * fs.h0.adjoint();
    }
    return skew_part(z);
}

} // namespace detail

/// Minimal geodesic from P to Q. `pairing` is the k×k unitary coefficient
/// matrix of the isometry m01 → m10 in the canonical Halmos bases; identity
/// when omitted.
inline GeodesicSegment minimal_exponent(const Projection& p, const Projection& q,
                                        const std::optional<CMatrix>& pairing = std::nullopt,
                                        const Tolerance& tol = {}) {
    require_same_dim(p, q);
    const FiveSpace fs = halmos_decompose(p, q, tol);
    const std::size_t k = fs.m10.cols();
    if (k != fs.m01.cols()) {
        throw Error(ErrorCode::NoGeodesic,
                    "index (" + std::to_string(k) + "," + std::to_string(fs.m01.cols()) + ")");
    }
    CMatrix coeffs = CMatrix::identity(k);
    if (pairing) {
        detail::require_unitary(*pairing, k);
        coeffs = *pairing;
    }
    return GeodesicSegment::make(p, detail::assemble_exponent(fs, coeffs, tol));
}

/// ‖Δ(1) − Q‖.
inline double endpoint_error(const GeodesicSegment& seg, const Projection& q) {
    return op_norm(evaluate(seg, 1.0).matrix() - q.matrix());
}

/// Geodesics P → Q, one per unitary U_i on m10 (pairing U_i ∘ V_canonical).
inline std::vector<GeodesicSegment> multi_geodesic_family(const Projection& p, const Projection& q,
                                                          const std::vector<CMatrix>& unitaries,
                                                          const Tolerance& tol = {}) {
    require_same_dim(p, q);
    const FiveSpace fs = halmos_decompose(p, q, tol);
    const std::size_t k = fs.m10.cols();
    if (k == 0 || k != fs.m01.cols()) {
        throw Error(ErrorCode::BadIndex, "family needs index (k,k) with k ≥ 1, got (" + std::to_string(k) + "," +
                                             std::to_string(fs.m01.cols()) + ")");
    }
    std::vector<GeodesicSegment> out;
    out.reserve(unitaries.size());
    for (const auto& u : unitaries) {
        detail::require_unitary(u, k);
        out.push_back(GeodesicSegment::make(p, detail::assemble_exponent(fs, u, tol)));
    }
    return out;
}

/// ‖Z_{PR}‖ + ‖Z_{RQ}‖: the length of the piecewise geodesic P → R → Q.
inline double two_leg_length(const Projection& p, const Projection& r, const Projection& q, const Tolerance& tol = {}) {
    return minimal_exponent(p, r, std::nullopt, tol).norm() + minimal_exponent(r, q, std::nullopt, tol).norm();
}

/// Lengths of `trials` two-leg competitors through random intermediate
/// projections R of the same rank, trial i seeded with seed + i.
inline std::vector<double> minimality_competitors(const Projection& p, const Projection& q, std::size_t trials,
                                                  std::uint64_t seed, const Tolerance& tol = {}) {
    require_same_dim(p, q);
    const IndexPair idx = index_pair(p, q, tol);
    if (!idx.balanced()) {
        throw Error(ErrorCode::NoGeodesic,
                    "index (" + std::to_string(idx.d_plus) + "," + std::to_string(idx.d_minus) + ")");
    }
    const std::size_t n = p.dim();
    const auto rank = static_cast<std::size_t>(std::lround(p.rank()));
    std::vector<double> lengths;
    lengths.reserve(trials);
    constexpr int kMaxAttempts = 16;
    for (std::size_t t = 0; t < trials; ++t) {
        for (int attempt = 0;; ++attempt) {
            if (attempt == kMaxAttempts) {
                throw Error(ErrorCode::NoGeodesic, "no admissible intermediate projection after " +
                                                       std::to_string(kMaxAttempts) + " draws");
            }
            const std::uint64_t s = seed + t + (static_cast<std::uint64_t>(attempt) << 32);
            const Projection r = random_projection(n, rank, s);
            if (!exists_geodesic(p, r, tol) || !exists_geodesic(r, q, tol)) continue;
            lengths.push_back(two_leg_length(p, r, q, tol));
            break;
        }
    }
    return lengths;
}

struct UniquenessReport {
    bool unique = false;
    IndexPair index;
    /// ‖Z − U Z' U*‖ between the direct exponent and the one recovered from
    /// the conjugated pair (index (0,0) only).
    double rederivation_error = 0.0;
    /// Two distinct minimal exponents (index (k,k), k ≥ 1 only).
    std::optional<std::pair<CMatrix, CMatrix>> witness;
};

inline UniquenessReport unique_minimal_check(const Projection& p, const Projection& q, std::uint64_t seed = 0,
                                             const Tolerance& tol = {}) {
    require_same_dim(p, q);
    UniquenessReport rep;
    rep.index = index_pair(p, q, tol);
    if (!rep.index.balanced()) {
        throw Error(ErrorCode::NoGeodesic, "index (" + std::to_string(rep.index.d_plus) + "," +
                                               std::to_string(rep.index.d_minus) + ")");
    }
    if (rep.index.d_plus == 0) {
        const GeodesicSegment direct = minimal_exponent(p, q, std::nullopt, tol);
        Rng rng(seed);
        const CMatrix u = haar_unitary(p.dim(), rng);
        const CMatrix ua = u.adjoint();
        const Projection pc = make_projection(hermitian_part(ua * p.matrix() * u));
        const Projection qc = make_projection(hermitian_part(ua * q.matrix() * u));
        const CMatrix back = u * minimal_exponent(pc, qc, std::nullopt, tol).exponent() * ua;
        rep.rederivation_error = op_norm(direct.exponent() - back);
        rep.unique = true;
        return rep;
    }
    const std::size_t k = rep.index.d_plus;
    const auto family = multi_geodesic_family(
        p, q, {CMatrix::identity(k), cplx(0.0, 1.0) * CMatrix::identity(k)}, tol);
    rep.witness = std::make_pair(family[0].exponent(), family[1].exponent());
    rep.unique = false;
    return rep;
}

} // namespace projgeo
