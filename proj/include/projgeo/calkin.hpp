#pragma once

#include "projgeo/cmatrix.hpp"
#include "projgeo/error.hpp"
#include "projgeo/geodesic.hpp"
#include "projgeo/numkernel.hpp"
#include "projgeo/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Desk-scale model of the Calkin algebra. H = ⊕_{n≥0} ℂ^d; an operator is
// block diagonal with finitely many exceptional blocks followed by one block
// repeated forever. Operators with a zero tail play the role of the compact
// ideal and the quotient map keeps the tail block only. Nullspaces of the
// tail are therefore infinite dimensional, everything else is finite.

namespace projgeo {

inline constexpr std::size_t kMaxExceptionalBlocks = 64;
inline constexpr double kSpectralGap = 0.1;
inline constexpr double kModelTol = 1e-10;

class BlockOperator {
public:
    BlockOperator(std::size_t block_dim, std::vector<CMatrix> exceptional, CMatrix tail)
        : d_(block_dim), exceptional_(std::move(exceptional)), tail_(std::move(tail)) {
        if (d_ == 0) throw Error(ErrorCode::BadInput, "block dimension must be positive");
        check_block(tail_, "tail");
        for (const auto& b : exceptional_) check_block(b, "exceptional block");
        while (!exceptional_.empty() && exceptional_.back() == tail_) exceptional_.pop_back();
        if (exceptional_.size() > kMaxExceptionalBlocks) {
            throw Error(ErrorCode::TooManyBlocks, std::to_string(exceptional_.size()) + " exceptional blocks (cap " +
                                                      std::to_string(kMaxExceptionalBlocks) + ")");
        }
    }

    /// Every block equal to `tail`.
    static BlockOperator periodic(CMatrix tail) {
        const std::size_t d = tail.rows();
        return {d, {}, std::move(tail)};
    }
    static BlockOperator identity(std::size_t d) { return periodic(CMatrix::identity(d)); }
    static BlockOperator zero(std::size_t d) { return periodic(CMatrix(d, d)); }

    [[nodiscard]] std::size_t block_dim() const noexcept { return d_; }
    [[nodiscard]] const std::vector<CMatrix>& exceptional() const noexcept { return exceptional_; }
    [[nodiscard]] std::size_t exceptional_count() const noexcept { return exceptional_.size(); }
    [[nodiscard]] const CMatrix& tail() const noexcept { return tail_; }
    /// Block at index i ≥ 0.
    [[nodiscard]] const CMatrix& block(std::size_t i) const { return i < exceptional_.size() ? exceptional_[i] : tail_; }

    /// Zero tail: the model of a compact operator.
    [[nodiscard]] bool is_compact() const { return tail_.max_abs() == 0.0; }

    /// Exact operator norm: the largest block norm.
    [[nodiscard]] double norm() const {
        double r = op_norm(tail_);
        for (const auto& b : exceptional_) r = std::max(r, op_norm(b));
        return r;
    }

    [[nodiscard]] BlockOperator adjoint() const { return map([](const CMatrix& b) { return b.adjoint(); }); }

    template <class F>
    [[nodiscard]] BlockOperator map(F&& f) const {
        std::vector<CMatrix> ex;
        ex.reserve(exceptional_.size());
        for (const auto& b : exceptional_) ex.push_back(f(b));
        return {d_, std::move(ex), f(tail_)};
    }

    /// Blockwise combination; the shorter exceptional list is padded with its tail.
    template <class F>
    [[nodiscard]] BlockOperator zip(const BlockOperator& o, F&& f) const {
        if (o.d_ != d_) {
            throw Error(ErrorCode::BlockDimMismatch, "block dimensions " + std::to_string(d_) + " and " +
                                                         std::to_string(o.d_));
        }
        const std::size_t m = std::max(exceptional_.size(), o.exceptional_.size());
        std::vector<CMatrix> ex;
        ex.reserve(m);
        for (std::size_t i = 0; i < m; ++i) ex.push_back(f(block(i), o.block(i)));
        return {d_, std::move(ex), f(tail_, o.tail_)};
    }

    friend BlockOperator operator+(const BlockOperator& a, const BlockOperator& b) {
        return a.zip(b, [](const CMatrix& x, const CMatrix& y) { return x + y; });
    }
    friend BlockOperator operator-(const BlockOperator& a, const BlockOperator& b) {
        return a.zip(b, [](const CMatrix& x, const CMatrix& y) { return x - y; });
    }
    friend BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
        return a.zip(b, [](const CMatrix& x, const CMatrix& y) { return x * y; });
    }
    friend BlockOperator operator*(cplx s, const BlockOperator& a) {
        return a.map([s](const CMatrix& x) { return s * x; });
    }
    friend bool operator==(const BlockOperator&, const BlockOperator&) = default;

private:
    void check_block(const CMatrix& b, const char* what) const {
        if (b.rows() != d_ || b.cols() != d_) {
            throw Error(ErrorCode::BlockDimMismatch, std::string(what) + " is " + b.shape() + ", block dimension " +
                                                         std::to_string(d_));
        }
        if (!b.all_finite()) throw Error(ErrorCode::BadInput, std::string(what) + " has non-finite entries");
    }

    std::size_t d_;
    std::vector<CMatrix> exceptional_;
    CMatrix tail_;
};

/// Image under the quotient map: the tail block.
struct QuotientElement {
    CMatrix value;
};

inline QuotientElement quotient(const BlockOperator& a) { return {a.tail()}; }

/// First `blocks` diagonal blocks as one dense matrix.
inline CMatrix truncate(const BlockOperator& a, std::size_t blocks) {
    const std::size_t d = a.block_dim();
    CMatrix r(blocks * d, blocks * d);
    for (std::size_t i = 0; i < blocks; ++i) r.set_block(i * d, i * d, a.block(i));
    return r;
}

namespace detail {

inline void require_model_projection(const CMatrix& m, const char* what) {
    try {
        (void)make_projection(m, kModelTol);
    } catch (const Error& e) {
        throw Error(ErrorCode::NotAProjection, std::string(what) + ": " + e.what());
    }
}

inline void require_block_projection(const BlockOperator& p, const char* what) {
    for (std::size_t i = 0; i < p.exceptional_count(); ++i) require_model_projection(p.exceptional()[i], what);
    require_model_projection(p.tail(), what);
}

/// e^{tz} p e^{−tz}. Lifted and quotient curves both go through here, so
/// equal tails give bitwise equal results.
inline CMatrix conjugate_by_exp(const CMatrix& p, const CMatrix& z, double t) {
    const CMatrix e = expm_skew(t * z);
    return hermitian_part(e * p * e.adjoint());
}

} // namespace detail

/// φ(T) with φ the indicator of [1/2, ∞), applied blockwise. Every
/// exceptional eigenvalue must keep a distance kSpectralGap from 1/2.
inline BlockOperator lift_projection(const BlockOperator& t, const Tolerance& tol = {}) {
    auto herm = [&](const CMatrix& b, const std::string& where) {
        if (!is_hermitian(b, tol.recon_rtol)) {
            throw Error(ErrorCode::NotSelfadjoint, where + ": ‖B − B*‖ = " + std::to_string(op_norm(b - b.adjoint())));
        }
        return hermitian_part(b);
    };
    const CMatrix tail = herm(t.tail(), "tail");
    detail::require_model_projection(tail, "tail of T");

    auto threshold = [](const HermEig& e) {
        return hermitian_part(e.apply([](double l) { return cplx(l >= 0.5 ? 1.0 : 0.0); }));
    };
    std::vector<CMatrix> ex;
    for (std::size_t i = 0; i < t.exceptional_count(); ++i) {
        const auto eig = detail::jacobi_eig(herm(t.exceptional()[i], "block " + std::to_string(i)));
        for (double l : eig.eigenvalues) {
            if (std::abs(l - 0.5) < kSpectralGap) {
                throw Error(ErrorCode::NoSpectralGap, "block " + std::to_string(i) + " has eigenvalue " +
                                                          std::to_string(l) + " within " +
                                                          std::to_string(kSpectralGap) + " of 1/2");
            }
        }
        ex.push_back(threshold(eig));
    }
    return {t.block_dim(), std::move(ex), threshold(detail::jacobi_eig(tail))};
}

/// Diagonal of a diagonal operator: a finite prefix followed by a cycle that
/// repeats forever.
struct DiagonalSequence {
    std::vector<double> prefix;
    std::vector<double> tail_cycle;

    void validate() const {
        if (tail_cycle.empty()) throw Error(ErrorCode::BadInput, "tail_cycle must be non-empty");
        auto finite = [](double x) { return std::isfinite(x); };
        if (!std::all_of(prefix.begin(), prefix.end(), finite) ||
            !std::all_of(tail_cycle.begin(), tail_cycle.end(), finite)) {
            throw Error(ErrorCode::BadInput, "non-finite sequence entry");
        }
    }

    [[nodiscard]] double at(std::size_t i) const {
        return i < prefix.size() ? prefix[i] : tail_cycle[(i - prefix.size()) % tail_cycle.size()];
    }

    /// limsup |d_n|: the largest magnitude in the cycle.
    [[nodiscard]] double limsup_abs() const {
        double r = 0.0;
        for (double x : tail_cycle) r = std::max(r, std::abs(x));
        return r;
    }

    /// sup |d_n| over the whole sequence.
    [[nodiscard]] double sup_abs() const {
        double r = limsup_abs();
        for (double x : prefix) r = std::max(r, std::abs(x));
        return r;
    }

    /// Zero tail: the sequence lies in c₀.
    [[nodiscard]] bool vanishes_at_infinity() const {
        return std::all_of(tail_cycle.begin(), tail_cycle.end(), [](double x) { return x == 0.0; });
    }

    friend DiagonalSequence operator+(const DiagonalSequence& a, const DiagonalSequence& b) {
        a.validate();
        b.validate();
        const std::size_t pre = std::max(a.prefix.size(), b.prefix.size());
        const std::size_t cyc = std::lcm(a.tail_cycle.size(), b.tail_cycle.size());
        DiagonalSequence s;
        for (std::size_t i = 0; i < pre; ++i) s.prefix.push_back(a.at(i) + b.at(i));
        for (std::size_t j = 0; j < cyc; ++j) s.tail_cycle.push_back(a.at(pre + j) + b.at(pre + j));
        return s;
    }
};

/// The c₀ correction k₀ with sup|d + k₀| = limsup|d|: entries beyond
/// ±limsup|d| are clipped back to it.
inline DiagonalSequence minimal_norm_lift(const DiagonalSequence& d) {
    d.validate();
    const double lim = d.limsup_abs();
    DiagonalSequence k;
    k.tail_cycle = {0.0};
    k.prefix.reserve(d.prefix.size());
    for (double x : d.prefix) {
        const double clipped = std::clamp(x, -lim, lim);
        double corr = clipped - x;
        // clipped − x can round; step it by ulps until x + corr lands in [−L, L].
        while (x + corr > lim) corr = std::nextafter(corr, -INFINITY);
        while (x + corr < -lim) corr = std::nextafter(corr, INFINITY);
        k.prefix.push_back(corr);
    }
    return k;
}

/// Lift of the quotient geodesic δ(t) = e^{tz} p e^{−tz} starting at the
/// chosen P in the fiber of p: Z = P Z₀ P⊥ + P⊥ Z₀ P with Z₀ = z on every block.
inline BlockOperator lift_geodesic(const QuotientElement& p, const QuotientElement& z, const BlockOperator& lift_p) {
    const std::size_t d = lift_p.block_dim();
    if (p.value.rows() != d || p.value.cols() != d || z.value.rows() != d || z.value.cols() != d) {
        throw Error(ErrorCode::BlockDimMismatch, "quotient data " + p.value.shape() + ", " + z.value.shape() +
                                                     " for block dimension " + std::to_string(d));
    }
    detail::require_model_projection(p.value, "p");
    const double skew = op_norm(z.value + z.value.adjoint());
    if (skew > kModelTol) throw Error(ErrorCode::NotSkew, "‖z + z*‖ = " + std::to_string(skew));
    const double codiag = codiagonal_residual(p.value, z.value);
    if (codiag > kModelTol) throw Error(ErrorCode::NotCodiagonal, "‖pzp‖ or ‖p⊥zp⊥‖ = " + std::to_string(codiag));
    const double zn = op_norm(z.value);
    if (zn > std::numbers::pi / 2 + kNormalizedSlack) {
        throw Error(ErrorCode::NormTooLarge, "‖z‖ = " + std::to_string(zn) + " exceeds π/2");
    }
    detail::require_block_projection(lift_p, "initial projection");
    const double fiber = op_norm(lift_p.tail() - p.value);
    if (fiber > kModelTol) throw Error(ErrorCode::BadInput, "P is not in the fiber of p: ‖π(P) − p‖ = " + std::to_string(fiber));

    const BlockOperator z0 = BlockOperator::periodic(z.value);
    const BlockOperator pc = BlockOperator::identity(d) - lift_p;
    const BlockOperator lifted = lift_p * z0 * pc + pc * z0 * lift_p;
    // On the tail the compression returns z itself (codiagonality); store it
    // verbatim so π(Z) = z holds exactly.
    std::vector<CMatrix> ex;
    for (const auto& b : lifted.exceptional()) ex.push_back(skew_part(b));
    return {d, std::move(ex), z.value};
}

/// Δ(t) = e^{tZ} P e^{−tZ}, blockwise.
inline BlockOperator geodesic_point(const BlockOperator& lift_p, const BlockOperator& exponent, double t) {
    return lift_p.zip(exponent, [t](const CMatrix& p, const CMatrix& z) { return detail::conjugate_by_exp(p, z, t); });
}

/// δ(t) = e^{tz} p e^{−tz} in the quotient.
inline QuotientElement quotient_geodesic_point(const QuotientElement& p, const QuotientElement& z, double t) {
    return {detail::conjugate_by_exp(p.value, z.value, t)};
}

enum class DichotomyCase { FiniteFinite, InfiniteInfinite, Mixed };

constexpr const char* to_string(DichotomyCase c) {
    switch (c) {
    case DichotomyCase::FiniteFinite: return "FiniteFinite";
    case DichotomyCase::InfiniteInfinite: return "InfiniteInfinite";
    case DichotomyCase::Mixed: return "Mixed";
    }
    return "?";
}

struct DichotomyResult {
    bool exists = false;
    DichotomyCase kind = DichotomyCase::Mixed;
    /// (nullity(p−q−1), nullity(p−q+1)) of the tail blocks.
    IndexPair tail_index;
    /// Lifts of p, q whose exceptional blocks all have index (0,0).
    std::optional<std::pair<BlockOperator, BlockOperator>> witnesses;
};

namespace detail {

/// Drops R(P)∩N(Q) from P and N(P)∩R(Q) from Q on one block. The change is
/// finite rank and leaves both intersections trivial.
inline std::pair<CMatrix, CMatrix> remove_intersections(const CMatrix& p, const CMatrix& q, const Tolerance& tol) {
    const Projection pp = make_projection(p, kModelTol);
    const Projection qq = make_projection(q, kModelTol);
    const FiveSpace fs = halmos_decompose(pp, qq, tol);
    CMatrix pn = p;
    CMatrix qn = q;
    if (fs.m10.cols() > 0) pn -= fs.m10 * fs.m10.adjoint();
    if (fs.m01.cols() > 0) qn -= fs.m01 * fs.m01.adjoint();
    return {hermitian_part(pn), hermitian_part(qn)};
}

} // namespace detail

/// Decides whether p and q are joined by a geodesic of the model quotient.
/// Nullspaces of lifts are infinite exactly when the tail nullspace is
/// nontrivial, so the answer depends on the tails alone. `lifts` (defaulting
/// to the periodic lifts) are turned into witnesses by removing the
/// intersection parts of every exceptional block.
inline DichotomyResult existence_dichotomy(const QuotientElement& p, const QuotientElement& q,
                                           const std::optional<std::pair<BlockOperator, BlockOperator>>& lifts = std::nullopt,
                                           const Tolerance& tol = {}) {
    detail::require_model_projection(p.value, "p");
    detail::require_model_projection(q.value, "q");
    const std::size_t d = p.value.rows();
    if (q.value.rows() != d) {
        throw Error(ErrorCode::BlockDimMismatch, "p is " + p.value.shape() + ", q is " + q.value.shape());
    }
    DichotomyResult r;
    r.tail_index = index_pair(make_projection(p.value, kModelTol), make_projection(q.value, kModelTol), tol);
    const bool plus_inf = r.tail_index.d_plus > 0;
    const bool minus_inf = r.tail_index.d_minus > 0;
    r.kind = plus_inf == minus_inf ? (plus_inf ? DichotomyCase::InfiniteInfinite : DichotomyCase::FiniteFinite)
                                   : DichotomyCase::Mixed;
    r.exists = r.kind != DichotomyCase::Mixed;
    if (!r.exists) return r;

    BlockOperator lp = BlockOperator::periodic(p.value);
    BlockOperator lq = BlockOperator::periodic(q.value);
    if (lifts) {
        std::tie(lp, lq) = *lifts;
        if (lp.block_dim() != d || lq.block_dim() != d) {
            throw Error(ErrorCode::BlockDimMismatch, "lifts do not match block dimension " + std::to_string(d));
        }
        detail::require_block_projection(lp, "lift of p");
        detail::require_block_projection(lq, "lift of q");
        if (op_norm(lp.tail() - p.value) > kModelTol || op_norm(lq.tail() - q.value) > kModelTol) {
            throw Error(ErrorCode::BadInput, "lift tails differ from p, q");
        }
    }
    const std::size_t m = std::max(lp.exceptional_count(), lq.exceptional_count());
    std::vector<CMatrix> ep, eq;
    for (std::size_t i = 0; i < m; ++i) {
        auto [a, b] = detail::remove_intersections(lp.block(i), lq.block(i), tol);
        ep.push_back(std::move(a));
        eq.push_back(std::move(b));
    }
    r.witnesses.emplace(BlockOperator(d, std::move(ep), lp.tail()), BlockOperator(d, std::move(eq), lq.tail()));
    return r;
}

struct QuotientGeodesic {
    GeodesicSegment segment;
    DichotomyCase kind;
    /// b − 1 = p + q − 1 invertible at rank_rtol: the model's trivial annihilator.
    bool unique = false;
    double min_singular_b1 = 0.0;
    /// Blockwise minimal exponent between the witness lifts, when built.
    std::optional<BlockOperator> lifted_exponent;
    /// ‖π(Z_lift) − z‖.
    double lift_residual = 0.0;
};

/// Minimal geodesic of the model quotient between p and q. When the
/// witnesses are available their blockwise minimal exponent is computed as
/// well and its quotient compared with z.
inline QuotientGeodesic quotient_geodesic(const QuotientElement& p, const QuotientElement& q, const Tolerance& tol = {}) {
    const DichotomyResult dich = existence_dichotomy(p, q, std::nullopt, tol);
    if (!dich.exists) {
        throw Error(ErrorCode::NoGeodesic, "index (" + std::to_string(dich.tail_index.d_plus) + "," +
                                               std::to_string(dich.tail_index.d_minus) + ") of the tails is mixed");
    }
    if (!dich.tail_index.balanced()) {
        // Both nullspaces are infinite, but pairing them needs an isometry
        // that mixes blocks, which a period-one block operator cannot carry.
        throw Error(ErrorCode::NotRepresentable,
                    "tail index (" + std::to_string(dich.tail_index.d_plus) + "," +
                        std::to_string(dich.tail_index.d_minus) + ") needs a cross-block pairing");
    }
    const Projection pp = make_projection(p.value, kModelTol);
    const Projection qq = make_projection(q.value, kModelTol);
    QuotientGeodesic out{minimal_exponent(pp, qq, std::nullopt, tol), dich.kind};

    const std::size_t d = p.value.rows();
    const CMatrix b1 = p.value + q.value - CMatrix::identity(d);
    const auto eig = detail::jacobi_eig(b1);
    double smallest = INFINITY, largest = 1.0;
    for (double l : eig.eigenvalues) {
        smallest = std::min(smallest, std::abs(l));
        largest = std::max(largest, std::abs(l));
    }
    out.min_singular_b1 = smallest;
    out.unique = smallest >= tol.rank_rtol * largest;

    const auto& [wp, wq] = *dich.witnesses;
    const BlockOperator z = wp.zip(wq, [&](const CMatrix& a, const CMatrix& b) {
        return minimal_exponent(make_projection(a, kModelTol), make_projection(b, kModelTol), std::nullopt, tol)
            .exponent();
    });
    out.lift_residual = op_norm(quotient(z).value - out.segment.exponent());
    out.lifted_exponent = z;
    return out;
}

} // namespace projgeo
