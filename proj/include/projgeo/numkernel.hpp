#pragma once

#include "projgeo/cmatrix.hpp"
#include "projgeo/error.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace projgeo {

/// Thresholds shared by every rank decision and reconstruction check.
struct Tolerance {
    double rank_rtol = 1e-10;
    double recon_rtol = 1e-12;

    void validate() const {
        auto ok = [](double v) { return v > 0.0 && v < 1e-2; };
        if (!ok(rank_rtol) || !ok(recon_rtol)) {
            throw Error(ErrorCode::BadTolerance, "tolerances must lie in (0, 1e-2), got rank_rtol=" +
                                                     std::to_string(rank_rtol) +
                                                     " recon_rtol=" + std::to_string(recon_rtol));
        }
    }
};

/// Eigenvalues ascending, eigenvectors as the columns of a unitary matrix.
struct HermEig {
    std::vector<double> eigenvalues;
    CMatrix eigenvectors;

    /// U f(diag) U*.
    template <class F>
    [[nodiscard]] CMatrix apply(F&& f) const {
        const std::size_t n = eigenvalues.size();
        CMatrix r(n, n);
        for (std::size_t k = 0; k < n; ++k) {
            const cplx fk = f(eigenvalues[k]);
            if (fk == cplx(0.0)) continue;
            for (std::size_t i = 0; i < n; ++i) {
                const cplx uik = eigenvectors(i, k) * fk;
                for (std::size_t j = 0; j < n; ++j) r(i, j) += uik * std::conj(eigenvectors(j, k));
            }
        }
        return r;
    }
};

inline constexpr int kJacobiSweepBudget = 30;

namespace detail {

/// Cyclic complex Jacobi on the Hermitian part of `a`. No precondition
/// checks; callers that need them go through herm_eig().
inline HermEig jacobi_eig(CMatrix a, int max_sweeps = kJacobiSweepBudget) {
    const std::size_t n = a.rows();
    CMatrix v = CMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx h = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = h;
            a(j, i) = std::conj(h);
        }
    }

    auto off_sq = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += std::norm(a(i, j));
        return 2.0 * s;
    };
    const double fro_sq = a.frobenius_norm() * a.frobenius_norm();
    const double stop = DBL_EPSILON * DBL_EPSILON * fro_sq * 1e-4;

    bool converged = fro_sq == 0.0 || n < 2;
    for (int sweep = 0; !converged; ++sweep) {
        const double off = off_sq();
        if (off <= stop) {
            converged = true;
            break;
        }
        if (sweep >= max_sweeps) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double g = std::abs(apq);
                if (g == 0.0) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                if (sweep > 3 && std::abs(app) + 100.0 * g == std::abs(app) &&
                    std::abs(aqq) + 100.0 * g == std::abs(aqq)) {
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    continue;
                }
                const double theta = (aqq - app) / (2.0 * g);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const cplx e = apq / g;
                const cplx ce = std::conj(e);

                // a <- a G, v <- v G with G = [[c, s], [-s conj(e), c conj(e)]] on (p, q).
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q);
                    a(k, p) = c * akp - s * ce * akq;
                    a(k, q) = s * akp + c * ce * akq;
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q);
                    v(k, p) = c * vkp - s * ce * vkq;
                    v(k, q) = s * vkp + c * ce * vkq;
                }
                // a <- G* a
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k);
                    a(p, k) = c * apk - s * e * aqk;
                    a(q, k) = s * apk + c * e * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }
    if (!converged) {
        throw Error(ErrorCode::NoConvergence, "Jacobi exceeded " + std::to_string(max_sweeps) + " sweeps (n=" +
                                                  std::to_string(n) + ")");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
    HermEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = CMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = a(order[k], order[k]).real();
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
    }
    return out;
}

inline double largest_singular_value(const CMatrix& a) {
    if (a.empty()) return 0.0;
    const CMatrix gram = a.rows() < a.cols() ? a * a.adjoint() : a.adjoint() * a;
    const auto eig = jacobi_eig(gram);
    return std::sqrt(std::max(eig.eigenvalues.back(), 0.0));
}

/// ‖r‖ ≤ rtol·‖a‖ in operator norm. The Frobenius test is a sufficient
/// condition and avoids two eigensolves on the common path.
inline bool relatively_small(const CMatrix& r, const CMatrix& a, double rtol) {
    const double rf = r.frobenius_norm();
    if (rf == 0.0) return true;
    const double n = static_cast<double>(std::max<std::size_t>(1, std::max(a.rows(), a.cols())));
    if (rf <= rtol * a.frobenius_norm() / std::sqrt(n)) return true;
    return largest_singular_value(r) <= rtol * largest_singular_value(a);
}

/// Solves a X = b by Gaussian elimination with partial pivoting.
inline CMatrix solve(CMatrix a, CMatrix b) {
    const std::size_t n = a.rows();
    if (!a.is_square() || b.rows() != n) {
        throw Error(ErrorCode::DimMismatch, "solve with " + a.shape() + " and " + b.shape());
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == cplx(0.0)) throw Error(ErrorCode::SingularInput, "singular system in solve()");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = a(i, k) / a(k, k);
            if (f == cplx(0.0)) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            cplx s = b(k, j);
            for (std::size_t i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
            b(k, j) = s / a(k, k);
        }
    }
    return b;
}

inline void require_square(const CMatrix& a, const char* op) {
    if (!a.is_square()) throw Error(ErrorCode::DimMismatch, std::string(op) + " needs a square matrix, got " + a.shape());
}

} // namespace detail

/// Operator (spectral) norm: the largest singular value.
inline double op_norm(const CMatrix& a) { return detail::largest_singular_value(a); }

inline bool is_hermitian(const CMatrix& a, double rtol) {
    return a.is_square() && detail::relatively_small(a - a.adjoint(), a, rtol);
}

inline bool is_skew_hermitian(const CMatrix& a, double rtol) {
    return a.is_square() && detail::relatively_small(a + a.adjoint(), a, rtol);
}

inline HermEig herm_eig(const CMatrix& a, const Tolerance& tol = {}) {
    detail::require_square(a, "herm_eig");
    if (!is_hermitian(a, tol.recon_rtol)) {
        throw Error(ErrorCode::NotHermitian, "‖A − A*‖ = " + std::to_string(op_norm(a - a.adjoint())) +
                                                 " exceeds recon_rtol·‖A‖");
    }
    return detail::jacobi_eig(a);
}

/// Orthonormal basis of {v : ‖Av‖ ≤ rank_rtol·max(‖A‖, scale_floor)·‖v‖},
/// possibly with zero columns. Hermitian inputs are decided on their own
/// spectrum; everything else goes through the Hermitian dilation
/// [[0, A], [A*, 0]] so small singular values keep full relative accuracy.
///
/// `scale_floor` is for operators with a known natural scale (combinations of
/// projections have scale 1): without it a matrix that is zero up to rounding
/// would be judged against its own noise.
inline CMatrix nullspace(const CMatrix& a, const Tolerance& tol = {}, double scale_floor = 0.0) {
    const std::size_t n = a.cols();
    if (is_hermitian(a, tol.recon_rtol)) {
        const auto eig = detail::jacobi_eig(a);
        double scale = scale_floor;
        for (double l : eig.eigenvalues) scale = std::max(scale, std::abs(l));
        if (scale == 0.0) return CMatrix::identity(n);
        std::vector<std::size_t> keep;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(eig.eigenvalues[k]) <= tol.rank_rtol * scale) keep.push_back(k);
        CMatrix basis(n, keep.size());
        for (std::size_t c = 0; c < keep.size(); ++c)
            for (std::size_t i = 0; i < n; ++i) basis(i, c) = eig.eigenvectors(i, keep[c]);
        return basis;
    }

    const std::size_t m = a.rows();
    CMatrix dil(m + n, m + n);
    dil.set_block(0, m, a);
    dil.set_block(m, 0, a.adjoint());
    const auto eig = detail::jacobi_eig(dil);
    double scale = scale_floor;
    for (double l : eig.eigenvalues) scale = std::max(scale, std::abs(l));
    if (scale == 0.0) return CMatrix::identity(n);
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < m + n; ++k)
        if (std::abs(eig.eigenvalues[k]) <= tol.rank_rtol * scale) keep.push_back(k);
    // The small-eigenvalue space is N(A*) ⊕ N(A); the lower-right block of
    // its projector is exactly the projector onto N(A).
    CMatrix lower(n, keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c)
        for (std::size_t i = 0; i < n; ++i) lower(i, c) = eig.eigenvectors(m + i, keep[c]);
    const auto proj = detail::jacobi_eig(lower * lower.adjoint());
    std::vector<std::size_t> range;
    for (std::size_t k = 0; k < n; ++k)
        if (proj.eigenvalues[k] > 0.5) range.push_back(k);
    CMatrix basis(n, range.size());
    for (std::size_t c = 0; c < range.size(); ++c)
        for (std::size_t i = 0; i < n; ++i) basis(i, c) = proj.eigenvectors(i, range[c]);
    return basis;
}

inline std::size_t nullity(const CMatrix& a, const Tolerance& tol = {}, double scale_floor = 0.0) {
    return nullspace(a, tol, scale_floor).cols();
}

/// Unitary factor V of A = V (A*A)^{1/2}. For Hermitian A this is the
/// spectral sign U sign(Λ) U*, a symmetry (V = V* = V⁻¹).
inline CMatrix polar_unitary(const CMatrix& a, const Tolerance& tol = {}) {
    detail::require_square(a, "polar_unitary");
    const std::size_t n = a.rows();
    if (n == 0) return {};
    if (is_hermitian(a, tol.recon_rtol)) {
        const auto eig = detail::jacobi_eig(a);
        double scale = 0.0;
        double smallest = INFINITY;
        for (double l : eig.eigenvalues) {
            scale = std::max(scale, std::abs(l));
            smallest = std::min(smallest, std::abs(l));
        }
        if (scale == 0.0 || smallest <= tol.rank_rtol * scale) {
            throw Error(ErrorCode::SingularInput, "polar_unitary: smallest |eigenvalue| " + std::to_string(smallest) +
                                                      " at scale " + std::to_string(scale));
        }
        return hermitian_part(eig.apply([](double l) { return cplx(l > 0.0 ? 1.0 : -1.0); }));
    }
    const auto eig = detail::jacobi_eig(a.adjoint() * a);
    const double top = std::sqrt(std::max(eig.eigenvalues.back(), 0.0));
    const double bottom = std::sqrt(std::max(eig.eigenvalues.front(), 0.0));
    if (top == 0.0 || bottom <= tol.rank_rtol * top) {
        throw Error(ErrorCode::SingularInput, "polar_unitary: smallest singular value " + std::to_string(bottom));
    }
    return a * eig.apply([](double l) { return cplx(1.0 / std::sqrt(l)); });
}

/// exp(Z) for skew-Hermitian Z, through the spectrum of the Hermitian −iZ.
inline CMatrix expm_skew(const CMatrix& z, const Tolerance& tol = {}) {
    detail::require_square(z, "expm_skew");
    if (!is_skew_hermitian(z, tol.recon_rtol)) {
        throw Error(ErrorCode::NotSkew, "‖Z + Z*‖ = " + std::to_string(op_norm(z + z.adjoint())));
    }
    const auto eig = detail::jacobi_eig(cplx(0.0, -1.0) * z);
    return eig.apply([](double l) { return std::polar(1.0, l); });
}

struct UnitaryLog {
    CMatrix log;
    /// Some eigenvalue sat within rank_rtol of −1 and was put on the +π branch.
    bool touches_minus_one = false;
    /// Spectrum of −iZ within [−π/2, π/2] (slack 1e−12).
    bool within_half_pi = false;
};

/// Principal logarithm of a unitary: skew-Hermitian Z with e^Z = W and the
/// spectrum of −iZ in (−π, π]. Eigenvalues at −1 go to +π; with
/// `require_interior` they raise LogAtMinusOne instead.
inline UnitaryLog logm_unitary_principal(const CMatrix& w, const Tolerance& tol = {}, bool require_interior = false) {
    detail::require_square(w, "logm_unitary_principal");
    const std::size_t n = w.rows();
    UnitaryLog out;
    if (n == 0) {
        out.within_half_pi = true;
        return out;
    }
    const CMatrix id = CMatrix::identity(n);
    const CMatrix gram = w.adjoint() * w - id;
    if (gram.frobenius_norm() > tol.recon_rtol && op_norm(gram) > tol.recon_rtol) {
        throw Error(ErrorCode::NotUnitary, "‖W*W − I‖ = " + std::to_string(op_norm(gram)));
    }

    // The true eigen-angles are among ±acos(σ(Re W)). Rotate W so that −1
    // sits in the middle of the widest gap of that candidate set; the Cayley
    // transform of the rotated matrix is then well conditioned and its
    // eigenvectors diagonalize W.
    const auto re = detail::jacobi_eig(hermitian_part(w));
    std::vector<double> cand;
    for (double c : re.eigenvalues) {
        const double a = std::acos(std::clamp(c, -1.0, 1.0));
        cand.push_back(a);
        cand.push_back(-a);
    }
    std::sort(cand.begin(), cand.end());
    double gap = cand.front() + 2.0 * std::numbers::pi - cand.back();
    double mid = cand.back() + 0.5 * gap;
    for (std::size_t k = 0; k + 1 < cand.size(); ++k) {
        const double g = cand[k + 1] - cand[k];
        if (g > gap) {
            gap = g;
            mid = cand[k] + 0.5 * g;
        }
    }
    const cplx rot = std::polar(1.0, std::numbers::pi - mid);
    const CMatrix wr = rot * w;
    const CMatrix cayley = hermitian_part(detail::solve(id + wr, cplx(0.0, 1.0) * (id - wr)));
    const auto eig = detail::jacobi_eig(cayley);

    std::vector<double> phase(n);
    double widest = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const CMatrix u = eig.eigenvectors.col(k);
        const cplx lambda = (u.adjoint() * w * u)(0, 0);
        double th = std::atan2(lambda.imag(), lambda.real());
        if (std::abs(lambda + 1.0) <= tol.rank_rtol || th == -std::numbers::pi) {
            th = std::numbers::pi;
            out.touches_minus_one = true;
        }
        phase[k] = th;
        widest = std::max(widest, std::abs(th));
    }
    if (out.touches_minus_one && require_interior) {
        throw Error(ErrorCode::LogAtMinusOne, "eigenvalue at −1: the principal logarithm sits on its branch cut");
    }
    out.log = skew_part(HermEig{phase, eig.eigenvectors}.apply([](double th) { return cplx(0.0, th); }));
    out.within_half_pi = widest <= std::numbers::pi / 2 + 1e-12;
    return out;
}

} // namespace projgeo
