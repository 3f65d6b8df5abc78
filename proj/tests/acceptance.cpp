#include "projgeo/calkin.hpp"
#include "projgeo/geodesic.hpp"
#include "projgeo/instances.hpp"
#include "projgeo/model_instances.hpp"
#include "projgeo/projection.hpp"
#include "test_util.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>

using namespace projgeo;
using namespace projgeo::testing;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

/// Δ(1) from the Taylor exponential, independent of the spectral path.
double oracle_endpoint_error(const CMatrix& z, const Projection& p, const Projection& q) {
    const CMatrix e = expm_taylor(z);
    return op_norm(e * p.matrix() * e.adjoint() - q.matrix());
}

Outcome endpoint_suite() {
    double worst_end = 0, worst_norm = 0, worst_codiag = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Rng rng(seed);
        const PairConfig cfg = random_config(rng, 16, true);
        const auto [p, q] = realize(cfg, seed);
        const GeodesicSegment seg = minimal_exponent(p, q);
        worst_end = std::max(worst_end, oracle_endpoint_error(seg.exponent(), p, q));
        worst_norm = std::max(worst_norm, op_norm(seg.exponent()));
        worst_codiag = std::max(worst_codiag, codiagonal_residual(p.matrix(), seg.exponent()));
    }
    return {worst_end <= 1e-9 && worst_norm <= kPi / 2 + 1e-12 && worst_codiag <= 1e-9,
            fmt("500 pairs, endpoint %.2e, max norm - pi/2 %.2e, codiagonal %.2e", worst_end, worst_norm - kPi / 2,
                worst_codiag)};
}

Outcome closed_form() {
    double worst_norm = 0, worst_curve = 0;
    for (double th : {kPi / 6, kPi / 4, kPi / 3}) {
        auto line = [](double a) {
            const double c = std::cos(a), s = std::sin(a);
            return CMatrix{{c * c, c * s}, {c * s, s * s}};
        };
        const Projection p = make_projection(line(0.0));
        const Projection q = make_projection(line(th));
        const GeodesicSegment seg = minimal_exponent(p, q);
        worst_norm = std::max(worst_norm, std::abs(seg.norm() - th));
        for (int k = 0; k <= 10; ++k) {
            const double t = k / 10.0;
            worst_curve = std::max(worst_curve, op_norm(evaluate(seg, t).matrix() - line(t * th)));
        }
    }
    return {worst_norm <= 1e-10 && worst_curve <= 1e-10,
            fmt("theta in {pi/6, pi/4, pi/3}, |norm - theta| %.2e, curve %.2e at 11 t", worst_norm, worst_curve)};
}

Outcome minimality() {
    double worst_gap = -INFINITY, worst_len = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const PairConfig cfg = random_config(rng, 8, true);
        const auto [p, q] = realize(cfg, seed);
        const GeodesicSegment seg = minimal_exponent(p, q);
        for (double len : minimality_competitors(p, q, 100, seed * 1000)) {
            worst_gap = std::max(worst_gap, seg.norm() - len);
        }
        worst_len = std::max(worst_len, std::abs(curve_length(geodesic_curve(seg), 2000) - seg.norm()));
    }
    return {worst_gap <= 1e-6 && worst_len <= 1e-4,
            fmt("100 x 100 competitors, max(norm - competitor) %.2e, |chordal length - norm| %.2e", worst_gap,
                worst_len)};
}

Outcome existence() {
    const DichotomyCase kinds[] = {DichotomyCase::FiniteFinite, DichotomyCase::InfiniteInfinite, DichotomyCase::Mixed};
    int bad = 0, counts[3] = {0, 0, 0};
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed + 50'000);
        const DichotomyCase kind = kinds[seed % 3];
        const std::size_t d = rng.index(kind == DichotomyCase::InfiniteInfinite ? 2 : 1, 6);
        const auto [p, q] = random_tail_pair(d, kind, rng);
        const BlockOperator lp = random_fiber_lift(p, rng.index(0, 6), rng);
        const BlockOperator lq = random_fiber_lift(q, rng.index(0, 6), rng);
        const DichotomyResult r = existence_dichotomy({p.matrix()}, {q.matrix()}, std::pair{lp, lq});
        const TruncationVerdict v = truncation_oracle(lp, lq);
        const bool agree = v.kind && *v.kind == r.kind && r.exists == (r.kind != DichotomyCase::Mixed) &&
                           v.plus[2] - v.plus[1] == r.tail_index.d_plus &&
                           v.minus[2] - v.minus[1] == r.tail_index.d_minus;
        if (!agree) ++bad;
        ++counts[int(r.kind)];
    }
    return {bad == 0, fmt("200 instances (FF %d, II %d, Mixed %d), %d disagreements with 12-block truncation", counts[0],
                          counts[1], counts[2], bad)};
}

Outcome uniqueness() {
    double worst_rederive = 0, worst_end = 0, worst_norm = 0, closest = INFINITY;
    int checked = 0;
    for (std::uint64_t seed = 0; checked < 200; ++seed) {
        Rng rng(seed + 70'000);
        PairConfig cfg;
        cfg.dims.m11 = rng.index(0, 3);
        cfg.dims.m00 = rng.index(0, 3);
        const std::size_t blocks = rng.index(cfg.dims.m11 + cfg.dims.m00 == 0 ? 1 : 0, 5);
        cfg.dims.generic = 2 * blocks;
        cfg.angles = random_angles(blocks, rng, kAngleMargin, kPi / 2 - kAngleMargin);
        const auto [p, q] = realize(cfg, seed);
        const CMatrix b1 = p.matrix() + q.matrix() - CMatrix::identity(p.dim());
        // Smallest singular value of b − 1 from its inverse.
        if (rank_gauss(b1) < p.dim()) continue;
        const double smin = 1.0 / op_norm(detail::solve(b1, CMatrix::identity(p.dim())));
        if (smin < 0.1) continue;
        ++checked;
        worst_rederive = std::max(worst_rederive, unique_minimal_check(p, q, seed).rederivation_error);
    }
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed + 90'000);
        PairConfig cfg = random_config(rng, 12, true);
        if (cfg.dims.m10 == 0) cfg.dims.m10 = cfg.dims.m01 = 1 + seed % 3;
        const auto [p, q] = realize(cfg, seed);
        const std::size_t k = cfg.dims.m10;
        std::vector<CMatrix> us;
        for (int j = 0; j < 8; ++j) us.push_back(haar_unitary(k, rng));
        const auto family = multi_geodesic_family(p, q, us);
        for (std::size_t i = 0; i < family.size(); ++i) {
            worst_end = std::max(worst_end, oracle_endpoint_error(family[i].exponent(), p, q));
            worst_norm = std::max(worst_norm, std::abs(op_norm(family[i].exponent()) - kPi / 2));
            for (std::size_t j = 0; j < i; ++j) {
                closest = std::min(closest, op_norm(family[i].exponent() - family[j].exponent()));
            }
        }
    }
    return {worst_rederive <= 1e-8 && worst_end <= 1e-9 && worst_norm <= 1e-10 && closest > 1e-8,
            fmt("200 pairs rederivation %.2e; 50 (k,k) families of 8: endpoint %.2e, |norm - pi/2| %.2e, min "
                "separation %.2e",
                worst_rederive, worst_end, worst_norm, closest)};
}

Outcome lifting() {
    double worst = 0;
    int tail_mismatch = 0, errors = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed + 110'000);
        const std::size_t d = rng.index(2, 6);
        const Projection p = random_projection(d, rng.index(1, d - 1), draw_seed(rng));
        const CMatrix z = random_codiagonal(p, rng.uniform(0.0, kPi / 2), rng);
        const double zn = op_norm(z);
        for (int fiber = 0; fiber < 10; ++fiber) {
            const BlockOperator lp = random_fiber_lift(p, rng.index(0, 6), rng);
            try {
                const BlockOperator zl = lift_geodesic({p.matrix()}, {z}, lp);
                double zmax = 0;
                for (std::size_t i = 0; i <= zl.exceptional_count(); ++i) zmax = std::max(zmax, op_norm(zl.block(i)));
                worst = std::max(worst, std::abs(zmax - zn));
                for (double t : {0.25, 0.5, 1.0}) {
                    const CMatrix e = expm_taylor(t * z);
                    const CMatrix delta_tail = quotient(geodesic_point(lp, zl, t)).value;
                    if (!(delta_tail == quotient_geodesic_point({p.matrix()}, {z}, t).value)) ++tail_mismatch;
                    if (op_norm(delta_tail - e * p.matrix() * e.adjoint()) > 1e-12) ++tail_mismatch;
                }
            } catch (const Error&) {
                ++errors;
            }
        }
    }
    return {worst <= 1e-12 && tail_mismatch == 0 && errors == 0,
            fmt("100 geodesics x 10 fibers, | |Z| - |z| | %.2e, tail mismatches %d, failed lifts %d", worst,
                tail_mismatch, errors)};
}

Outcome normlift() {
    int inexact = 0;
    double worst = -INFINITY;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Rng rng(seed + 130'000);
        const DiagonalSequence d = random_diagonal_sequence(rng);
        const DiagonalSequence k = minimal_norm_lift(d);
        double lim = 0, sup = 0;
        for (double x : d.tail_cycle) lim = std::max(lim, std::abs(x));
        const std::size_t horizon = d.prefix.size() + 4 * d.tail_cycle.size();
        for (std::size_t i = 0; i < horizon; ++i) sup = std::max(sup, std::abs(d.at(i) + k.at(i)));
        if (sup != lim || !k.vanishes_at_infinity()) ++inexact;
        for (int c = 0; c < 100; ++c) {
            std::vector<double> kc(rng.index(0, d.prefix.size() + 3));
            for (auto& x : kc) x = rng.uniform(-12.0, 12.0);
            double s = 0;
            for (std::size_t i = 0; i < horizon + kc.size(); ++i) {
                s = std::max(s, std::abs(d.at(i) + (i < kc.size() ? kc[i] : 0.0)));
            }
            worst = std::max(worst, lim - s);
        }
    }
    return {inexact == 0 && worst <= 1e-15,
            fmt("500 sequences, %d inexact, max(limsup - competitor sup) %.2e", inexact, worst)};
}

Outcome identities() {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed + 150'000);
        const std::size_t n = rng.index(2, 16);
        const CMatrix p = random_projection(n, rng.index(0, n), draw_seed(rng)).matrix();
        const CMatrix q = random_projection(n, rng.index(0, n), draw_seed(rng)).matrix();
        const CMatrix id = CMatrix::identity(n);
        const CMatrix a = p - q, b = p + q;
        worst = std::max({worst, op_norm(a * a + b * b - 2.0 * b), op_norm((b - id) * (b - id) - (id - a) * (id + a))});
    }
    return {worst <= 1e-11, fmt("1000 pairs, worst residual %.2e", worst)};
}

Outcome homomorphism() {
    double worst = 0;
    int norm_violations = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Rng rng(seed + 170'000);
        const std::size_t d = rng.index(1, 6);
        const BlockOperator a = random_block_operator(d, rng.index(0, 6), rng);
        const BlockOperator b = random_block_operator(d, rng.index(0, 6), rng);
        // Block-by-block products of the tails, computed directly.
        CMatrix ab(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) ab(i, j) += a.tail()(i, k) * b.tail()(k, j);
        worst = std::max({worst, (quotient(a * b).value - ab).max_abs(),
                          (quotient(a * b).value - quotient(a).value * quotient(b).value).max_abs(),
                          (quotient(a.adjoint()).value - quotient(a).value.adjoint()).max_abs()});
        double anorm = 0;
        for (std::size_t i = 0; i <= a.exceptional_count(); ++i) anorm = std::max(anorm, op_norm(a.block(i)));
        if (op_norm(quotient(a).value) > anorm) ++norm_violations;
    }
    return {worst <= 1e-13 && norm_violations == 0,
            fmt("500 pairs, worst residual %.2e, norm violations %d", worst, norm_violations)};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const Criterion criteria[] = {
        {1, "endpoint/exponent", endpoint_suite, 30},
        {2, "closed-form rotation", closed_form, 0},
        {3, "minimality", minimality, 120},
        {4, "existence dichotomy", existence, 0},
        {5, "uniqueness", uniqueness, 0},
        {6, "lifting", lifting, 0},
        {7, "norm-minimal lift", normlift, 0},
        {8, "algebraic identities", identities, 0},
        {9, "quotient homomorphism", homomorphism, 0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs > c.budget_s) {
            o.pass = false;
            o.detail += fmt("; over the %.0f s budget", c.budget_s);
        }
        std::printf("[%s] criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d/9 criteria passed\n", 9 - failed);
    return failed == 0 ? 0 : 1;
}
