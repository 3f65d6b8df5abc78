#pragma once

#include "projgeo/calkin.hpp"
#include "projgeo/geodesic.hpp"
#include "projgeo/instances.hpp"
#include "projgeo/json_io.hpp"
#include "projgeo/model_instances.hpp"
#include "projgeo/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace projgeo {

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::size_t dim = 0;
    std::optional<IndexPair> index;
    double norm = 0.0;
    double residual = 0.0;
    bool ok = true;
};

struct SuiteReport {
    std::string suite;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    std::size_t failures = 0;
    double worst_residual = 0.0;
    std::vector<TrialRecord> records;
};

struct SuiteOptions {
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    /// Replaces the suite's residual tolerance.
    std::optional<double> tol;
    Tolerance kernel;
};

namespace detail {

inline constexpr double kHalfPi = std::numbers::pi / 2;

/// Case read off dense truncations to 10, 11 and 12 blocks: a nullity
/// growing by a constant positive step is infinite, a constant one finite.
inline std::optional<DichotomyCase> classify_by_truncation(const BlockOperator& p, const BlockOperator& q,
                                                           const Tolerance& tol) {
    std::vector<long> plus, minus;
    for (std::size_t n : {10u, 11u, 12u}) {
        const CMatrix a = truncate(p, n) - truncate(q, n);
        const CMatrix id = CMatrix::identity(a.rows());
        plus.push_back(long(nullity(a - id, tol, 1.0)));
        minus.push_back(long(nullity(a + id, tol, 1.0)));
    }
    auto grows = [](const std::vector<long>& k) -> std::optional<bool> {
        if (k[1] - k[0] != k[2] - k[1] || k[1] < k[0]) return std::nullopt;
        return k[1] > k[0];
    };
    const auto gp = grows(plus), gm = grows(minus);
    if (!gp || !gm) return std::nullopt;
    if (*gp != *gm) return DichotomyCase::Mixed;
    return *gp ? DichotomyCase::InfiniteInfinite : DichotomyCase::FiniteFinite;
}

inline TrialRecord identities_trial(std::uint64_t seed, const Tolerance&) {
    Rng rng(seed);
    const std::size_t n = rng.index(2, 16);
    const Projection p = random_projection(n, rng.index(0, n), draw_seed(rng));
    const Projection q = random_projection(n, rng.index(0, n), draw_seed(rng));
    const DiffSum ds{p.matrix() - q.matrix(), p.matrix() + q.matrix()};
    TrialRecord r;
    r.dim = n;
    r.norm = op_norm(ds.a);
    r.residual = std::max(ds.sum_of_squares_residual(), ds.factored_residual());
    return r;
}

inline TrialRecord endpoint_trial(std::uint64_t seed, const Tolerance& tol) {
    Rng rng(seed);
    const PairConfig cfg = random_config(rng, 16, true);
    const auto [p, q] = realize(cfg, draw_seed(rng));
    const GeodesicSegment seg = minimal_exponent(p, q, std::nullopt, tol);
    TrialRecord r;
    r.dim = p.dim();
    r.index = index_pair(p, q, tol);
    r.norm = seg.norm();
    r.residual = std::max(endpoint_error(seg, q), codiagonal_residual(p.matrix(), seg.exponent()));
    r.ok = seg.norm() <= kHalfPi + kNormalizedSlack;
    return r;
}

/// 100 two-leg competitors; residual is how far the best one undercuts ‖Z‖.
inline TrialRecord minimality_trial(std::uint64_t seed, const Tolerance& tol) {
    Rng rng(seed);
    const PairConfig cfg = random_config(rng, 8, true);
    const auto [p, q] = realize(cfg, draw_seed(rng));
    const GeodesicSegment seg = minimal_exponent(p, q, std::nullopt, tol);
    const auto lengths = minimality_competitors(p, q, 100, draw_seed(rng), tol);
    TrialRecord r;
    r.dim = p.dim();
    r.index = index_pair(p, q, tol);
    r.norm = seg.norm();
    r.residual = std::max(0.0, seg.norm() - *std::min_element(lengths.begin(), lengths.end()));
    return r;
}

/// Even trials: index (0,0) with b − 1 well conditioned, residual is the
/// rederivation error. Odd trials: index (k,k), eight exponents from the
/// pairing family; residual is the worst endpoint or norm defect, and the
/// trial fails if two of them coincide.
inline TrialRecord uniqueness_trial(std::uint64_t seed, std::size_t trial, const Tolerance& tol) {
    Rng rng(seed);
    PairConfig cfg;
    if (trial % 2 == 0) {
        cfg.dims.m11 = rng.index(0, 3);
        cfg.dims.m00 = rng.index(0, 3);
        const std::size_t blocks = rng.index(cfg.dims.m11 + cfg.dims.m00 == 0 ? 1 : 0, 4);
        cfg.dims.generic = 2 * blocks;
        cfg.angles = random_angles(blocks, rng, kAngleMargin, std::acos(0.1) - kAngleMargin);
    } else {
        cfg = random_config(rng, 12, true);
        if (cfg.dims.m10 == 0) cfg.dims.m10 = cfg.dims.m01 = 1;
    }
    const auto [p, q] = realize(cfg, draw_seed(rng));
    TrialRecord r;
    r.dim = p.dim();
    r.index = index_pair(p, q, tol);
    if (trial % 2 == 0) {
        const UniquenessReport rep = unique_minimal_check(p, q, draw_seed(rng), tol);
        r.norm = minimal_exponent(p, q, std::nullopt, tol).norm();
        r.residual = rep.rederivation_error;
        r.ok = rep.unique;
        return r;
    }
    const std::size_t k = r.index->d_plus;
    std::vector<CMatrix> unitaries;
    for (int j = 0; j < 8; ++j) unitaries.push_back(std::polar(1.0, j * std::numbers::pi / 4) * CMatrix::identity(k));
    const auto family = multi_geodesic_family(p, q, unitaries, tol);
    double worst = 0.0, closest = INFINITY;
    for (std::size_t i = 0; i < family.size(); ++i) {
        worst = std::max({worst, endpoint_error(family[i], q), std::abs(family[i].norm() - kHalfPi)});
        for (std::size_t j = 0; j < i; ++j) {
            closest = std::min(closest, op_norm(family[i].exponent() - family[j].exponent()));
        }
    }
    r.norm = family.front().norm();
    r.residual = worst;
    r.ok = closest > 1e-8;
    return r;
}

/// Dichotomy against dense truncations of random lifts; residual counts
/// disagreements and witness blocks of nonzero index.
inline TrialRecord existence_trial(std::uint64_t seed, const Tolerance& tol) {
    Rng rng(seed);
    const DichotomyCase kinds[] = {DichotomyCase::FiniteFinite, DichotomyCase::InfiniteInfinite, DichotomyCase::Mixed};
    const DichotomyCase kind = kinds[rng.index(0, 2)];
    const std::size_t d = rng.index(kind == DichotomyCase::InfiniteInfinite ? 2 : 1, 6);
    const auto [p, q] = random_tail_pair(d, kind, rng);
    const BlockOperator lp = random_fiber_lift(p, rng.index(0, 4), rng);
    const BlockOperator lq = random_fiber_lift(q, rng.index(0, 4), rng);
    const DichotomyResult res = existence_dichotomy({p.matrix()}, {q.matrix()}, std::pair{lp, lq}, tol);
    TrialRecord r;
    r.dim = d;
    r.index = res.tail_index;
    double bad = 0.0;
    if (res.kind != kind) bad += 1.0;
    if (classify_by_truncation(lp, lq, tol) != res.kind) bad += 1.0;
    if (res.witnesses) {
        const auto& [wp, wq] = *res.witnesses;
        for (std::size_t i = 0; i < wp.exceptional_count() || i < wq.exceptional_count(); ++i) {
            const IndexPair w = index_pair(make_projection(wp.block(i), kModelTol), make_projection(wq.block(i), kModelTol), tol);
            if (!(w == IndexPair{0, 0})) bad += 1.0;
        }
    }
    r.residual = bad;
    return r;
}

/// ‖Z‖ − ‖z‖ over ten fiber choices; any tail mismatch fails the trial.
inline TrialRecord lifting_trial(std::uint64_t seed, const Tolerance&) {
    Rng rng(seed);
    const std::size_t d = rng.index(2, 6);
    const Projection p = random_projection(d, rng.index(1, d - 1), draw_seed(rng));
    const CMatrix z = random_codiagonal(p, rng.uniform(0.0, kHalfPi), rng);
    const double zn = op_norm(z);
    TrialRecord r;
    r.dim = d;
    r.norm = zn;
    for (int fiber = 0; fiber < 10; ++fiber) {
        const BlockOperator lp = random_fiber_lift(p, rng.index(0, 5), rng);
        const BlockOperator zl = lift_geodesic({p.matrix()}, {z}, lp);
        r.residual = std::max(r.residual, std::abs(zl.norm() - zn));
        if (!(quotient(zl).value == z)) r.ok = false;
        for (double t : {0.25, 0.5, 1.0}) {
            if (!(quotient(geodesic_point(lp, zl, t)).value == quotient_geodesic_point({p.matrix()}, {z}, t).value)) {
                r.ok = false;
            }
        }
    }
    return r;
}

/// sup|d + k₀| must equal limsup|d| exactly; residual is the largest
/// amount by which any of 100 zero-tail competitors undercuts it.
inline TrialRecord normlift_trial(std::uint64_t seed, const Tolerance&) {
    Rng rng(seed);
    const DiagonalSequence d = random_diagonal_sequence(rng);
    const DiagonalSequence k = minimal_norm_lift(d);
    const double lim = d.limsup_abs();
    TrialRecord r;
    r.dim = d.prefix.size() + d.tail_cycle.size();
    r.norm = lim;
    r.ok = k.vanishes_at_infinity() && (d + k).sup_abs() == lim;
    for (int c = 0; c < 100; ++c) {
        DiagonalSequence kc{{}, {0.0}};
        kc.prefix.resize(rng.index(0, d.prefix.size() + 3));
        for (auto& x : kc.prefix) x = rng.uniform(-12.0, 12.0);
        r.residual = std::max(r.residual, lim - (d + kc).sup_abs());
    }
    return r;
}

struct SuiteEntry {
    double tolerance;
    std::function<TrialRecord(std::uint64_t, std::size_t, const Tolerance&)> run;
};

inline const std::map<std::string, SuiteEntry>& suite_table() {
    static const std::map<std::string, SuiteEntry> table = {
        {"identities", {1e-11, [](auto s, auto, const auto& t) { return identities_trial(s, t); }}},
        {"endpoint", {1e-9, [](auto s, auto, const auto& t) { return endpoint_trial(s, t); }}},
        {"minimality", {1e-6, [](auto s, auto, const auto& t) { return minimality_trial(s, t); }}},
        {"uniqueness", {1e-8, [](auto s, auto i, const auto& t) { return uniqueness_trial(s, i, t); }}},
        {"existence", {0.0, [](auto s, auto, const auto& t) { return existence_trial(s, t); }}},
        {"lifting", {1e-12, [](auto s, auto, const auto& t) { return lifting_trial(s, t); }}},
        {"normlift", {1e-15, [](auto s, auto, const auto& t) { return normlift_trial(s, t); }}},
    };
    return table;
}

} // namespace detail

inline std::vector<std::string> suite_names() {
    std::vector<std::string> names;
    for (const auto& [name, entry] : detail::suite_table()) names.push_back(name);
    return names;
}

/// Runs `opts.trials` trials, trial i seeded with seed + i. A trial fails
/// when it throws, reports !ok, or its residual exceeds the tolerance.
inline SuiteReport run_suite(const std::string& name, const SuiteOptions& opts) {
    const auto& table = detail::suite_table();
    const auto it = table.find(name);
    if (it == table.end()) throw Error(ErrorCode::BadInput, "unknown suite '" + name + "'");
    opts.kernel.validate();
    SuiteReport rep;
    rep.suite = name;
    rep.trials = opts.trials;
    rep.seed = opts.seed;
    rep.tolerance = opts.tol.value_or(it->second.tolerance);
    if (!(rep.tolerance >= 0.0)) throw Error(ErrorCode::BadTolerance, "suite tolerance must be non-negative");
    for (std::size_t i = 0; i < opts.trials; ++i) {
        TrialRecord r;
        const std::uint64_t s = opts.seed + i;
        try {
            r = it->second.run(s, i, opts.kernel);
        } catch (const Error&) {
            r.ok = false;
            r.residual = INFINITY;
        }
        r.trial = i;
        r.seed = s;
        if (!(r.residual <= rep.tolerance)) r.ok = false;
        if (!r.ok) ++rep.failures;
        rep.worst_residual = std::max(rep.worst_residual, r.residual);
        rep.records.push_back(r);
    }
    return rep;
}

inline Json to_json(const SuiteReport& rep) {
    Json records = Json::array();
    for (const auto& r : rep.records) {
        records.push_back({{"trial", r.trial},
                           {"seed", r.seed},
                           {"dim", r.dim},
                           {"index", r.index ? Json::array({r.index->d_plus, r.index->d_minus}) : Json()},
                           {"norm", r.norm},
                           {"residual", r.residual},
                           {"ok", r.ok}});
    }
    return {{"suite", rep.suite},         {"trials", rep.trials},   {"seed", rep.seed},
            {"tolerance", rep.tolerance}, {"failures", rep.failures}, {"worst_residual", rep.worst_residual},
            {"records", std::move(records)}};
}

} // namespace projgeo
