#include "projgeo/geodesic.hpp"
#include "projgeo/instances.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace projgeo;

namespace {

constexpr double kPi = std::numbers::pi;
const CMatrix kRot{{0.0, -1.0}, {1.0, 0.0}};

Projection diagp(std::initializer_list<double> d) { return make_projection(CMatrix::diag(d)); }

/// Range of (cos θ, sin θ).
Projection line_at(double th) {
    const double c = std::cos(th), s = std::sin(th);
    return make_projection(CMatrix{{c * c, c * s}, {c * s, s * s}});
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::BadInput;
}

} // namespace

TEST(ExistsGeodesic, Examples) {
    EXPECT_TRUE(exists_geodesic(diagp({1, 0}), diagp({1, 0})));
    EXPECT_FALSE(exists_geodesic(diagp({1, 1, 0}), diagp({1, 0, 0})));
    EXPECT_TRUE(exists_geodesic(diagp({1, 0}), diagp({0, 1})));
    EXPECT_EQ(code_of([] { (void)exists_geodesic(diagp({1}), diagp({1, 0})); }), ErrorCode::DimMismatch);
}

TEST(MinimalExponent, EqualEndpointsGiveZero) {
    const auto [p, q] = pair_with_dims({2, 1, 0, 0, 0}, {}, 4);
    const auto seg = minimal_exponent(p, q);
    EXPECT_LE(op_norm(seg.exponent()), 1e-12);
}

TEST(MinimalExponent, RotationClosedForm) {
    const auto seg = minimal_exponent(diagp({1, 0}), line_at(kPi / 3));
    EXPECT_LE(op_norm(seg.exponent() - (kPi / 3) * kRot), 1e-12);
    EXPECT_NEAR(seg.norm(), kPi / 3, 1e-12);
    EXPECT_TRUE(seg.normalized());
}

TEST(MinimalExponent, OppositeLines) {
    const Projection p = diagp({1, 0});
    const Projection q = diagp({0, 1});
    const auto seg = minimal_exponent(p, q);
    EXPECT_NEAR(seg.norm(), kPi / 2, 1e-12);
    EXPECT_TRUE(seg.normalized());
    EXPECT_LE(endpoint_error(seg, q), 1e-12);
    // e^Z carries N(P)∩R(Q) onto R(P)∩N(Q) up to a phase.
    const CMatrix e = seg.exp_at(1.0);
    EXPECT_NEAR(std::abs(e(0, 1)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(e(1, 0)), 1.0, 1e-12);
}

TEST(MinimalExponent, NoGeodesicOnUnequalIndex) {
    EXPECT_EQ(code_of([] { (void)minimal_exponent(diagp({1, 1, 0}), diagp({1, 0, 0})); }), ErrorCode::NoGeodesic);
}

TEST(GeodesicSegment, RejectsBadExponents) {
    const Projection p = diagp({1, 0});
    EXPECT_EQ(code_of([&] { (void)GeodesicSegment::make(p, CMatrix::identity(2)); }), ErrorCode::NotSkew);
    const CMatrix diag_skew = CMatrix::diag(std::vector<cplx>{cplx(0, 1), 0.0});
    EXPECT_EQ(code_of([&] { (void)GeodesicSegment::make(p, diag_skew); }), ErrorCode::NotCodiagonal);
    const auto big = GeodesicSegment::make(p, 2.0 * kRot);
    EXPECT_FALSE(big.normalized());
}

TEST(Evaluate, RotationFamily) {
    const auto seg = minimal_exponent(diagp({1, 0}), line_at(kPi / 3));
    EXPECT_LE(op_norm(evaluate(seg, 0.0).matrix() - CMatrix::diag({1.0, 0.0})), 1e-11);
    EXPECT_LE(op_norm(evaluate(seg, 1.0).matrix() - line_at(kPi / 3).matrix()), 1e-10);
    EXPECT_LE(op_norm(evaluate(seg, 0.5).matrix() - line_at(kPi / 6).matrix()), 1e-10);
    // Geodesics extend past [0, 1].
    EXPECT_LE(op_norm(evaluate(seg, 1.5).matrix() - line_at(kPi / 2).matrix()), 1e-10);
}

TEST(Velocity, Examples) {
    const auto still = minimal_exponent(diagp({1, 0}), diagp({1, 0}));
    EXPECT_LE(op_norm(velocity(still, 0.3).value), 1e-15);

    const auto seg = minimal_exponent(diagp({1, 0}), line_at(kPi / 3));
    EXPECT_NEAR(op_norm(velocity(seg, 0.0).value), kPi / 3, 1e-12);
}

TEST(Velocity, FiniteDifferenceOracle) {
    Rng rng(2);
    const PairConfig cfg = random_config(rng, 8, true);
    const auto [p, q] = realize(cfg, 2);
    const auto seg = minimal_exponent(p, q);
    const double t = 0.37, h = 1e-5;
    const CMatrix fd = (evaluate(seg, t + h).matrix() - evaluate(seg, t - h).matrix()) * (1.0 / (2 * h));
    const TangentVector v = velocity(seg, t);
    EXPECT_LE(op_norm(fd - v.value), 1e-6);
    const CMatrix& at = v.at.matrix();
    EXPECT_LE(op_norm(v.value - (at * v.value + v.value * at)), 1e-9);
}

TEST(CurveLength, Examples) {
    EXPECT_EQ(curve_length(constant_curve(diagp({1, 0, 0})), 10), 0.0);

    const auto seg = minimal_exponent(diagp({1, 0}), line_at(kPi / 3));
    EXPECT_NEAR(curve_length(geodesic_curve(seg), 1000), kPi / 3, 1e-5);

    const Projection p = diagp({1, 0});
    const Projection q = line_at(kPi / 3);
    const Projection r = line_at(-0.4);
    const double two_leg = curve_length(two_leg_curve(minimal_exponent(p, r), minimal_exponent(r, q)), 2000);
    EXPECT_GE(two_leg, seg.norm() - 1e-9);

    EXPECT_EQ(code_of([&] { (void)curve_length(geodesic_curve(seg), 1); }), ErrorCode::BadInput);
}

TEST(CurveLength, ChordalSumIncreasesWithGrid) {
    const auto seg = minimal_exponent(diagp({1, 0}), line_at(1.2));
    double prev = 0.0;
    for (std::size_t m : {2, 3, 5, 8, 16, 64}) {
        const double len = curve_length(geodesic_curve(seg), m);
        EXPECT_GE(len, prev - 1e-12);
        EXPECT_LE(len, seg.norm() + 1e-12);
        prev = len;
    }
}

TEST(MinimalityCompetitors, IntermediateOnGeodesic) {
    const Projection p = diagp({1, 0});
    const Projection q = line_at(kPi / 3);
    const auto seg = minimal_exponent(p, q);
    for (double s : {0.2, 0.5, 0.9}) {
        EXPECT_NEAR(two_leg_length(p, evaluate(seg, s), q), seg.norm(), 1e-8);
    }
}

TEST(MinimalityCompetitors, RandomIntermediates) {
    const Projection p = diagp({1, 0});
    const Projection q = line_at(kPi / 3);
    for (double len : minimality_competitors(p, q, 50, 9)) EXPECT_GE(len, kPi / 3 - 1e-6);

    Rng rng(8);
    PairConfig cfg;
    cfg.dims = {1, 1, 1, 1, 4};
    cfg.angles = random_angles(2, rng);
    const auto [p8, q8] = realize(cfg, 8);
    const double zmin = minimal_exponent(p8, q8).norm();
    const auto lengths = minimality_competitors(p8, q8, 100, 1);
    ASSERT_EQ(lengths.size(), 100u);
    EXPECT_GE(*std::min_element(lengths.begin(), lengths.end()), zmin - 1e-6);

    EXPECT_EQ(code_of([] { (void)minimality_competitors(diagp({1, 1, 0}), diagp({1, 0, 0}), 1, 0); }),
              ErrorCode::NoGeodesic);
}

TEST(UniqueMinimalCheck, Examples) {
    const auto gen = unique_minimal_check(diagp({1, 0}), line_at(kPi / 3), 3);
    EXPECT_TRUE(gen.unique);
    EXPECT_LE(gen.rederivation_error, 1e-8);

    const auto opp = unique_minimal_check(diagp({1, 0}), diagp({0, 1}));
    EXPECT_FALSE(opp.unique);
    ASSERT_TRUE(opp.witness.has_value());
    EXPECT_GE(op_norm(opp.witness->first - opp.witness->second), 0.1);

    const auto same = unique_minimal_check(diagp({1, 0}), diagp({1, 0}));
    EXPECT_TRUE(same.unique);
    EXPECT_LE(op_norm(minimal_exponent(diagp({1, 0}), diagp({1, 0})).exponent()), 1e-15);
}

TEST(MultiGeodesicFamily, SingleUnitaryIsCanonical) {
    const Projection p = diagp({1, 0});
    const Projection q = diagp({0, 1});
    const auto fam = multi_geodesic_family(p, q, {CMatrix::identity(1)});
    EXPECT_LE(op_norm(fam[0].exponent() - minimal_exponent(p, q).exponent()), 1e-15);
}

TEST(MultiGeodesicFamily, PhaseChangesExponent) {
    const Projection p = diagp({1, 0});
    const Projection q = diagp({0, 1});
    const auto fam = multi_geodesic_family(p, q, {CMatrix::identity(1), CMatrix{{cplx(0.0, 1.0)}}});
    EXPECT_GT(op_norm(fam[0].exponent() - fam[1].exponent()), 0.5);
    for (const auto& s : fam) EXPECT_LE(endpoint_error(s, q), 1e-12);
}

TEST(MultiGeodesicFamily, RandomUnitariesN8) {
    Rng rng(12);
    PairConfig cfg;
    cfg.dims = {1, 1, 2, 2, 2};
    cfg.angles = random_angles(1, rng);
    const auto [p, q] = realize(cfg, 12);
    std::vector<CMatrix> us;
    for (int i = 0; i < 8; ++i) us.push_back(haar_unitary(2, rng));
    const auto fam = multi_geodesic_family(p, q, us);
    ASSERT_EQ(fam.size(), 8u);
    for (std::size_t i = 0; i < fam.size(); ++i) {
        EXPECT_NEAR(fam[i].norm(), kPi / 2, 1e-10);
        EXPECT_LE(endpoint_error(fam[i], q), 1e-9);
        for (std::size_t j = i + 1; j < fam.size(); ++j)
            EXPECT_GT(op_norm(fam[i].exponent() - fam[j].exponent()), 1e-8);
    }
}

TEST(MultiGeodesicFamily, Errors) {
    EXPECT_EQ(code_of([] { (void)multi_geodesic_family(diagp({1, 0}), line_at(0.3), {CMatrix::identity(1)}); }),
              ErrorCode::BadIndex);
    EXPECT_EQ(code_of([] { (void)multi_geodesic_family(diagp({1, 0}), diagp({0, 1}), {CMatrix::identity(2)}); }),
              ErrorCode::BadUnitarySize);
}

TEST(GeodesicProperties, EndpointNormAndCodiagonality) {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Rng rng(seed);
        const PairConfig cfg = random_config(rng, 16, true);
        const auto [p, q] = realize(cfg, seed);
        const auto seg = minimal_exponent(p, q);
        ASSERT_LE(endpoint_error(seg, q), 1e-9) << "seed " << seed;
        ASSERT_LE(seg.norm(), kPi / 2 + 1e-12);
        ASSERT_LE(codiagonal_residual(p.matrix(), seg.exponent()), 1e-9);
        ASSERT_LE(op_norm(seg.exponent() + seg.exponent().adjoint()), 1e-10);
    }
}

TEST(GeodesicProperties, ConstantSpeed) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        const auto [p, q] = realize(random_config(rng, 12, true), seed);
        const auto seg = minimal_exponent(p, q);
        for (int i = 0; i < 10; ++i) {
            const double t = rng.uniform(-1.0, 1.0);
            ASSERT_NEAR(op_norm(velocity(seg, t).value), seg.norm(), 1e-9);
        }
    }
}

TEST(GeodesicProperties, LengthEqualsNorm) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        const auto [p, q] = realize(random_config(rng, 8, true), seed);
        const auto seg = minimal_exponent(p, q);
        const double len = curve_length(geodesic_curve(seg), 2000);
        ASSERT_GE(len, seg.norm() - 1e-4);
        ASSERT_LE(len, seg.norm() + 1e-12);
    }
}

TEST(GeodesicProperties, CloseProjectionsHaveUniqueGeodesic) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 2 + seed % 8;
        const Projection p = random_projection(n, n / 2, seed);
        const Projection q = random_projection(n, n / 2, seed + 555);
        if (op_norm(p.matrix() - q.matrix()) >= 1.0 - 1e-9) continue;
        const auto rep = unique_minimal_check(p, q, seed);
        ASSERT_TRUE(rep.unique);
        ASSERT_LE(rep.rederivation_error, 1e-8);
    }
}

TEST(GeodesicProperties, ConjugationEquivariance) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        PairConfig cfg = random_config(rng, 12, true);
        cfg.dims.m10 = cfg.dims.m01 = 0;
        if (cfg.dims.total() == 0) continue;
        const auto [p, q] = realize(cfg, seed);
        const CMatrix u = haar_unitary(p.dim(), rng);
        const CMatrix ua = u.adjoint();
        const auto z = minimal_exponent(p, q).exponent();
        const auto zc = minimal_exponent(make_projection(hermitian_part(u * p.matrix() * ua)),
                                         make_projection(hermitian_part(u * q.matrix() * ua)))
                            .exponent();
        ASSERT_LE(op_norm(zc - u * z * ua), 1e-8) << "seed " << seed;
    }
}
