#include "projgeo/geodesic.hpp"
#include "projgeo/json_io.hpp"
#include "projgeo/projection.hpp"
#include "projgeo/suites.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace projgeo;

constexpr int kExitFailure = 1;
constexpr int kExitNoGeodesic = 2;
constexpr int kExitUsage = 64;

/// Kernel tolerances, with rank_rtol taken from PROJGEO_TOL_RANK when set.
Tolerance kernel_tolerance() {
    Tolerance tol;
    if (const char* env = std::getenv("PROJGEO_TOL_RANK")) {
        try {
            std::size_t used = 0;
            tol.rank_rtol = std::stod(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument(env);
        } catch (const std::exception&) {
            throw Error(ErrorCode::BadTolerance, std::string("PROJGEO_TOL_RANK is not a number: ") + env);
        }
    }
    tol.validate();
    return tol;
}

void emit(const Json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << dump(j);
    } else {
        write_text_file(out, dump(j));
    }
}

std::string format_index(const IndexPair& i) {
    return "(" + std::to_string(i.d_plus) + "," + std::to_string(i.d_minus) + ")";
}

struct GenArgs {
    std::optional<std::size_t> dim;
    std::vector<std::size_t> dims;
    std::vector<std::size_t> ranks;
    std::vector<double> angles;
    std::uint64_t seed = 0;
    std::string out;
};

int run_gen(const GenArgs& a) {
    const Tolerance tol = kernel_tolerance();
    std::optional<std::pair<Projection, Projection>> pair;
    if (!a.dims.empty()) {
        if (!a.ranks.empty()) throw Error(ErrorCode::InconsistentDims, "--dims and --ranks are exclusive");
        if (a.dims.size() != 5) throw Error(ErrorCode::InconsistentDims, "--dims needs five entries m11,m00,m10,m01,generic");
        const HalmosDims d{a.dims[0], a.dims[1], a.dims[2], a.dims[3], a.dims[4]};
        if (a.dim && *a.dim != d.total()) {
            throw Error(ErrorCode::InconsistentDims, "--dim " + std::to_string(*a.dim) + " but --dims sum to " +
                                                         std::to_string(d.total()));
        }
        if (d.total() == 0) throw Error(ErrorCode::InconsistentDims, "--dims sum to zero");
        std::vector<double> angles = a.angles;
        if (angles.empty() && d.generic % 2 == 0) {
            Rng rng(a.seed);
            angles = random_angles(d.generic / 2, rng);
        }
        pair = pair_with_dims(d, angles, a.seed);
    } else if (!a.ranks.empty()) {
        if (!a.dim) throw Error(ErrorCode::InconsistentDims, "--ranks needs --dim");
        if (a.ranks.size() != 2) throw Error(ErrorCode::InconsistentDims, "--ranks needs two entries");
        if (!a.angles.empty()) throw Error(ErrorCode::InconsistentDims, "--angles only applies with --dims");
        pair.emplace(random_projection(*a.dim, a.ranks[0], a.seed), random_projection(*a.dim, a.ranks[1], a.seed + 1));
    } else {
        throw Error(ErrorCode::InconsistentDims, "one of --dims or --ranks is required");
    }

    const auto& [p, q] = *pair;
    const FiveSpace fs = halmos_decompose(p, q, tol);
    const HalmosDims d = fs.dims();
    std::cerr << "dims m11=" << d.m11 << " m00=" << d.m00 << " m10=" << d.m10 << " m01=" << d.m01
              << " generic=" << d.generic << '\n';
    if (d.m10 != d.m01) {
        std::cerr << "warning: index mismatch " << format_index({d.m10, d.m01}) << ", no geodesic joins P and Q\n";
    }
    if (a.out.empty()) {
        std::cout << dump(pair_to_json(p, q));
    } else {
        write_text_file(a.out, dump(pair_to_json(p, q)));
        std::cout << dump(five_space_report(fs));
    }
    return 0;
}

struct GeodesicArgs {
    std::string in;
    std::size_t samples = 200;
    std::string csv;
};

int run_geodesic(const GeodesicArgs& a) {
    const Tolerance tol = kernel_tolerance();
    const auto [p, q] = pair_from_json(read_json_file(a.in));
    const IndexPair idx = index_pair(p, q, tol);
    if (!idx.balanced()) {
        std::cerr << "no geodesic: index " << format_index(idx) << '\n';
        return kExitNoGeodesic;
    }
    const GeodesicSegment seg = minimal_exponent(p, q, std::nullopt, tol);
    const UniquenessReport uniq = unique_minimal_check(p, q, 0, tol);
    const Json report = {{"norm_Z", seg.norm()},
                         {"index", Json::array({idx.d_plus, idx.d_minus})},
                         {"endpoint_error", endpoint_error(seg, q)},
                         {"length_estimate", curve_length(geodesic_curve(seg), a.samples)},
                         {"unique", uniq.unique}};
    std::cout << dump(report);

    if (!a.csv.empty()) {
        const std::size_t n = p.dim();
        std::ostringstream os;
        os << 't';
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) os << ",re_" << i << '_' << j << ",im_" << i << '_' << j;
        os << '\n';
        char buf[32];
        for (std::size_t k = 0; k <= a.samples; ++k) {
            const double t = double(k) / double(a.samples);
            const CMatrix delta = evaluate(seg, t).matrix();
            std::snprintf(buf, sizeof buf, "%.17g", t);
            os << buf;
            for (const cplx& z : delta.data()) {
                std::snprintf(buf, sizeof buf, ",%.17g", z.real());
                os << buf;
                std::snprintf(buf, sizeof buf, ",%.17g", z.imag());
                os << buf;
            }
            os << '\n';
        }
        write_text_file(a.csv, os.str());
    }
    return 0;
}

struct VerifyArgs {
    std::string suite;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    std::optional<double> tol;
    std::string out;
};

int run_verify(const VerifyArgs& a) {
    const auto names = suite_names();
    if (std::find(names.begin(), names.end(), a.suite) == names.end()) {
        std::cerr << "unknown suite '" << a.suite << "'; available:";
        for (const auto& n : names) std::cerr << ' ' << n;
        std::cerr << '\n';
        return kExitUsage;
    }
    SuiteOptions opts;
    opts.trials = a.trials;
    opts.seed = a.seed;
    opts.tol = a.tol;
    opts.kernel = kernel_tolerance();
    const SuiteReport rep = run_suite(a.suite, opts);
    emit(to_json(rep), a.out);
    std::cerr << rep.suite << ": " << rep.trials << " trials, " << rep.failures << " failures, worst residual "
              << rep.worst_residual << '\n';
    return rep.failures == 0 ? 0 : kExitFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesics between orthogonal projections"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a pair of projections");
    gen_cmd->add_option("--dim", gen.dim, "Ambient dimension");
    gen_cmd->add_option("--dims", gen.dims, "Halmos dimensions m11,m00,m10,m01,generic")->delimiter(',');
    gen_cmd->add_option("--ranks", gen.ranks, "Ranks of P and Q for random projections")->delimiter(',');
    gen_cmd->add_option("--angles", gen.angles, "Principal angles of the generic part")->delimiter(',');
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--out", gen.out, "Write the pair here");

    GeodesicArgs geo;
    auto* geo_cmd = app.add_subcommand("geodesic", "Minimal geodesic for a pair file");
    geo_cmd->add_option("--in", geo.in, "Pair file")->required();
    geo_cmd->add_option("--samples", geo.samples, "Steps for the length estimate and CSV")->check(CLI::Range(2, 1'000'000));
    geo_cmd->add_option("--csv", geo.csv, "Write samples of the geodesic here");

    VerifyArgs ver;
    auto* ver_cmd = app.add_subcommand("verify", "Run a verification suite");
    ver_cmd->add_option("--suite", ver.suite, "Suite name")->required();
    ver_cmd->add_option("--trials", ver.trials, "Number of trials");
    ver_cmd->add_option("--seed", ver.seed, "Base seed");
    ver_cmd->add_option("--tol", ver.tol, "Residual tolerance override");
    ver_cmd->add_option("--out", ver.out, "Write the report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen_cmd) return run_gen(gen);
        if (*geo_cmd) return run_geodesic(geo);
        return run_verify(ver);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
