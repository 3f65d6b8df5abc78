#pragma once

#include "projgeo/calkin.hpp"
#include "projgeo/cmatrix.hpp"
#include "projgeo/error.hpp"
#include "projgeo/projection.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace projgeo {

using Json = nlohmann::ordered_json;

/// {"rows": n, "cols": m, "data": [[re, im], ...]}, row-major.
inline Json to_json(const CMatrix& m) {
    Json data = Json::array();
    for (const cplx& z : m.data()) data.push_back(Json::array({z.real(), z.imag()}));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline CMatrix cmatrix_from_json(const Json& j) {
    try {
        const auto rows = j.at("rows").get<std::size_t>();
        const auto cols = j.at("cols").get<std::size_t>();
        const Json& data = j.at("data");
        if (!data.is_array() || data.size() != rows * cols) {
            throw Error(ErrorCode::BadInput, "matrix data has " + std::to_string(data.size()) + " entries, expected " +
                                                 std::to_string(rows * cols));
        }
        std::vector<cplx> v;
        v.reserve(data.size());
        for (const Json& e : data) {
            if (!e.is_array() || e.size() != 2) throw Error(ErrorCode::BadInput, "matrix entry must be [re, im]");
            v.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        return {rows, cols, std::move(v)};
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::BadInput, std::string("malformed matrix: ") + e.what());
    }
}

inline Json pair_to_json(const Projection& p, const Projection& q) {
    return {{"P", to_json(p.matrix())}, {"Q", to_json(q.matrix())}};
}

inline std::pair<Projection, Projection> pair_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("P") || !j.contains("Q")) {
        throw Error(ErrorCode::BadInput, "pair file needs keys \"P\" and \"Q\"");
    }
    Projection p = make_projection(cmatrix_from_json(j["P"]));
    Projection q = make_projection(cmatrix_from_json(j["Q"]));
    require_same_dim(p, q);
    return {std::move(p), std::move(q)};
}

inline Json to_json(const HalmosDims& d) {
    return {{"m11", d.m11}, {"m00", d.m00}, {"m10", d.m10}, {"m01", d.m01}, {"generic", d.generic}};
}

inline Json five_space_report(const FiveSpace& fs) {
    const HalmosDims d = fs.dims();
    return {{"dims", to_json(d)}, {"index", Json::array({d.m10, d.m01})}, {"angles", fs.angles}};
}

inline Json to_json(const BlockOperator& a) {
    Json ex = Json::array();
    for (const auto& b : a.exceptional()) ex.push_back(to_json(b));
    return {{"block_dim", a.block_dim()}, {"exceptional", std::move(ex)}, {"tail", to_json(a.tail())}};
}

inline BlockOperator block_operator_from_json(const Json& j) {
    try {
        std::vector<CMatrix> ex;
        for (const Json& b : j.at("exceptional")) ex.push_back(cmatrix_from_json(b));
        return {j.at("block_dim").get<std::size_t>(), std::move(ex), cmatrix_from_json(j.at("tail"))};
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::BadInput, std::string("malformed block operator: ") + e.what());
    }
}

inline Json to_json(const DiagonalSequence& s) { return {{"prefix", s.prefix}, {"tail_cycle", s.tail_cycle}}; }

inline DiagonalSequence diagonal_sequence_from_json(const Json& j) {
    try {
        DiagonalSequence s{j.at("prefix").get<std::vector<double>>(), j.at("tail_cycle").get<std::vector<double>>()};
        s.validate();
        return s;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::BadInput, std::string("malformed diagonal sequence: ") + e.what());
    }
}

namespace detail {

inline void write_json(std::ostream& os, const Json& j, int indent, int depth) {
    const std::string pad(std::size_t(indent * (depth + 1)), ' ');
    const std::string close(std::size_t(indent * depth), ' ');
    switch (j.type()) {
    case Json::value_t::number_float: {
        const double x = j.get<double>();
        if (!std::isfinite(x)) {
            os << "null";
            break;
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        os << buf;
        break;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            break;
        }
        // Leaf arrays of scalars stay on one line.
        const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
        os << '[';
        bool first = true;
        for (const Json& e : j) {
            os << (first ? "" : ",");
            if (flat) {
                os << (first ? "" : " ");
            } else {
                os << '\n' << pad;
            }
            write_json(os, e, indent, depth + 1);
            first = false;
        }
        if (!flat) os << '\n' << close;
        os << ']';
        break;
    }
    case Json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            break;
        }
        os << '{';
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            os << (first ? "\n" : ",\n") << pad << Json(k).dump() << ": ";
            write_json(os, v, indent, depth + 1);
            first = false;
        }
        os << '\n' << close << '}';
        break;
    }
    default: os << j.dump();
    }
}

} // namespace detail

/// Pretty JSON with every double printed as %.17g, so equal values give
/// byte-identical text and reading back is exact.
inline std::string dump(const Json& j, int indent = 2) {
    std::ostringstream os;
    detail::write_json(os, j, indent, 0);
    os << '\n';
    return os.str();
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::BadInput, "cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::BadInput, path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out || !(out << text)) throw Error(ErrorCode::BadInput, "cannot write " + path);
}

} // namespace projgeo
