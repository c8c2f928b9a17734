#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "orbitscope/group.hpp"
#include "orbitscope/invariants.hpp"

namespace orbitscope {

/// Parsed form of a group spec file:
/// {"dim": n, "generators": [[["p/q", ...], ...], ...], "name": "..."}
struct GroupSpec {
    int dim = 0;
    std::vector<RationalMatrix> generators;
    std::string name;
};

namespace detail {

inline Rational json_rational(const nlohmann::json& v) {
    if (v.is_number_integer()) return Rational(std::to_string(v.get<long long>()));
    if (v.is_string()) return parse_rational(v.get<std::string>());
    throw Error(Errc::ParseError, "matrix entries must be integers or \"p/q\" strings, got " + v.dump());
}

inline std::string rational_text(const Rational& q) { return q.get_str(); }

} // namespace detail

inline GroupSpec parse_group_spec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::ParseError, std::string("group spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(Errc::ParseError, "group spec must be a JSON object");
    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<int>() < 1)
        throw Error(Errc::ParseError, "group spec needs a positive integer \"dim\"");
    if (!j.contains("generators") || !j["generators"].is_array())
        throw Error(Errc::ParseError, "group spec needs a \"generators\" array");
    GroupSpec spec;
    spec.dim = j["dim"].get<int>();
    if (j.contains("name")) {
        if (!j["name"].is_string()) throw Error(Errc::ParseError, "\"name\" must be a string");
        spec.name = j["name"].get<std::string>();
    }
    const auto n = static_cast<std::size_t>(spec.dim);
    for (const auto& g : j["generators"]) {
        if (!g.is_array() || g.size() != n)
            throw Error(Errc::DimensionMismatch, "generator must have " + std::to_string(n) + " rows");
        RationalMatrix m(n, n);
        for (std::size_t r = 0; r < n; ++r) {
            if (!g[r].is_array() || g[r].size() != n)
                throw Error(Errc::DimensionMismatch, "generator row must have " + std::to_string(n) + " entries");
            for (std::size_t c = 0; c < n; ++c) m(r, c) = detail::json_rational(g[r][c]);
        }
        spec.generators.push_back(std::move(m));
    }
    return spec;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(Errc::IoError, "write failed for '" + path + "'");
}

inline GroupSpec load_group_spec(const std::string& path) { return parse_group_spec(read_file(path)); }

inline FiniteGroupRep make_group(const GroupSpec& spec, int max_order = default_max_order) {
    if (spec.generators.empty()) return close_generators({RationalMatrix::identity(static_cast<std::size_t>(spec.dim))}, max_order, spec.name);
    return close_generators(spec.generators, max_order, spec.name);
}

inline nlohmann::ordered_json to_json(const RationalMatrix& m) {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(detail::rational_text(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::ordered_json to_json(const GroupSpec& spec) {
    nlohmann::ordered_json j;
    j["dim"] = spec.dim;
    j["generators"] = nlohmann::ordered_json::array();
    for (const auto& g : spec.generators) j["generators"].push_back(to_json(g));
    j["name"] = spec.name;
    return j;
}

// --- integrity basis ---------------------------------------------------------------

inline nlohmann::ordered_json to_json(const IntegrityBasis& b) {
    nlohmann::ordered_json j;
    j["dim"] = b.dim;
    j["degree_cap"] = b.degree_cap;
    j["searched_degree"] = b.searched_degree;
    j["certified_complete"] = b.certified_complete;
    j["degrees"] = b.degrees;
    j["basis"] = nlohmann::ordered_json::array();
    for (const auto& p : b.basis) j["basis"].push_back(to_string(p));
    j["relation_cap"] = b.relation_cap;
    j["relations"] = nlohmann::ordered_json::array();
    for (const auto& p : b.relations) j["relations"].push_back(to_string(p));
    return j;
}

inline IntegrityBasis integrity_basis_from_json(const nlohmann::json& j) {
    try {
        IntegrityBasis b;
        b.dim = j.at("dim").get<int>();
        b.degree_cap = j.at("degree_cap").get<int>();
        b.searched_degree = j.at("searched_degree").get<int>();
        b.certified_complete = j.at("certified_complete").get<bool>();
        b.degrees = j.at("degrees").get<std::vector<int>>();
        for (const auto& p : j.at("basis")) b.basis.push_back(parse_polynomial(p.get<std::string>(), b.dim, VariableKind::X));
        b.relation_cap = j.at("relation_cap").get<int>();
        const int k = b.size();
        for (const auto& p : j.at("relations")) b.relations.push_back(parse_polynomial(p.get<std::string>(), k, VariableKind::J));
        if (b.degrees.size() != b.basis.size()) throw Error(Errc::ParseError, "degree list does not match the basis");
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("malformed integrity basis record: ") + e.what());
    }
}

} // namespace orbitscope
