// orbitscope command-line front end.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "orbitscope/orbitscope.hpp"

using namespace orbitscope;
using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string command;
    std::string spec;
    int degree_cap = -1;
    int relation_cap = -1;
    int ell = -1;
    int max_order = default_max_order;
    std::vector<std::string> params;
    std::vector<std::string> critical;
    std::string sweep;
    std::uint64_t seed = 1;
    double tol = 1e-8;
    std::string out;
    std::string format = "text";
    int truncation = -1;
    int points = 8;
    std::string x0;
    double t_end = 10.0;
    double dt = 1e-2;
};

/// What a command produces: a nested body and optionally one flat table.
struct Report {
    ojson body = ojson::object();
    std::vector<std::string> columns;
    std::vector<std::vector<ojson>> rows;
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error(Errc::IoError, "sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        out += buf;
    }
    return out;
}

ojson vec_json(const std::vector<double>& v) {
    auto a = ojson::array();
    for (double x : v) a.push_back(x);
    return a;
}

ojson rational_vec_json(const RationalVector& v) {
    auto a = ojson::array();
    for (const auto& q : v) a.push_back(q.get_str());
    return a;
}

std::string label(const Monomial& m) { return monomial_name(m); }

// --- loaded context ---------------------------------------------------------------

struct Context {
    RunConfig cfg;
    std::string spec_text;
    std::string spec_hash;
    GroupSpec spec;
    std::optional<FiniteGroupRep> rep;
};

Context load(const RunConfig& cfg) {
    if (cfg.spec.empty()) throw Error(Errc::InvalidArgument, "--spec is required");
    if (cfg.degree_cap == 0 || cfg.degree_cap < -1) throw Error(Errc::InvalidArgument, "--degree-cap must be positive");
    if (cfg.relation_cap == 0 || cfg.relation_cap < -1)
        throw Error(Errc::InvalidArgument, "--relation-cap must be positive");
    Context ctx;
    ctx.cfg = cfg;
    ctx.spec_text = read_file(cfg.spec);
    ctx.spec_hash = sha256_hex(ctx.spec_text);
    ctx.spec = parse_group_spec(ctx.spec_text);
    return ctx;
}

const FiniteGroupRep& group(Context& ctx) {
    if (!ctx.rep) ctx.rep = make_group(ctx.spec, ctx.cfg.max_order);
    return *ctx.rep;
}

/// MIB, from ORBITSCOPE_CACHE_DIR when a record for the same spec and caps exists.
IntegrityBasis integrity_basis(Context& ctx, bool relations) {
    const auto& rep = group(ctx);
    const char* dir = std::getenv("ORBITSCOPE_CACHE_DIR");
    std::string path;
    if (dir && *dir) {
        std::ostringstream key;
        key << "mib-" << ctx.spec_hash.substr(0, 32) << "-d" << ctx.cfg.degree_cap << "-r"
            << (relations ? std::to_string(ctx.cfg.relation_cap) : std::string("none")) << ".json";
        path = (fs::path(dir) / key.str()).string();
        if (fs::exists(path)) return integrity_basis_from_json(nlohmann::json::parse(read_file(path)));
    }
    IntegrityBasis b = compute_mib(rep, ctx.cfg.degree_cap);
    if (relations) b = with_relations(std::move(b), ctx.cfg.relation_cap);
    if (!path.empty()) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        const std::string tmp = path + ".tmp";
        write_file(tmp, to_json(b).dump(1) + "\n");
        fs::rename(tmp, path, ec);
        if (ec) throw Error(Errc::IoError, "cannot store cache record '" + path + "'");
    }
    return b;
}

ParameterValues parse_params(const std::vector<std::string>& items) {
    ParameterValues out;
    for (const auto& item : items) {
        auto eq = item.rfind('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(Errc::InvalidArgument, "--param expects NAME=VALUE, got '" + item + "'");
        out[item.substr(0, eq)] = parse_rational(item.substr(eq + 1));
    }
    return out;
}

LandauModel model_for(Context& ctx, const IntegrityBasis& basis) {
    std::optional<std::set<std::string>> critical;
    if (!ctx.cfg.critical.empty()) critical = std::set<std::string>(ctx.cfg.critical.begin(), ctx.cfg.critical.end());
    return build_generic(group(ctx), basis, ctx.cfg.ell, critical);
}

ojson params_json(const ParameterValues& values) {
    ojson j = ojson::object();
    for (const auto& [k, v] : values) j[k] = v.get_str();
    return j;
}

ojson type_json(const SymmetryType& t) {
    ojson j;
    j["id"] = t.id;
    j["order"] = t.order();
    j["representative"] = t.representative.members;
    j["conjugates"] = t.conjugates.size();
    j["fix_dim"] = t.fix_dim;
    j["realized"] = t.realized;
    if (t.witness) j["witness"] = rational_vec_json(*t.witness);
    return j;
}

// --- commands -------------------------------------------------------------------------

Report cmd_group(Context& ctx) {
    const auto& rep = group(ctx);
    Report r;
    r.body["name"] = rep.name();
    r.body["dim"] = rep.dim();
    r.body["generators"] = rep.generators().size();
    r.body["order"] = rep.order();

    // Cayley table: Latin square with identity and inverses, associative.
    const int n = rep.order();
    bool latin = true, assoc = true, inverses = true;
    const int e = rep.index_of(RationalMatrix::identity(static_cast<std::size_t>(rep.dim())));
    for (int a = 0; a < n && latin; ++a) {
        std::vector<bool> row(static_cast<std::size_t>(n)), col(static_cast<std::size_t>(n));
        for (int b = 0; b < n; ++b) {
            row[static_cast<std::size_t>(rep.product(a, b))] = true;
            col[static_cast<std::size_t>(rep.product(b, a))] = true;
        }
        for (int b = 0; b < n; ++b) latin = latin && row[static_cast<std::size_t>(b)] && col[static_cast<std::size_t>(b)];
        inverses = inverses && rep.product(a, rep.inverse(a)) == e;
    }
    const int step = n > 64 ? n / 64 : 1;
    for (int a = 0; a < n && assoc; a += step)
        for (int b = 0; b < n && assoc; b += step)
            for (int c = 0; c < n && assoc; c += step)
                assoc = rep.product(rep.product(a, b), c) == rep.product(a, rep.product(b, c));
    r.body["cayley_check"] = latin && assoc && inverses && e >= 0;
    auto subgroups = all_subgroups(rep);
    r.body["subgroups"] = subgroups.size();
    auto types = symmetry_types(rep);
    r.body["subgroup_classes"] = types.size();
    r.body["metric"] = to_json(invariant_metric(rep).eta);

    r.columns = {"element", "order_of_element", "matrix"};
    for (int g = 0; g < n; ++g) {
        int k = 1, p = g;
        while (p != e) {
            p = rep.product(p, g);
            ++k;
        }
        r.rows.push_back({g, k, to_json(rep.matrix(g)).dump()});
    }
    return r;
}

Report cmd_invariants(Context& ctx) {
    const auto& rep = group(ctx);
    IntegrityBasis b = integrity_basis(ctx, true);
    Report r;
    auto molien = molien_series(rep, b.degree_cap);
    r.body["molien"] = molien.coefficients;
    r.body["degree_cap"] = b.degree_cap;
    r.body["searched_degree"] = b.searched_degree;
    r.body["certified_complete"] = b.certified_complete;
    r.body["degrees"] = b.degrees;
    ojson basis = ojson::array();
    r.columns = {"label", "degree", "polynomial"};
    for (int i = 0; i < b.size(); ++i) {
        const std::string name = "J" + std::to_string(i + 1);
        basis.push_back({{"label", name},
                         {"degree", b.degrees[static_cast<std::size_t>(i)]},
                         {"polynomial", to_string(b.basis[static_cast<std::size_t>(i)])}});
        r.rows.push_back({name, b.degrees[static_cast<std::size_t>(i)], to_string(b.basis[static_cast<std::size_t>(i)])});
    }
    r.body["basis"] = basis;
    r.body["relation_cap"] = b.relation_cap;
    ojson rel = ojson::array();
    for (const auto& p : b.relations) rel.push_back(to_string(p) + " = 0");
    r.body["relations"] = rel;
    r.body["coregular"] = is_coregular(b);
    auto p = p_matrix(rep, b);
    ojson pm = ojson::array();
    for (int i = 0; i < p.size(); ++i) {
        ojson row = ojson::array();
        for (int h = 0; h < p.size(); ++h) row.push_back(to_string(p(i, h)));
        pm.push_back(row);
    }
    r.body["p_matrix"] = pm;
    return r;
}

Report cmd_strata(Context& ctx) {
    const auto& rep = group(ctx);
    Report r;
    auto lattice = isotropy_lattice(rep, default_strata_seed);
    ojson types = ojson::array();
    r.columns = {"id", "order", "fix_dim", "realized", "conjugates"};
    for (const auto& t : lattice.types) {
        types.push_back(type_json(t));
        r.rows.push_back({t.id, t.order(), t.fix_dim, t.realized, t.conjugates.size()});
    }
    r.body["types"] = types;
    ojson edges = ojson::array();
    for (const auto& [i, j] : lattice.hasse_edges()) edges.push_back({i, j});
    r.body["hasse_edges"] = edges;
    if (lattice.principal >= 0)
        r.body["principal"] = lattice.principal;
    else
        r.body["principal"] = nullptr;
    ojson rays = ojson::array();
    for (const auto& ray : principal_critical_orbits(lattice.types).rays)
        rays.push_back({{"type", ray.type}, {"direction", rational_vec_json(ray.direction)}});
    r.body["critical_rays"] = rays;
    return r;
}

ojson point_json(const CriticalPoint& p) {
    ojson j;
    j["value"] = p.value;
    j["kind"] = to_string(p.kind);
    j["symmetry"] = p.symmetry;
    j["orbit_size"] = p.orbit_size;
    j["gradient_norm"] = p.gradient_norm;
    j["location"] = vec_json(p.location);
    return j;
}

MinimizeOptions minimize_options(const RunConfig& cfg) {
    MinimizeOptions o;
    o.seed = cfg.seed;
    o.symmetry_tol = cfg.tol;
    return o;
}

Report cmd_landau(Context& ctx) {
    IntegrityBasis b = integrity_basis(ctx, false);
    LandauModel model = model_for(ctx, b);
    ParameterValues values = parse_params(ctx.cfg.params);
    Report r;
    r.body["degree_x"] = model.degree_x;
    ojson coeffs = ojson::array();
    for (const auto& c : model.coefficients)
        coeffs.push_back({{"name", c.name}, {"x_degree", c.x_degree}, {"critical", c.critical}});
    r.body["coefficients"] = coeffs;
    r.body["parameters"] = params_json(values);

    if (!ctx.cfg.sweep.empty()) {
        std::vector<std::string> parts;
        std::stringstream ss(ctx.cfg.sweep);
        for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
        if (parts.size() != 4) throw Error(Errc::InvalidArgument, "--sweep expects NAME:LO:HI:STEPS");
        int steps = 0;
        try {
            steps = std::stoi(parts[3]);
        } catch (const std::exception&) {
            throw Error(Errc::InvalidArgument, "bad step count '" + parts[3] + "'");
        }
        auto grid = linear_grid(parse_rational(parts[1]), parse_rational(parts[2]), steps);
        SweepOptions so;
        so.minimize = minimize_options(ctx.cfg);
        auto diagram = sweep(model, values, parts[0], grid, so);
        r.body["sweep"] = {{"parameter", parts[0]}, {"lo", parts[1]}, {"hi", parts[2]}, {"points", steps}};
        ojson tr = ojson::array();
        for (const auto& t : diagram.transitions)
            tr.push_back({{"from", t.from}, {"to", t.to}, {"lo", t.lo.get_d()}, {"hi", t.hi.get_d()},
                          {"estimate", t.estimate().get_d()}});
        r.body["transitions"] = tr;
        r.columns = {parts[0], "symmetry", "min_value", "minimizer", "error"};
        for (const auto& p : diagram.points) {
            std::string loc;
            for (std::size_t i = 0; i < p.minimizer.size(); ++i) loc += (i ? " " : "") + num(p.minimizer[i]);
            r.rows.push_back({p.parameter.get_d(), p.symmetry, p.min_value, loc, p.error});
        }
        return r;
    }

    auto stab = check_stability(model, values, minimize_options(ctx.cfg).radius);
    r.body["stable"] = stab.stable;
    auto result = minimize(model, values, minimize_options(ctx.cfg));
    r.body["starts"] = result.starts;
    r.body["converged"] = result.converged;
    ojson pts = ojson::array();
    r.columns = {"value", "kind", "symmetry", "orbit_size", "gradient_norm", "location"};
    for (const auto& p : result.points) {
        pts.push_back(point_json(p));
        std::string loc;
        for (std::size_t i = 0; i < p.location.size(); ++i) loc += (i ? " " : "") + num(p.location[i]);
        r.rows.push_back({p.value, to_string(p.kind), p.symmetry, p.orbit_size, p.gradient_norm, loc});
    }
    r.body["critical_points"] = pts;
    r.body["global_symmetry"] = result.global().symmetry;
    return r;
}

Report cmd_reduce(Context& ctx) {
    IntegrityBasis b = integrity_basis(ctx, false);
    LandauModel model = model_for(ctx, b);
    ParameterValues values = parse_params(ctx.cfg.params);
    const int trunc = ctx.cfg.truncation > 0 ? ctx.cfg.truncation : model.degree_x;
    ReductionSetup setup = reduction_setup(model.rep, model.basis);
    auto report = reduce(graded_potential(model, values), trunc, setup);
    VerifyOptions vo;
    vo.seed = ctx.cfg.seed;
    vo.points = ctx.cfg.points;
    auto check = check_reduction(setup, report, vo, values_text(values));

    Report r;
    r.body["parameters"] = params_json(values);
    r.body["truncation"] = trunc;
    r.body["original"] = to_string(report.original.psi);
    r.body["reduced"] = to_string(report.reduced.psi);
    ojson steps = ojson::array();
    for (const auto& s : report.steps) {
        ojson pivots = ojson::array();
        for (const auto& m : s.space.pivots) pivots.push_back(label(m));
        steps.push_back({{"target_degree", s.target_degree},
                         {"generator_degree", s.generator.degree},
                         {"generator", to_string(s.generator.h_poly)},
                         {"pivots", pivots},
                         {"iterations", s.iterations},
                         {"dropped", s.dropped}});
    }
    r.body["steps"] = steps;
    auto pairs = [](const std::vector<std::pair<int, Monomial>>& v) {
        ojson a = ojson::array();
        for (const auto& [d, m] : v) a.push_back({{"degree", d}, {"monomial", label(m)}});
        return a;
    };
    r.body["removed"] = pairs(report.removed_terms);
    r.body["reintroduced"] = pairs(report.reintroduced_terms);
    r.body["non_removable"] = pairs(report.non_removable);
    ojson surviving = ojson::array();
    for (const auto& [m, c] : report.reduced.psi.terms())
        surviving.push_back({{"degree", weighted_degree(m, b.degrees)}, {"monomial", label(m)},
                             {"coefficient", c.get_d()}, {"order", report.reduced.order_of(m)}});
    r.body["surviving"] = surviving;
    r.body["violations"] = report.violations;
    r.body["required_slope"] = check.required_slope;
    r.body["min_slope"] = check.min_slope;

    r.columns = {"point"};
    for (double s : check.scales) r.columns.push_back("residual_s" + num(s));
    r.columns.push_back("slope");
    for (std::size_t i = 0; i < check.points.size(); ++i) {
        std::vector<ojson> row{static_cast<int>(i)};
        for (auto v : check.points[i].residuals) row.push_back(static_cast<double>(v));
        row.push_back(std::isfinite(check.points[i].slope) ? ojson(check.points[i].slope) : ojson("inf"));
        r.rows.push_back(std::move(row));
    }
    return r;
}

Report cmd_flow(Context& ctx) {
    IntegrityBasis b = integrity_basis(ctx, false);
    LandauModel model = model_for(ctx, b);
    ParameterValues values = parse_params(ctx.cfg.params);
    std::vector<double> x0;
    std::stringstream ss(ctx.cfg.x0);
    for (std::string item; std::getline(ss, item, ',');) x0.push_back(parse_rational(item).get_d());
    if (static_cast<int>(x0.size()) != model.rep.dim())
        throw Error(Errc::DimensionMismatch, "--x0 needs " + std::to_string(model.rep.dim()) + " components");
    auto field = gradient_field(model, values);
    auto traj = integrate(field, x0, ctx.cfg.t_end, ctx.cfg.dt);
    auto proj = project_trajectory(b, traj);
    Polynomial psi = model.psi_at(values);
    auto consistency = orbit_space_consistency(b, field, traj, &psi);

    Report r;
    r.body["parameters"] = params_json(values);
    r.body["x0"] = vec_json(x0);
    r.body["t_end"] = ctx.cfg.t_end;
    r.body["dt"] = ctx.cfg.dt;
    r.body["integrator"] = traj.integrator;
    r.body["samples"] = traj.size();
    r.body["refined_steps"] = traj.refined_steps;
    r.body["final_state"] = vec_json(traj.states.back());
    r.body["projection_residual"] = consistency.max_residual;
    r.body["energy_monotone"] = consistency.energy_monotone;

    r.columns = {"t"};
    for (int i = 0; i < model.rep.dim(); ++i) r.columns.push_back("x" + std::to_string(i + 1));
    for (int a = 0; a < b.size(); ++a) r.columns.push_back("J" + std::to_string(a + 1));
    r.columns.push_back("phi");
    auto ev = evaluator(model, values);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::vector<ojson> row{traj.times[i]};
        for (double x : traj.states[i]) row.push_back(x);
        for (double j : proj.j_states[i]) row.push_back(j);
        row.push_back(ev.value(traj.states[i]));
        r.rows.push_back(std::move(row));
    }
    return r;
}

// --- rendering -----------------------------------------------------------------------------

std::string scalar_text(const ojson& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return num(v.get<double>());
    return v.dump();
}

void render_text(std::ostream& os, const ojson& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    for (auto it = v.begin(); it != v.end(); ++it) {
        const auto& x = it.value();
        const bool nested_array =
            x.is_array() && std::any_of(x.begin(), x.end(), [](const ojson& e) { return e.is_structured(); });
        if (x.is_structured() && x.empty()) {
            os << pad << it.key() << ": " << x.dump() << "\n";
        } else if (x.is_object()) {
            os << pad << it.key() << ":\n";
            render_text(os, x, indent + 2);
        } else if (nested_array) {
            os << pad << it.key() << ":\n";
            for (const auto& e : x) {
                if (e.is_object()) {
                    bool first = true;
                    for (auto jt = e.begin(); jt != e.end(); ++jt) {
                        os << pad << (first ? "  - " : "    ") << jt.key() << ": "
                           << (jt.value().is_structured() ? jt.value().dump() : scalar_text(jt.value())) << "\n";
                        first = false;
                    }
                } else {
                    os << pad << "  - " << e.dump() << "\n";
                }
            }
        } else if (x.is_array()) {
            os << pad << it.key() << ": [";
            for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << scalar_text(x[i]);
            os << "]\n";
        } else {
            os << pad << it.key() << ": " << scalar_text(x) << "\n";
        }
    }
}

std::string csv_cell(const ojson& v) {
    std::string s = scalar_text(v);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

std::string render(const Report& r, const ojson& meta, const std::string& format) {
    std::ostringstream os;
    if (format == "json") {
        ojson all;
        all["meta"] = meta;
        all["result"] = r.body;
        if (!r.columns.empty()) {
            ojson rows = ojson::array();
            for (const auto& row : r.rows) rows.push_back(row);
            all["table"] = {{"columns", r.columns}, {"rows", rows}};
        }
        os << all.dump(2) << "\n";
    } else if (format == "csv") {
        for (auto it = meta.begin(); it != meta.end(); ++it)
            os << "# " << it.key() << "=" << (it.value().is_structured() ? it.value().dump() : scalar_text(it.value())) << "\n";
        for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
        os << "\n";
        for (const auto& row : r.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
            os << "\n";
        }
    } else {
        os << "[meta]\n";
        render_text(os, meta, 2);
        os << "[result]\n";
        render_text(os, r.body, 2);
        if (!r.columns.empty()) {
            os << "[table]\n";
            for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "\t" : "  ") << r.columns[i];
            os << "\n";
            for (const auto& row : r.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "  ") << scalar_text(row[i]);
                os << "\n";
            }
        }
    }
    return os.str();
}

ojson meta_for(const Context& ctx) {
    const auto& c = ctx.cfg;
    ojson m;
    m["tool"] = "orbitscope";
    m["version"] = version;
    m["command"] = c.command;
    m["spec"] = fs::path(c.spec).filename().string();
    m["spec_sha256"] = ctx.spec_hash;
    m["seed"] = c.seed;
    m["strata_seed"] = default_strata_seed;
    m["tol"] = c.tol;
    m["degree_cap"] = c.degree_cap;
    m["relation_cap"] = c.relation_cap;
    m["max_order"] = c.max_order;
    if (c.ell > 0) m["ell"] = c.ell;
    if (c.command == "reduce") {
        m["truncation"] = c.truncation;
        m["verify_points"] = c.points;
    }
    if (c.command == "flow") {
        m["t_end"] = c.t_end;
        m["dt"] = c.dt;
    }
    return m;
}

int run(const RunConfig& cfg) {
    Context ctx = load(cfg);
    Report r;
    if (cfg.command == "group")
        r = cmd_group(ctx);
    else if (cfg.command == "invariants")
        r = cmd_invariants(ctx);
    else if (cfg.command == "strata")
        r = cmd_strata(ctx);
    else if (cfg.command == "landau")
        r = cmd_landau(ctx);
    else if (cfg.command == "reduce")
        r = cmd_reduce(ctx);
    else if (cfg.command == "flow")
        r = cmd_flow(ctx);
    else
        throw Error(Errc::InvalidArgument, "unknown command '" + cfg.command + "'");

    const std::string text = render(r, meta_for(ctx), cfg.format);
    if (cfg.out.empty()) {
        std::cout << text;
    } else {
        std::error_code ec;
        fs::create_directories(cfg.out, ec);
        if (ec) throw Error(Errc::IoError, "cannot create '" + cfg.out + "'");
        const std::string ext = cfg.format == "json" ? ".json" : cfg.format == "csv" ? ".csv" : ".txt";
        const auto path = fs::path(cfg.out) / (cfg.command + ext);
        write_file(path.string(), text);
        std::cout << path.string() << "\n";
    }
    return 0;
}

void error_record(const std::string& code, const std::string& message) {
    ojson e;
    e["error"] = {{"code", code}, {"message", message}};
    std::cerr << e.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbitscope: invariant theory and Landau analysis for finite linear groups"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--spec", cfg.spec, "group spec file (JSON)")->required();
        sub->add_option("--degree-cap", cfg.degree_cap, "largest degree searched for basic invariants");
        sub->add_option("--max-order", cfg.max_order, "largest group order accepted");
        sub->add_option("--seed", cfg.seed, "seed for randomized steps");
        sub->add_option("--tol", cfg.tol, "symmetry classification tolerance");
        sub->add_option("--out", cfg.out, "write the report into this directory");
        sub->add_option("--format", cfg.format, "text, json or csv")
            ->check(CLI::IsMember({"text", "json", "csv"}));
    };
    auto model = [&](CLI::App* sub) {
        sub->add_option("--ell", cfg.ell, "top x-degree of the Landau polynomial");
        sub->add_option("--param", cfg.params, "NAME=VALUE, repeatable");
        sub->add_option("--critical", cfg.critical, "coefficient allowed to vanish, repeatable");
    };

    auto* g = app.add_subcommand("group", "order, Cayley check and subgroup count");
    common(g);
    auto* inv = app.add_subcommand("invariants", "Molien series, integrity basis, relations, P-matrix");
    common(inv);
    inv->add_option("--relation-cap", cfg.relation_cap, "largest x-degree searched for relations");
    auto* st = app.add_subcommand("strata", "isotropy lattice and critical rays");
    common(st);
    auto* la = app.add_subcommand("landau", "critical points or a phase diagram");
    common(la);
    model(la);
    la->add_option("--sweep", cfg.sweep, "NAME:LO:HI:STEPS (STEPS grid points)");
    auto* re = app.add_subcommand("reduce", "eliminate removable terms and verify the coordinate change");
    common(re);
    model(re);
    re->add_option("--truncation", cfg.truncation, "x-degree kept in the reduced potential");
    re->add_option("--points", cfg.points, "verification points");
    auto* fl = app.add_subcommand("flow", "integrate the gradient flow");
    common(fl);
    model(fl);
    fl->add_option("--x0", cfg.x0, "initial state, comma separated")->required();
    fl->add_option("--t-end", cfg.t_end, "final time");
    fl->add_option("--dt", cfg.dt, "step size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        error_record("cli.InvalidArgument", e.what());
        return 2;
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();

    try {
        return run(cfg);
    } catch (const Error& e) {
        error_record(e.qualified(), e.detail());
    } catch (const std::exception& e) {
        error_record("cli.Unexpected", e.what());
    }
    return 1;
}
