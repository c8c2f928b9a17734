#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "orbitscope/invariants.hpp"
#include "orbitscope/landau.hpp"

namespace orbitscope {

// Coefficients carry an order tag: 0 for generic (bounded away from zero),
// n >= 1 for quantities that vanish like eps^n at a critical parameter value.
// Sums take the smaller tag, products add tags, and division is only allowed
// by tag-0 numbers.

/// Group data shared by every reduction step.
struct ReductionSetup {
    FiniteGroupRep rep;
    IntegrityBasis basis;
    PMatrix pmatrix;
    RationalMatrix eta_inv;

    int k() const noexcept { return basis.size(); }
    std::span<const int> weights() const noexcept { return basis.degrees; }
};

inline ReductionSetup reduction_setup(const FiniteGroupRep& rep, const IntegrityBasis& basis) {
    return ReductionSetup{rep, basis, p_matrix(rep, basis), inverse_metric(rep)};
}

struct PoincareGenerator {
    /// H as a J-space polynomial.
    Polynomial h_poly{0, VariableKind::J};
    /// x-degree of H composed with the basis.
    int degree = 0;
    /// Order tag of the coefficients of H.
    int order = 0;
};

/// A J-space potential at fixed parameter values with an order tag per term.
struct GradedPotential {
    Polynomial psi{0, VariableKind::J};
    std::vector<int> weights;
    std::map<Monomial, int, GrlexGreater> orders;

    int order_of(const Monomial& m) const {
        auto it = orders.find(m);
        return it == orders.end() ? 0 : it->second;
    }
    bool is_generic(const Monomial& m) const { return order_of(m) == 0; }

    Polynomial component(int d) const { return psi.weighted_component(weights, d); }

    std::map<int, Polynomial> components() const {
        std::map<int, Polynomial> out;
        for (const auto& [m, c] : psi.terms()) {
            int d = weighted_degree(m, weights);
            auto it = out.find(d);
            if (it == out.end()) it = out.emplace(d, Polynomial(psi.variable_count(), VariableKind::J)).first;
            it->second.add_term(m, c);
        }
        return out;
    }

    /// Part of the degree-d component with the given order tag.
    Polynomial component_with_order(int d, int order) const {
        Polynomial out(psi.variable_count(), VariableKind::J);
        for (const auto& [m, c] : psi.terms())
            if (weighted_degree(m, weights) == d && order_of(m) == order) out.add_term(m, c);
        return out;
    }
};

/// Tags each term: critical monomials get order 1, the rest order 0.
inline GradedPotential graded_potential(const Polynomial& psi, std::vector<int> weights,
                                        const std::set<Monomial>& critical = {}) {
    if (psi.kind() != VariableKind::J || psi.variable_count() != static_cast<int>(weights.size()))
        throw Error(Errc::DimensionMismatch, "potential does not match the basis size");
    GradedPotential out{psi, std::move(weights), {}};
    for (const auto& [m, c] : psi.terms()) out.orders[m] = critical.count(m) ? 1 : 0;
    return out;
}

/// Potential of a model at the given values. A monomial is critical only when
/// every nonzero contribution to it comes from a critical parameter.
inline GradedPotential graded_potential(const LandauModel& model, const ParameterValues& values) {
    model.psi.check_names(values);
    std::map<Monomial, bool, GrlexGreater> generic;
    for (const auto& [m, c] : model.psi.constant_part().terms()) generic[m] = true;
    for (const auto& [name, part] : model.psi.parts()) {
        auto it = values.find(name);
        if (it == values.end() || it->second == 0) continue;
        bool crit = model.is_critical(name);
        for (const auto& [m, c] : part.terms()) generic[m] = generic[m] || !crit;
    }
    std::set<Monomial> critical;
    for (const auto& [m, g] : generic)
        if (!g) critical.insert(m);
    return graded_potential(model.psi_at(values), model.basis.degrees, critical);
}

// --- first-order operators -------------------------------------------------------

/// delta J_a = sum_b P_ab dH/dJ_b.
inline std::vector<Polynomial> delta_J(const Polynomial& h, const PMatrix& p) {
    const int k = p.size();
    if (h.kind() != VariableKind::J || h.variable_count() != k)
        throw Error(Errc::DimensionMismatch, "generator does not match the P-matrix size");
    std::vector<Polynomial> dh;
    for (int b = 0; b < k; ++b) dh.push_back(h.derivative(b));
    std::vector<Polynomial> out;
    for (int a = 0; a < k; ++a) {
        Polynomial s(k, VariableKind::J);
        for (int b = 0; b < k; ++b)
            if (!dh[static_cast<std::size_t>(b)].is_zero()) s += p(a, b) * dh[static_cast<std::size_t>(b)];
        out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<Polynomial> delta_J(const PoincareGenerator& h, const PMatrix& p) { return delta_J(h.h_poly, p); }

/// (D_a psi) P_ab (D_b H).
inline Polynomial homological_image(const Polynomial& psi_term, const Polynomial& h, const PMatrix& p) {
    psi_term.check_compatible(h);
    const int k = p.size();
    if (psi_term.variable_count() != k) throw Error(Errc::DimensionMismatch, "polynomial does not match the P-matrix");
    auto dj = delta_J(h, p);
    Polynomial out(k, VariableKind::J);
    for (int a = 0; a < k; ++a) {
        Polynomial d = psi_term.derivative(a);
        if (!d.is_zero()) out += d * dj[static_cast<std::size_t>(a)];
    }
    return out;
}

/// U_i = sum_s (d psi / d J_s) P_si.
inline std::vector<Polynomial> u_functions(const Polynomial& psi, const PMatrix& p) {
    const int k = p.size();
    if (psi.kind() != VariableKind::J || psi.variable_count() != k)
        throw Error(Errc::DimensionMismatch, "potential does not match the P-matrix size");
    std::vector<Polynomial> out(static_cast<std::size_t>(k), Polynomial(k, VariableKind::J));
    for (int s = 0; s < k; ++s) {
        Polynomial d = psi.derivative(s);
        if (d.is_zero()) continue;
        for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] += d * p(s, i);
    }
    return out;
}

inline std::vector<Polynomial> u_functions(const GradedPotential& psi, const PMatrix& p) {
    return u_functions(psi.psi, p);
}

/// U_i with the parameter dependence kept: U is linear in psi.
inline std::vector<ParametricPolynomial> u_functions(const ParametricPolynomial& psi, const PMatrix& p) {
    const int k = p.size();
    std::vector<ParametricPolynomial> out(static_cast<std::size_t>(k), ParametricPolynomial(k));
    auto c = u_functions(psi.constant_part(), p);
    for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)].add_constant(c[static_cast<std::size_t>(i)]);
    for (const auto& [name, part] : psi.parts()) {
        auto u = u_functions(part, p);
        for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)].add(name, u[static_cast<std::size_t>(i)]);
    }
    return out;
}

// --- removable subspace ----------------------------------------------------------

struct RemovableSpace {
    int degree = 0;
    /// Lowest x-degree carrying a generic term; its component drives the solve.
    int source_degree = 0;
    int generator_degree = 0;
    /// Reduced images, one per pivot; image i has a nonzero entry at pivots[i]
    /// and zeros at the other pivots.
    std::vector<Polynomial> basis;
    /// generators[i] maps to basis[i] under the homological operator.
    std::vector<Polynomial> generators;
    std::vector<Monomial> pivots;
    /// Rows reachable only through critical coefficients.
    std::vector<Monomial> non_removable;
    std::vector<std::string> constraints;
    /// Divisions by a critical number. Always 0 unless the solver is broken.
    int violations = 0;

    bool empty() const noexcept { return basis.empty(); }
};

namespace detail {

struct Tagged {
    Rational value;
    int order = 0;
};

/// Lowest weight holding a generic nonconstant term; falls back to the lowest
/// nonconstant weight when every term is critical.
inline int source_degree(const GradedPotential& psi) {
    int generic = -1, any = -1;
    for (const auto& [m, c] : psi.psi.terms()) {
        int d = weighted_degree(m, psi.weights);
        if (d == 0) continue;
        if (any < 0 || d < any) any = d;
        if (psi.order_of(m) == 0 && (generic < 0 || d < generic)) generic = d;
    }
    return generic >= 0 ? generic : any;
}

inline std::set<int> order_tags(const GradedPotential& psi, int d) {
    std::set<int> out;
    for (const auto& [m, c] : psi.psi.terms())
        if (weighted_degree(m, psi.weights) == d) out.insert(psi.order_of(m));
    return out;
}

inline Rational divide(const Rational& a, const Tagged& pivot, int& violations) {
    if (pivot.order != 0) ++violations;
    return a / pivot.value;
}

} // namespace detail

/// Removable part of the x-degree `degree` component. Generators of x-degree
/// t = degree - s + 2 act through the degree-s source component.
inline RemovableSpace removable_terms(const GradedPotential& psi, int degree, const PMatrix& p) {
    const int k = p.size();
    RemovableSpace out;
    out.degree = degree;
    out.source_degree = detail::source_degree(psi);
    if (out.source_degree < 0) return out;
    out.generator_degree = degree - out.source_degree + 2;
    if (out.generator_degree < 1) return out;

    const auto rows = monomials_of_weight(psi.weights, degree);
    const auto cols = monomials_of_weight(psi.weights, out.generator_degree);
    if (rows.empty() || cols.empty()) return out;
    std::map<Monomial, std::size_t, GrlexGreater> row_index;
    for (std::size_t i = 0; i < rows.size(); ++i) row_index[rows[i]] = i;

    // M[r][c] with order tags, T[c] = combination of original columns.
    const std::size_t nr = rows.size(), nc = cols.size();
    std::vector<std::vector<std::optional<detail::Tagged>>> mat(nr, std::vector<std::optional<detail::Tagged>>(nc));
    for (std::size_t c = 0; c < nc; ++c) {
        Polynomial hc = Polynomial::monomial(k, VariableKind::J, cols[c]);
        for (int tag : detail::order_tags(psi, out.source_degree)) {
            Polynomial img = homological_image(psi.component_with_order(out.source_degree, tag), hc, p)
                                 .weighted_component(psi.weights, degree);
            for (const auto& [m, v] : img.terms()) {
                auto& cell = mat[row_index.at(m)][c];
                if (!cell)
                    cell = detail::Tagged{v, tag};
                else {
                    cell->value += v;
                    cell->order = std::min(cell->order, tag);
                }
            }
        }
        for (std::size_t r = 0; r < nr; ++r)
            if (mat[r][c] && mat[r][c]->value == 0) mat[r][c].reset();
    }
    std::vector<std::vector<Rational>> t(nc, std::vector<Rational>(nc, Rational(0)));
    for (std::size_t c = 0; c < nc; ++c) t[c][c] = 1;

    std::vector<bool> used(nc, false);
    std::vector<std::pair<std::size_t, std::size_t>> pivots;
    for (std::size_t r = 0; r < nr; ++r) {
        std::optional<std::size_t> pc;
        bool critical_only = false;
        for (std::size_t c = 0; c < nc; ++c) {
            if (used[c] || !mat[r][c]) continue;
            if (mat[r][c]->order == 0) {
                pc = c;
                break;
            }
            critical_only = true;
        }
        if (!pc) {
            if (critical_only) out.non_removable.push_back(rows[r]);
            continue;
        }
        const std::size_t c0 = *pc;
        const detail::Tagged piv = *mat[r][c0];
        used[c0] = true;
        pivots.emplace_back(r, c0);
        out.constraints.push_back("coefficient of " + monomial_name(rows[r]) + " in the image of " +
                                  monomial_name(cols[c0]) + " is " + piv.value.get_str() + " (generic)");
        for (std::size_t c = 0; c < nc; ++c) {
            if (c == c0 || !mat[r][c]) continue;
            const detail::Tagged f{detail::divide(mat[r][c]->value, piv, out.violations), mat[r][c]->order};
            for (std::size_t i = 0; i < nr; ++i) {
                if (!mat[i][c0]) continue;
                Rational delta = f.value * mat[i][c0]->value;
                int delta_order = f.order + mat[i][c0]->order;
                auto& cell = mat[i][c];
                if (!cell)
                    cell = detail::Tagged{-delta, delta_order};
                else {
                    cell->value -= delta;
                    cell->order = std::min(cell->order, delta_order);
                }
                if (cell->value == 0) cell.reset();
            }
            for (std::size_t j = 0; j < nc; ++j) t[c][j] -= f.value * t[c0][j];
        }
    }

    for (const auto& [r, c] : pivots) {
        out.pivots.push_back(rows[r]);
        Polynomial img(k, VariableKind::J), gen(k, VariableKind::J);
        for (std::size_t i = 0; i < nr; ++i)
            if (mat[i][c]) img.add_term(rows[i], mat[i][c]->value);
        for (std::size_t j = 0; j < nc; ++j)
            if (t[c][j] != 0) gen.add_term(cols[j], t[c][j]);
        out.basis.push_back(std::move(img));
        out.generators.push_back(std::move(gen));
    }
    return out;
}

// --- exact composition -------------------------------------------------------------

namespace detail {

/// p(maps) keeping weighted degree <= max_degree; target weights are used
/// for truncation of every intermediate product.
inline Polynomial compose_truncated(const Polynomial& p, const std::vector<Polynomial>& maps,
                                    std::span<const int> target_weights, int max_degree) {
    std::vector<std::vector<Polynomial>> powers(maps.size());
    auto power = [&](std::size_t i, int e) -> const Polynomial& {
        auto& list = powers[i];
        if (list.empty()) list.push_back(maps[i].truncated(target_weights, max_degree));
        while (static_cast<int>(list.size()) < e)
            list.push_back(Polynomial::multiply_truncated(list.back(), list.front(), target_weights, max_degree));
        return list[static_cast<std::size_t>(e - 1)];
    };
    const int nvars = maps.front().variable_count();
    const VariableKind kind = maps.front().kind();
    Polynomial out(nvars, kind);
    for (const auto& [m, c] : p.terms()) {
        Polynomial term = Polynomial::constant(nvars, kind, c);
        for (std::size_t a = 0; a < m.size(); ++a)
            if (m[a] > 0) term = Polynomial::multiply_truncated(term, power(a, m[a]), target_weights, max_degree);
        out += term;
    }
    return out;
}

/// The change x = y + eta~ grad(H o J)(y) as x-space polynomials.
inline std::vector<Polynomial> poincare_displacement(const ReductionSetup& setup, const Polynomial& h) {
    Polynomial hx = substitute_basis(h, setup.basis);
    auto g = gradient(hx);
    const int n = setup.basis.dim;
    std::vector<Polynomial> out;
    for (int i = 0; i < n; ++i) {
        Polynomial s(n, VariableKind::X);
        for (int j = 0; j < n; ++j) {
            const Rational& e = setup.eta_inv(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (e != 0) s += g[static_cast<std::size_t>(j)].scaled(e);
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace detail

/// J_a(y + h(y)) - J_a(y) written in the basis, up to x-degree max_degree.
inline std::vector<Polynomial> exact_delta_J(const ReductionSetup& setup, BasisExpresser& expresser,
                                             const Polynomial& h, int max_degree) {
    const int n = setup.basis.dim;
    auto disp = detail::poincare_displacement(setup, h);
    std::vector<Polynomial> shifted;
    for (int i = 0; i < n; ++i)
        shifted.push_back(Polynomial::variable(n, VariableKind::X, i) + disp[static_cast<std::size_t>(i)]);
    const std::vector<int> unit(static_cast<std::size_t>(n), 1);
    std::vector<Polynomial> out;
    for (const auto& ja : setup.basis.basis) {
        Polynomial diff = detail::compose_truncated(ja, shifted, unit, max_degree) - ja;
        out.push_back(expresser.express(diff));
    }
    return out;
}

/// psi(J + delta J), truncated, with order tags propagated.
inline GradedPotential apply_generator(const GradedPotential& psi, const PoincareGenerator& h,
                                       const ReductionSetup& setup, BasisExpresser& expresser, int max_degree) {
    const int k = setup.k();
    auto dj = exact_delta_J(setup, expresser, h.h_poly, max_degree);
    std::vector<Polynomial> maps;
    for (int a = 0; a < k; ++a) maps.push_back(Polynomial::variable(k, VariableKind::J, a) + dj[static_cast<std::size_t>(a)]);

    GradedPotential out = psi;
    out.psi = psi.psi.truncated(psi.weights, max_degree);
    std::map<Monomial, int, GrlexGreater> tags;
    for (const auto& [m, c] : out.psi.terms()) tags[m] = psi.order_of(m);
    for (const auto& [m, c] : psi.psi.terms()) {
        if (weighted_degree(m, psi.weights) > max_degree) continue;
        Polynomial single = Polynomial::monomial(k, VariableKind::J, m, c);
        Polynomial change = detail::compose_truncated(single, maps, psi.weights, max_degree) - single;
        const int tag = psi.order_of(m) + h.order;
        for (const auto& [mm, cc] : change.terms()) {
            auto it = tags.find(mm);
            if (it == tags.end())
                tags.emplace(mm, tag);
            else
                it->second = std::min(it->second, tag);
        }
        out.psi += change;
    }
    out.orders.clear();
    for (const auto& [m, c] : out.psi.terms()) out.orders[m] = tags.at(m);
    return out;
}

// --- sequential reduction ------------------------------------------------------------

struct ReductionStep {
    int target_degree = 0;
    PoincareGenerator generator;
    RemovableSpace space;
    GradedPotential before;
    GradedPotential after;
    int iterations = 0;
    /// Largest pivot coefficient left by the chord iteration and set to zero.
    double dropped = 0;
};

struct ReductionReport {
    GradedPotential original;
    GradedPotential reduced;
    std::vector<PoincareGenerator> generators;
    /// (x-degree, J-monomial) removed and still absent at the end.
    std::vector<std::pair<int, Monomial>> removed_terms;
    /// Terms removed at their step but recreated by a later generator.
    std::vector<std::pair<int, Monomial>> reintroduced_terms;
    std::vector<std::pair<int, Monomial>> non_removable;
    std::vector<ReductionStep> steps;
    int residual_degree = 0;
    int violations = 0;
};

struct ReduceOptions {
    int max_iterations = 100;
    /// Pivot residuals below tolerance * max|coefficient| end the iteration.
    double tolerance = 1e-30;
    /// Generator coefficients are rounded to multiples of 2^-bits after the
    /// first chord step to keep the rationals small.
    unsigned rounding_bits = 256;
};

namespace detail {

inline Rational dyadic_round(const Rational& q, unsigned bits) {
    Integer scaled = q.get_num() << bits;
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), scaled.get_mpz_t(), q.get_den().get_mpz_t());
    Rational out(r, Integer(1) << bits);
    out.canonicalize();
    return out;
}

inline Rational max_abs_coefficient(const Polynomial& p) {
    Rational out = 0;
    for (const auto& [m, c] : p.terms()) out = std::max(out, Rational(abs(c)));
    return out;
}

} // namespace detail

inline ReductionReport reduce(const GradedPotential& psi, int truncation_degree, const ReductionSetup& setup,
                              const ReduceOptions& options = {}) {
    const int k = setup.k();
    if (psi.psi.kind() != VariableKind::J || psi.psi.variable_count() != k)
        throw Error(Errc::DimensionMismatch, "potential does not match the basis size");
    for (const auto& [m, c] : psi.psi.terms())
        if (weighted_degree(m, psi.weights) == 1)
            throw Error(Errc::InvalidPotential, "potential has a linear term " + monomial_name(m));

    ReductionReport report;
    report.original = psi;
    report.residual_degree = truncation_degree;
    BasisExpresser expresser(setup.basis);

    GradedPotential current = psi;
    current.psi = psi.psi.truncated(psi.weights, truncation_degree);
    for (auto it = current.orders.begin(); it != current.orders.end();)
        it = current.psi.coefficient(it->first) == 0 ? current.orders.erase(it) : std::next(it);

    const int s = detail::source_degree(current);
    std::vector<std::pair<int, Monomial>> targeted;
    if (s > 0) {
        for (int t = 3; t + s - 2 <= truncation_degree; ++t) {
            const int d = t + s - 2;
            RemovableSpace space = removable_terms(current, d, setup.pmatrix);
            report.violations += space.violations;
            for (const auto& m : space.non_removable)
                if (current.psi.coefficient(m) != 0) report.non_removable.emplace_back(d, m);

            auto pivot_residual = [&](const GradedPotential& g) {
                std::vector<Rational> r;
                for (const auto& m : space.pivots) r.push_back(g.psi.coefficient(m));
                return r;
            };
            auto correction = [&](const std::vector<Rational>& r) {
                Polynomial h(k, VariableKind::J);
                for (std::size_t i = 0; i < r.size(); ++i) {
                    if (r[i] == 0) continue;
                    Rational piv = space.basis[i].coefficient(space.pivots[i]);
                    h += space.generators[i].scaled(-r[i] / piv);
                }
                return h;
            };

            std::vector<Rational> r = pivot_residual(current);
            if (std::all_of(r.begin(), r.end(), [](const Rational& q) { return q == 0; })) continue;

            PoincareGenerator gen;
            gen.degree = t;
            gen.order = std::numeric_limits<int>::max();
            for (std::size_t i = 0; i < r.size(); ++i)
                if (r[i] != 0) {
                    gen.order = std::min(gen.order, current.order_of(space.pivots[i]));
                    targeted.emplace_back(d, space.pivots[i]);
                }
            gen.h_poly = correction(r);

            const Rational scale = std::max(Rational(1), detail::max_abs_coefficient(current.psi));
            const Rational bound = scale * Rational(options.tolerance);
            GradedPotential next;
            int iterations = 0;
            double dropped = 0;
            while (true) {
                next = apply_generator(current, gen, setup, expresser, truncation_degree);
                ++iterations;
                auto rr = pivot_residual(next);
                Rational worst = 0;
                for (const auto& q : rr) worst = std::max(worst, Rational(abs(q)));
                if (worst == 0) break;
                if (worst <= bound) {
                    dropped = worst.get_d();
                    for (const auto& m : space.pivots) {
                        next.psi.set_coefficient(m, 0);
                        next.orders.erase(m);
                    }
                    break;
                }
                if (iterations >= options.max_iterations)
                    throw Error(Errc::SingularHomologicalSolve,
                                "homological equation at x-degree " + std::to_string(d) + " did not converge");
                Polynomial h = gen.h_poly + correction(rr);
                Polynomial rounded(k, VariableKind::J);
                for (const auto& [m, c] : h.terms()) rounded.add_term(m, detail::dyadic_round(c, options.rounding_bits));
                gen.h_poly = rounded;
            }

            ReductionStep step;
            step.target_degree = d;
            step.generator = gen;
            step.space = std::move(space);
            step.before = current;
            step.after = next;
            step.iterations = iterations;
            step.dropped = dropped;
            report.steps.push_back(std::move(step));
            report.generators.push_back(gen);
            current = std::move(next);
        }
    }

    for (const auto& [d, m] : targeted) {
        if (current.psi.coefficient(m) == 0)
            report.removed_terms.emplace_back(d, m);
        else
            report.reintroduced_terms.emplace_back(d, m);
    }
    report.reduced = std::move(current);
    return report;
}

inline ReductionReport reduce(const LandauModel& model, const ParameterValues& values, int truncation_degree,
                              const ReduceOptions& options = {}) {
    return reduce(graded_potential(model, values), truncation_degree, reduction_setup(model.rep, model.basis), options);
}

// --- numeric verification -------------------------------------------------------------

struct VerifyOptions {
    int points = 8;
    double radius = 0.5;
    std::uint64_t seed = 7;
    std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
};

struct PointVerification {
    std::vector<long double> point;
    std::vector<long double> residuals;  // one per scale
    /// Least-squares slope of log residual against log scale; +inf when the
    /// residual vanishes identically.
    double slope = std::numeric_limits<double>::infinity();
};

struct VerificationResult {
    std::vector<double> scales;
    std::vector<PointVerification> points;
    double min_slope = std::numeric_limits<double>::infinity();
    int required_slope = 0;
    bool passed = true;
};

namespace detail {

inline double fit_slope(const std::vector<double>& scales, const std::vector<long double>& residuals) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < scales.size(); ++i)
        if (residuals[i] > 0) {
            xs.push_back(std::log(scales[i]));
            ys.push_back(static_cast<double>(std::log(residuals[i])));
        }
    if (xs.size() < 2) return std::numeric_limits<double>::infinity();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

} // namespace detail

/// Composes the recorded changes numerically and compares
/// phi_original(x(y)) with psi_reduced(J(y)) at shrinking scales.
inline VerificationResult verify_reduction(const ReductionSetup& setup, const ReductionReport& report,
                                           const VerifyOptions& options = {}) {
    using Real = long double;
    const int n = setup.basis.dim;
    std::vector<NumericPolynomial<Real>> basis;
    for (const auto& j : setup.basis.basis) basis.emplace_back(j);
    const NumericPolynomial<Real> original(report.original.psi);
    const NumericPolynomial<Real> reduced(report.reduced.psi);
    std::vector<std::vector<NumericPolynomial<Real>>> changes;
    for (const auto& g : report.generators) {
        std::vector<NumericPolynomial<Real>> d;
        for (const auto& p : detail::poincare_displacement(setup, g.h_poly)) d.emplace_back(p);
        changes.push_back(std::move(d));
    }
    auto orbit = [&](const std::vector<Real>& x) {
        std::vector<Real> j;
        for (const auto& b : basis) j.push_back(b(x));
        return j;
    };

    VerificationResult out;
    out.scales = options.scales;
    out.required_slope = report.residual_degree + 1;
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    for (int p = 0; p < options.points; ++p) {
        PointVerification pv;
        double norm = 0;
        for (int i = 0; i < n; ++i) {
            pv.point.push_back(normal(rng));
            norm += static_cast<double>(pv.point.back() * pv.point.back());
        }
        for (auto& v : pv.point) v *= options.radius / std::sqrt(norm);
        for (double s : options.scales) {
            std::vector<Real> y(pv.point);
            for (auto& v : y) v *= s;
            const Real target = reduced(orbit(y));
            for (auto it = changes.rbegin(); it != changes.rend(); ++it) {
                std::vector<Real> x(y);
                for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] += (*it)[static_cast<std::size_t>(i)](y);
                y = std::move(x);
            }
            pv.residuals.push_back(std::fabs(original(orbit(y)) - target));
        }
        pv.slope = detail::fit_slope(options.scales, pv.residuals);
        out.min_slope = std::min(out.min_slope, pv.slope);
        out.points.push_back(std::move(pv));
    }
    out.passed = out.min_slope >= out.required_slope;
    return out;
}

inline std::string values_text(const ParameterValues& values) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [k, v] : values) {
        os << (first ? "" : ", ") << k << "=" << v.get_str();
        first = false;
    }
    os << "}";
    return os.str();
}

/// Checked form: raises VerificationFailed naming the point and slope.
inline VerificationResult check_reduction(const ReductionSetup& setup, const ReductionReport& report,
                                          const VerifyOptions& options = {}, const std::string& label = {}) {
    auto result = verify_reduction(setup, report, options);
    if (!result.passed) {
        const PointVerification* worst = &result.points.front();
        for (const auto& p : result.points)
            if (p.slope < worst->slope) worst = &p;
        std::ostringstream os;
        os << "residual slope " << worst->slope << " below " << result.required_slope;
        if (!label.empty()) os << " at " << label;
        os << " for point (";
        for (std::size_t i = 0; i < worst->point.size(); ++i)
            os << (i ? ", " : "") << static_cast<double>(worst->point[i]);
        os << ")";
        throw Error(Errc::VerificationFailed, os.str());
    }
    return result;
}

struct SampleVerification {
    ParameterValues values;
    ReductionReport report;
    VerificationResult result;
};

/// Reduces and verifies a model at each parameter sample; samples run in
/// parallel, each with its own copy of the group data.
inline std::vector<SampleVerification> verify_reduction(const LandauModel& model,
                                                        const std::vector<ParameterValues>& samples,
                                                        int truncation_degree, const VerifyOptions& options = {},
                                                        const ReduceOptions& reduce_options = {}) {
    std::vector<std::future<SampleVerification>> jobs;
    for (const auto& values : samples)
        jobs.push_back(std::async(std::launch::async, [&model, values, truncation_degree, options, reduce_options] {
            ReductionSetup setup = reduction_setup(model.rep, model.basis);
            SampleVerification out{values, reduce(graded_potential(model, values), truncation_degree, setup, reduce_options), {}};
            out.result = check_reduction(setup, out.report, options, values_text(values));
            return out;
        }));
    std::vector<SampleVerification> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

} // namespace orbitscope
