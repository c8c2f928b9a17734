#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "orbitscope/error.hpp"
#include "orbitscope/group.hpp"
#include "orbitscope/linalg.hpp"
#include "orbitscope/polynomial.hpp"

namespace orbitscope {

/// Coefficients c_d of the Hilbert-Poincare series of the invariant ring.
struct MolienSeries {
    int group_order = 0;
    std::vector<long long> coefficients;  // c_0 .. c_cap
};

/// J_1..J_k with degrees d_1 <= ... <= d_k, plus the relations found so far.
struct IntegrityBasis {
    int dim = 0;
    std::vector<Polynomial> basis;
    std::vector<int> degrees;
    int degree_cap = 0;
    /// Largest degree at which the basis search actually ran.
    int searched_degree = 0;
    /// Set when a completeness certificate ended the search before degree_cap.
    bool certified_complete = false;
    std::vector<Polynomial> relations;
    /// x-degree up to which relations were searched; -1 if never.
    int relation_cap = -1;

    int size() const noexcept { return static_cast<int>(basis.size()); }
};

/// Symmetric k x k matrix of J-space polynomials for <grad J_i, grad J_h>.
struct PMatrix {
    std::vector<std::vector<Polynomial>> entries;

    int size() const noexcept { return static_cast<int>(entries.size()); }
    const Polynomial& operator()(int i, int h) const {
        return entries.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(h));
    }
};

/// Scales to coprime integer coefficients with a positive leading coefficient.
inline Polynomial make_primitive(const Polynomial& p) {
    if (p.is_zero()) return p;
    RationalVector coeffs;
    for (const auto& [m, c] : p.terms()) coeffs.push_back(c);
    RationalVector scaled = primitive(coeffs);
    Rational factor = scaled.front() / coeffs.front();
    return p.scaled(factor);
}

/// Group averaging with per-element power caches of the substituted linear forms.
class ReynoldsOperator {
public:
    explicit ReynoldsOperator(const FiniteGroupRep& rep) : rep_(&rep) {
        const int n = rep.dim();
        for (const auto& g : rep.elements()) {
            std::vector<Polynomial> forms;
            for (int i = 0; i < n; ++i) {
                Polynomial form(n, VariableKind::X);
                for (int j = 0; j < n; ++j) {
                    const auto& c = g.matrix(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
                    if (c == 0) continue;
                    Monomial m(static_cast<std::size_t>(n), 0);
                    m[static_cast<std::size_t>(j)] = 1;
                    form.add_term(std::move(m), c);
                }
                forms.push_back(std::move(form));
            }
            caches_.emplace_back(std::move(forms));
        }
    }

    Polynomial apply(const Polynomial& p) {
        if (p.kind() != VariableKind::X || p.variable_count() != rep_->dim())
            throw Error(Errc::DimensionMismatch, "Reynolds operator needs an x-space polynomial of matching dimension");
        Polynomial sum(rep_->dim(), VariableKind::X);
        for (auto& cache : caches_) sum += substitute(p, cache, rep_->dim(), VariableKind::X);
        return sum.scaled(Rational(1, rep_->order()));
    }

private:
    const FiniteGroupRep* rep_;
    std::vector<PowerCache> caches_;
};

inline Polynomial reynolds(const FiniteGroupRep& rep, const Polynomial& p) {
    ReynoldsOperator op(rep);
    return op.apply(p);
}

inline bool is_invariant(const FiniteGroupRep& rep, const Polynomial& p) {
    if (p.kind() != VariableKind::X || p.variable_count() != rep.dim()) return false;
    for (const auto& g : rep.generators())
        if (!(act(g, p) == p)) return false;
    return true;
}

/// (1/|G|) sum_g 1/det(I - t T_g), expanded exactly up to degree_cap.
inline MolienSeries molien_series(const FiniteGroupRep& rep, int degree_cap) {
    if (degree_cap < 0) throw Error(Errc::DimensionMismatch, "degree_cap must be non-negative");
    const auto len = static_cast<std::size_t>(degree_cap) + 1;
    std::vector<Rational> total(len, Rational(0));
    std::map<RationalVector, std::vector<Rational>> memo;
    for (const auto& g : rep.elements()) {
        RationalVector den = det_one_minus_t(g.matrix);
        auto it = memo.find(den);
        if (it == memo.end()) {
            // power series inverse of den (den[0] = 1)
            std::vector<Rational> inv(len, Rational(0));
            inv[0] = 1;
            for (std::size_t d = 1; d < len; ++d) {
                Rational acc = 0;
                for (std::size_t j = 1; j < den.size() && j <= d; ++j) acc -= den[j] * inv[d - j];
                inv[d] = acc;
            }
            it = memo.emplace(den, std::move(inv)).first;
        }
        for (std::size_t d = 0; d < len; ++d) total[d] += it->second[d];
    }
    MolienSeries out;
    out.group_order = rep.order();
    for (auto& c : total) {
        c /= rep.order();
        if (c.get_den() != 1) throw Error(Errc::NotInvariant, "non-integral Molien coefficient");
        out.coefficients.push_back(c.get_num().get_si());
    }
    return out;
}

namespace detail {

using MonomialEchelon = SparseEchelon<Monomial, GrlexGreater>;

inline MonomialEchelon::Vector as_vector(const Polynomial& p) {
    return MonomialEchelon::Vector(p.terms().begin(), p.terms().end());
}

inline Polynomial from_vector(const MonomialEchelon::Vector& v, int nvars, VariableKind kind) {
    Polynomial p(nvars, kind);
    for (const auto& [m, c] : v) p.add_term(m, c);
    return p;
}

/// Memoised products J^m of basis polynomials.
class JProducts {
public:
    JProducts(std::vector<Polynomial> basis, int dim) : basis_(std::move(basis)), dim_(dim) {}

    const Polynomial& get(const Monomial& m) {
        auto it = cache_.find(m);
        if (it != cache_.end()) return it->second;
        std::size_t a = 0;
        while (a < m.size() && m[a] == 0) ++a;
        Polynomial value = Polynomial::constant(dim_, VariableKind::X, 1);
        if (a < m.size()) {
            Monomial rest = m;
            --rest[a];
            value = get(rest) * basis_[a];
        }
        return cache_.emplace(m, std::move(value)).first->second;
    }

private:
    std::vector<Polynomial> basis_;
    int dim_;
    std::map<Monomial, Polynomial> cache_;
};

inline std::vector<int> basis_weights(const IntegrityBasis& b) { return b.degrees; }

} // namespace detail

/// Basis of the degree-d invariants: Reynolds images of the degree-d monomials
/// (canonical order), keeping a maximal independent subset; each primitive.
inline std::vector<Polynomial> invariant_space_basis(const FiniteGroupRep& rep, int d, ReynoldsOperator& op) {
    if (d < 0) throw Error(Errc::DimensionMismatch, "degree must be non-negative");
    std::vector<Polynomial> out;
    detail::MonomialEchelon echelon;
    for (const auto& m : monomials_of_degree(rep.dim(), d)) {
        Polynomial img = op.apply(Polynomial::monomial(rep.dim(), VariableKind::X, m));
        if (img.is_zero()) continue;
        if (echelon.insert(detail::as_vector(img)).independent) out.push_back(make_primitive(img));
    }
    return out;
}

inline std::vector<Polynomial> invariant_space_basis(const FiniteGroupRep& rep, int d) {
    ReynoldsOperator op(rep);
    return invariant_space_basis(rep, d, op);
}

namespace detail {

inline std::size_t jacobian_rank(const std::vector<Polynomial>& polys, int dim) {
    if (polys.empty()) return 0;
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<int> pick(-97, 97);
    std::size_t best = 0;
    for (int attempt = 0; attempt < 3 && best < polys.size(); ++attempt) {
        RationalVector point;
        for (int i = 0; i < dim; ++i) point.push_back(Rational(pick(rng)));
        RationalMatrix jac(polys.size(), static_cast<std::size_t>(dim));
        for (std::size_t a = 0; a < polys.size(); ++a)
            for (int i = 0; i < dim; ++i) jac(a, static_cast<std::size_t>(i)) = polys[a].derivative(i).evaluate(point);
        best = std::max(best, rank(jac));
    }
    return best;
}

/// True when J_1..J_n (n = dim) are algebraically independent and the Molien
/// series equals prod 1/(1 - t^{d_i}); then they generate all invariants.
inline bool polynomial_ring_certificate(const FiniteGroupRep& rep, const std::vector<Polynomial>& basis,
                                        const std::vector<int>& degrees) {
    const int n = rep.dim();
    if (static_cast<int>(basis.size()) != n) return false;
    if (jacobian_rank(basis, n) != static_cast<std::size_t>(n)) return false;
    int bound = n * rep.order();
    for (int d : degrees) bound += d;
    MolienSeries m = molien_series(rep, bound);
    // series of prod 1/(1 - t^{d_i})
    std::vector<long long> series(static_cast<std::size_t>(bound) + 1, 0);
    series[0] = 1;
    for (int d : degrees)
        for (std::size_t j = static_cast<std::size_t>(d); j < series.size(); ++j) series[j] += series[j - static_cast<std::size_t>(d)];
    return series == m.coefficients;
}

} // namespace detail

/// Degree-by-degree search for a minimal integrity basis.
///
/// At each degree the products of already chosen basic invariants are reduced
/// out of the invariant space; what remains (fully reduced, primitive) becomes
/// new basic invariants. degree_cap defaults to |G| (Noether's bound).
inline IntegrityBasis compute_mib(const FiniteGroupRep& rep, int degree_cap = -1) {
    if (degree_cap < 0) degree_cap = rep.order();
    const int n = rep.dim();
    IntegrityBasis out;
    out.dim = n;
    out.degree_cap = degree_cap;
    ReynoldsOperator op(rep);
    MolienSeries molien = molien_series(rep, std::max(degree_cap, std::min(rep.order(), 2 * degree_cap)));

    auto generated_rank = [&](int d, detail::MonomialEchelon& echelon) {
        detail::JProducts products(out.basis, n);
        std::vector<int> weights = out.degrees;
        if (!weights.empty())
            for (const auto& m : monomials_of_weight(weights, d))
                echelon.insert(detail::as_vector(products.get(m)));
        return static_cast<long long>(echelon.rank());
    };

    for (int d = 1; d <= degree_cap; ++d) {
        out.searched_degree = d;
        const long long target = molien.coefficients[static_cast<std::size_t>(d)];
        detail::MonomialEchelon echelon;
        if (generated_rank(d, echelon) < target) {
            const auto product_pivots = echelon.pivots();
            for (const auto& m : monomials_of_degree(n, d)) {
                if (static_cast<long long>(echelon.rank()) == target) break;
                Polynomial img = op.apply(Polynomial::monomial(n, VariableKind::X, m));
                if (!img.is_zero()) echelon.insert(detail::as_vector(img));
            }
            // Rows of the reduced echelon form whose pivot is not a pivot of the
            // product span are already in normal form modulo that span.
            for (const auto& key : echelon.pivots()) {
                if (std::binary_search(product_pivots.begin(), product_pivots.end(), key, GrlexGreater{})) continue;
                out.basis.push_back(
                    make_primitive(detail::from_vector(echelon.row_for_pivot(key), n, VariableKind::X)));
                out.degrees.push_back(d);
            }
        }
        if (detail::polynomial_ring_certificate(rep, out.basis, out.degrees)) {
            out.certified_complete = true;
            break;
        }
    }

    if (!out.certified_complete && degree_cap < rep.order()) {
        // probe beyond the cap for invariants the basis cannot produce
        const int probe_end = std::min(rep.order(), 2 * degree_cap);
        for (int d = degree_cap + 1; d <= probe_end; ++d) {
            detail::MonomialEchelon echelon;
            if (generated_rank(d, echelon) < molien.coefficients[static_cast<std::size_t>(d)])
                throw Error(Errc::CapTooLow, "degree_cap " + std::to_string(degree_cap) +
                                                 " misses invariants of degree " + std::to_string(d));
        }
    }
    return out;
}

/// Generators of the relation ideal of the basis, found degree by degree (in
/// x-degree) as kernel vectors of substitution modulo multiples of earlier ones.
inline std::vector<Polynomial> find_relations(const IntegrityBasis& basis, int relation_degree_cap = -1) {
    if (basis.basis.empty()) return {};
    if (relation_degree_cap < 0) relation_degree_cap = 2 * basis.degrees.back();
    const int k = basis.size();
    detail::JProducts products(basis.basis, basis.dim);
    std::vector<Polynomial> relations;
    for (int d = 1; d <= relation_degree_cap; ++d) {
        auto mons = monomials_of_weight(basis.degrees, d);
        detail::MonomialEchelon image;
        std::vector<Polynomial> kernel;
        for (std::size_t i = 0; i < mons.size(); ++i) {
            auto ins = image.insert(detail::as_vector(products.get(mons[i])));
            if (ins.independent) continue;
            Polynomial r(k, VariableKind::J);
            for (const auto& [idx, c] : ins.kernel) r.add_term(mons[idx], c);
            kernel.push_back(std::move(r));
        }
        if (kernel.empty()) continue;
        // ideal generated by earlier relations, in this degree
        detail::MonomialEchelon ideal;
        for (const auto& r : relations) {
            int rd = weighted_degree(r.terms().begin()->first, basis.degrees);
            if (rd >= d) continue;
            for (const auto& m : monomials_of_weight(basis.degrees, d - rd))
                ideal.insert(detail::as_vector(r * Polynomial::monomial(k, VariableKind::J, m)));
        }
        std::vector<Polynomial> fresh;
        for (const auto& r : kernel) {
            auto red = ideal.reduce(detail::as_vector(r));
            if (red.residual.empty()) continue;
            ideal.insert(red.residual);
            fresh.push_back(detail::from_vector(red.residual, k, VariableKind::J));
        }
        for (auto& f : fresh) relations.push_back(make_primitive(f));
    }
    return relations;
}

inline IntegrityBasis with_relations(IntegrityBasis basis, int relation_degree_cap = -1) {
    if (relation_degree_cap < 0) relation_degree_cap = basis.degrees.empty() ? 0 : 2 * basis.degrees.back();
    basis.relations = find_relations(basis, relation_degree_cap);
    basis.relation_cap = relation_degree_cap;
    return basis;
}

/// True iff no relation was found up to basis.relation_cap.
inline bool is_coregular(const IntegrityBasis& basis) {
    if (basis.relation_cap < 0) throw Error(Errc::NotExpressible, "relations have not been computed");
    return basis.relations.empty();
}

/// Writes invariant polynomials in the basic invariants, caching one echelon
/// per degree. Among non-unique answers the canonical one uses only pivot
/// J-monomials (taken in canonical order).
class BasisExpresser {
public:
    explicit BasisExpresser(const IntegrityBasis& basis) : basis_(&basis), products_(basis.basis, basis.dim) {}

    Polynomial express(const Polynomial& p) {
        if (p.kind() != VariableKind::X || p.variable_count() != basis_->dim)
            throw Error(Errc::DimensionMismatch, "expected an x-space polynomial of matching dimension");
        const int k = basis_->size();
        Polynomial out(k, VariableKind::J);
        if (p.is_zero()) return out;
        for (int d = 0; d <= p.degree(); ++d) {
            Polynomial comp = p.homogeneous_component(d);
            if (comp.is_zero()) continue;
            Level& level = level_for(d);
            auto red = level.echelon.reduce(detail::as_vector(comp));
            if (!red.residual.empty())
                throw Error(Errc::NotExpressible, "degree-" + std::to_string(d) +
                                                      " component is not in the algebra generated by the basis");
            for (const auto& [idx, c] : red.used) out.add_term(level.monomials[idx], c);
        }
        return out;
    }

private:
    struct Level {
        std::vector<Monomial> monomials;
        detail::MonomialEchelon echelon;
    };

    Level& level_for(int d) {
        auto it = levels_.find(d);
        if (it != levels_.end()) return it->second;
        Level level;
        if (d == 0)
            level.monomials.push_back(Monomial(static_cast<std::size_t>(basis_->size()), 0));
        else if (!basis_->degrees.empty())
            level.monomials = monomials_of_weight(basis_->degrees, d);
        for (const auto& m : level.monomials) level.echelon.insert(detail::as_vector(products_.get(m)));
        return levels_.emplace(d, std::move(level)).first->second;
    }

    const IntegrityBasis* basis_;
    detail::JProducts products_;
    std::map<int, Level> levels_;
};

inline Polynomial express_in_basis(const FiniteGroupRep& rep, const IntegrityBasis& basis, const Polynomial& p) {
    if (p.kind() != VariableKind::X || p.variable_count() != rep.dim())
        throw Error(Errc::DimensionMismatch, "expected an x-space polynomial of matching dimension");
    if (!is_invariant(rep, p)) throw Error(Errc::NotInvariant, "polynomial is not invariant: " + to_string(p));
    BasisExpresser expresser(basis);
    return expresser.express(p);
}

/// J_a(x) composed into an x-space polynomial.
inline Polynomial substitute_basis(const Polynomial& psi, const IntegrityBasis& basis) {
    if (psi.kind() != VariableKind::J || psi.variable_count() != basis.size())
        throw Error(Errc::DimensionMismatch, "J-space polynomial does not match the basis size");
    if (basis.basis.empty()) return Polynomial(basis.dim, VariableKind::X);
    return substitute(psi, basis.basis);
}

/// eta~_{ab} d_a J_i d_b J_h as an x-space polynomial, eta~ = inverse metric.
inline Polynomial metric_gradient_product(const Polynomial& ji, const Polynomial& jh, const RationalMatrix& eta_inv) {
    auto gi = gradient(ji);
    auto gh = gradient(jh);
    Polynomial out(ji.variable_count(), VariableKind::X);
    for (std::size_t a = 0; a < gi.size(); ++a)
        for (std::size_t b = 0; b < gh.size(); ++b)
            if (eta_inv(a, b) != 0) out += (gi[a] * gh[b]).scaled(eta_inv(a, b));
    return out;
}

inline RationalMatrix inverse_metric(const FiniteGroupRep& rep) {
    auto inv = inverse(invariant_metric(rep).eta);
    if (!inv) throw Error(Errc::NonInvertibleGenerator, "averaged metric is singular");
    return *inv;
}

inline PMatrix p_matrix(const FiniteGroupRep& rep, const IntegrityBasis& basis) {
    const RationalMatrix eta_inv = inverse_metric(rep);
    BasisExpresser expresser(basis);
    const auto k = static_cast<std::size_t>(basis.size());
    PMatrix out;
    out.entries.assign(k, std::vector<Polynomial>(k, Polynomial(basis.size(), VariableKind::J)));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t h = i; h < k; ++h) {
            Polynomial prod = metric_gradient_product(basis.basis[i], basis.basis[h], eta_inv);
            Polynomial entry = expresser.express(prod);
            out.entries[i][h] = entry;
            out.entries[h][i] = entry;
        }
    return out;
}

inline RationalVector orbit_map(const IntegrityBasis& basis, const RationalVector& x) {
    if (static_cast<int>(x.size()) != basis.dim) throw Error(Errc::DimensionMismatch, "point dimension");
    RationalVector out;
    for (const auto& j : basis.basis) out.push_back(j.evaluate(x));
    return out;
}

inline std::vector<double> orbit_map(const IntegrityBasis& basis, std::span<const double> x) {
    if (static_cast<int>(x.size()) != basis.dim) throw Error(Errc::DimensionMismatch, "point dimension");
    std::vector<double> out;
    for (const auto& j : basis.basis) out.push_back(j.evaluate_numeric<double>(x));
    return out;
}

} // namespace orbitscope
