#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "orbitscope/group.hpp"
#include "orbitscope/invariants.hpp"

namespace orbitscope {

/// A conjugacy class [H] of subgroups.
struct SymmetryType {
    /// Position in the list returned by symmetry_types (0 is the whole group).
    int id = 0;
    /// Lexicographically smallest member of the class.
    Subgroup representative;
    std::vector<Subgroup> conjugates;
    int fix_dim = 0;
    std::vector<RationalVector> fix_basis;
    bool realized = false;
    /// A point whose isotropy is exactly the representative, when realized.
    std::optional<RationalVector> witness;

    std::size_t order() const noexcept { return representative.order(); }
    bool contains(const Subgroup& h) const { return std::binary_search(conjugates.begin(), conjugates.end(), h); }
};

struct IsotropyLattice {
    std::vector<SymmetryType> types;
    /// (i, j) means [H_i] < [H_j].
    std::set<std::pair<int, int>> order_pairs;
    /// Index of the principal (minimal realized) type.
    int principal = -1;

    bool less(int i, int j) const { return order_pairs.count({i, j}) > 0; }

    /// Covering relations of the partial order.
    std::vector<std::pair<int, int>> hasse_edges() const {
        std::vector<std::pair<int, int>> out;
        for (const auto& [i, j] : order_pairs) {
            bool covered = true;
            for (int k = 0; k < static_cast<int>(types.size()) && covered; ++k)
                if (less(i, k) && less(k, j)) covered = false;
            if (covered) out.emplace_back(i, j);
        }
        return out;
    }
};

struct CriticalRay {
    int type = -1;
    /// Primitive integer vector spanning the fixed line.
    RationalVector direction;
    /// direction / |direction|.
    std::vector<double> unit;
};

struct PrincipalCriticalOrbitSet {
    std::vector<CriticalRay> rays;
};

constexpr std::uint64_t default_strata_seed = 20240611;

namespace detail {

inline std::vector<double> unit_vector(const RationalVector& v) {
    std::vector<double> out;
    double norm = 0;
    for (const auto& q : v) {
        out.push_back(q.get_d());
        norm += out.back() * out.back();
    }
    norm = std::sqrt(norm);
    if (norm > 0)
        for (auto& x : out) x /= norm;
    return out;
}

/// Random integer combination of a basis; deterministic given the generator state.
inline RationalVector random_combination(const std::vector<RationalVector>& basis, std::size_t n,
                                         std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coef(-1000, 1000);
    RationalVector x(n, Rational(0));
    for (const auto& b : basis) {
        int c = 0;
        while (c == 0) c = coef(rng);
        for (std::size_t i = 0; i < n; ++i) x[i] += c * b[i];
    }
    return x;
}

} // namespace detail

/// Conjugacy classes of all subgroups, largest subgroups first.
///
/// A class is realized when some point has isotropy exactly H; this is tested
/// with seeded random integer points of Fix(H).
inline std::vector<SymmetryType> symmetry_types(const FiniteGroupRep& rep, std::uint64_t seed = default_strata_seed,
                                                int subgroup_cap = default_subgroup_cap) {
    auto subgroups = all_subgroups(rep, subgroup_cap);
    std::set<Subgroup> assigned;
    std::vector<SymmetryType> types;
    for (const auto& h : subgroups) {
        if (assigned.count(h)) continue;
        std::set<Subgroup> cls;
        for (int g = 0; g < rep.order(); ++g) cls.insert(conjugate_subgroup(rep, h, g));
        assigned.insert(cls.begin(), cls.end());
        SymmetryType t;
        t.conjugates.assign(cls.begin(), cls.end());
        t.representative = t.conjugates.front();
        types.push_back(std::move(t));
    }
    std::stable_sort(types.begin(), types.end(), [](const SymmetryType& a, const SymmetryType& b) {
        if (a.order() != b.order()) return a.order() > b.order();
        return a.representative < b.representative;
    });

    std::mt19937_64 rng(seed);
    const auto n = static_cast<std::size_t>(rep.dim());
    for (std::size_t i = 0; i < types.size(); ++i) {
        auto& t = types[i];
        t.id = static_cast<int>(i);
        t.fix_basis = fixed_subspace(rep, t.representative);
        t.fix_dim = static_cast<int>(t.fix_basis.size());
        if (t.fix_dim == 0) {
            t.realized = t.representative == rep.whole();
            if (t.realized) t.witness = RationalVector(n, Rational(0));
            continue;
        }
        for (int attempt = 0; attempt < 8 && !t.realized; ++attempt) {
            RationalVector x = detail::random_combination(t.fix_basis, n, rng);
            if (isotropy_subgroup(rep, x) == t.representative) {
                t.realized = true;
                t.witness = std::move(x);
            }
        }
    }
    return types;
}

/// Index of the type whose class contains h, or -1.
inline int type_index(const std::vector<SymmetryType>& types, const Subgroup& h) {
    for (const auto& t : types)
        if (t.contains(h)) return t.id;
    return -1;
}

inline const SymmetryType& stratum_of(const FiniteGroupRep& rep, const std::vector<SymmetryType>& types,
                                      const RationalVector& x) {
    int i = type_index(types, isotropy_subgroup(rep, x));
    if (i < 0) throw Error(Errc::NotASubgroup, "isotropy subgroup missing from the type list");
    return types[static_cast<std::size_t>(i)];
}

inline SymmetryType stratum_of(const FiniteGroupRep& rep, const RationalVector& x) {
    check_point_dim(rep, x.size());
    return stratum_of(rep, symmetry_types(rep), x);
}

inline IsotropyLattice isotropy_lattice(std::vector<SymmetryType> types) {
    IsotropyLattice out;
    out.types = std::move(types);
    const int m = static_cast<int>(out.types.size());
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (i == j || out.types[static_cast<std::size_t>(i)].order() >= out.types[static_cast<std::size_t>(j)].order())
                continue;
            const auto& big = out.types[static_cast<std::size_t>(j)].representative;
            for (const auto& c : out.types[static_cast<std::size_t>(i)].conjugates)
                if (is_subset(c, big)) {
                    out.order_pairs.emplace(i, j);
                    break;
                }
        }
    std::vector<int> minimal;
    for (int i = 0; i < m; ++i) {
        if (!out.types[static_cast<std::size_t>(i)].realized) continue;
        bool below_all = true;
        for (int j = 0; j < m && below_all; ++j)
            if (j != i && out.types[static_cast<std::size_t>(j)].realized && !out.less(i, j)) below_all = false;
        if (below_all) minimal.push_back(i);
    }
    if (minimal.size() == 1) out.principal = minimal.front();
    return out;
}

inline IsotropyLattice isotropy_lattice(const FiniteGroupRep& rep, std::uint64_t seed = default_strata_seed) {
    return isotropy_lattice(symmetry_types(rep, seed));
}

inline const SymmetryType& principal_stratum(const IsotropyLattice& lattice) {
    if (lattice.principal < 0) throw Error(Errc::NoUniqueMinimum, "no unique minimal realized symmetry type");
    return lattice.types[static_cast<std::size_t>(lattice.principal)];
}

/// Realized types whose fixed space is a line. For a finite group these are
/// exactly the orbits isolated in their stratum on the unit sphere.
inline PrincipalCriticalOrbitSet principal_critical_orbits(const std::vector<SymmetryType>& types) {
    PrincipalCriticalOrbitSet out;
    for (const auto& t : types) {
        if (!t.realized || t.fix_dim != 1) continue;
        CriticalRay ray;
        ray.type = t.id;
        ray.direction = primitive(t.fix_basis.front());
        ray.unit = detail::unit_vector(ray.direction);
        out.rays.push_back(std::move(ray));
    }
    return out;
}

inline PrincipalCriticalOrbitSet principal_critical_orbits(const FiniteGroupRep& rep) {
    return principal_critical_orbits(symmetry_types(rep));
}

/// eta^{-1} grad phi (v), exactly.
inline RationalVector metric_gradient(const RationalMatrix& eta_inv, const Polynomial& phi, const RationalVector& v) {
    RationalVector g;
    for (const auto& d : gradient(phi)) g.push_back(d.evaluate(v));
    return eta_inv * g;
}

/// True when a is a rational multiple of v (including a = 0).
inline bool is_parallel(const RationalVector& a, const RationalVector& v) {
    if (a.size() != v.size()) throw Error(Errc::DimensionMismatch, "vector lengths differ");
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (a[i] * v[j] != a[j] * v[i]) return false;
    return true;
}

/// |g - <g, u> u| for the unit vector u along v.
inline double tangential_residual(std::span<const double> g, std::span<const double> v) {
    double vv = 0, gv = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        vv += v[i] * v[i];
        gv += g[i] * v[i];
    }
    double out = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double t = g[i] - (vv > 0 ? gv / vv : 0.0) * v[i];
        out += t * t;
    }
    return std::sqrt(out);
}

} // namespace orbitscope
