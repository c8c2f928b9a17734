#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "orbitscope/error.hpp"
#include "orbitscope/linalg.hpp"
#include "orbitscope/polynomial.hpp"

namespace orbitscope {

/// An invertible matrix with rational entries.
struct GroupElement {
    RationalMatrix matrix;

    friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

/// Sorted element indices of a subgroup of a FiniteGroupRep.
struct Subgroup {
    std::vector<int> members;

    std::size_t order() const noexcept { return members.size(); }
    bool contains(int g) const { return std::binary_search(members.begin(), members.end(), g); }

    friend bool operator==(const Subgroup&, const Subgroup&) = default;
    friend auto operator<=>(const Subgroup&, const Subgroup&) = default;
};

inline bool is_subset(const Subgroup& a, const Subgroup& b) {
    return std::includes(b.members.begin(), b.members.end(), a.members.begin(), a.members.end());
}

struct InvariantMetric {
    RationalMatrix eta;
};

constexpr int default_max_order = 10000;
constexpr int default_subgroup_cap = 100000;

/// A finite matrix group over Q with its multiplication table.
///
/// Element 0 is the identity. Immutable after construction.
class FiniteGroupRep {
public:
    int dim() const noexcept { return dim_; }
    int order() const noexcept { return static_cast<int>(elements_.size()); }
    const std::vector<GroupElement>& elements() const noexcept { return elements_; }
    const RationalMatrix& matrix(int g) const { return elements_.at(static_cast<std::size_t>(g)).matrix; }
    const std::vector<RationalMatrix>& generators() const noexcept { return generators_; }
    const std::string& name() const noexcept { return name_; }

    int product(int a, int b) const { return cayley_[static_cast<std::size_t>(a) * elements_.size() + static_cast<std::size_t>(b)]; }
    int inverse(int a) const { return inverse_.at(static_cast<std::size_t>(a)); }

    /// Index of an element given its matrix, or -1.
    int index_of(const RationalMatrix& m) const {
        auto it = lookup_.find(m);
        return it == lookup_.end() ? -1 : it->second;
    }

    Subgroup whole() const {
        Subgroup s;
        for (int i = 0; i < order(); ++i) s.members.push_back(i);
        return s;
    }

    Subgroup trivial() const { return Subgroup{{0}}; }

    /// Smallest subgroup containing the given elements.
    Subgroup closure(const std::vector<int>& seeds) const {
        std::vector<char> in(elements_.size(), 0);
        std::vector<int> members{0};
        in[0] = 1;
        std::vector<int> gens;
        for (int s : seeds)
            if (s != 0) gens.push_back(s);
        for (std::size_t head = 0; head < members.size(); ++head)
            for (int g : gens) {
                int p = product(members[head], g);
                if (!in[static_cast<std::size_t>(p)]) {
                    in[static_cast<std::size_t>(p)] = 1;
                    members.push_back(p);
                }
            }
        std::sort(members.begin(), members.end());
        return Subgroup{std::move(members)};
    }

    bool is_subgroup(const Subgroup& h) const {
        if (h.members.empty() || !std::is_sorted(h.members.begin(), h.members.end()) || !h.contains(0)) return false;
        for (int a : h.members) {
            if (a < 0 || a >= order()) return false;
            if (!h.contains(inverse(a))) return false;
            for (int b : h.members)
                if (!h.contains(product(a, b))) return false;
        }
        return true;
    }

    friend FiniteGroupRep close_generators(const std::vector<RationalMatrix>& generators, int max_order,
                                           std::string name);

private:
    int dim_ = 0;
    std::string name_;
    std::vector<RationalMatrix> generators_;
    std::vector<GroupElement> elements_;
    std::map<RationalMatrix, int> lookup_;
    std::vector<int> cayley_;
    std::vector<int> inverse_;
};

/// Closes a set of invertible rational matrices under multiplication.
inline FiniteGroupRep close_generators(const std::vector<RationalMatrix>& generators,
                                       int max_order = default_max_order, std::string name = {}) {
    if (generators.empty()) throw Error(Errc::DimensionMismatch, "at least one generator is required");
    const std::size_t n = generators.front().rows();
    if (n == 0) throw Error(Errc::DimensionMismatch, "generators must be at least 1x1");
    for (const auto& g : generators) {
        if (!g.square() || g.rows() != n) throw Error(Errc::DimensionMismatch, "generators must be square of equal size");
        Rational det = determinant(g);
        if (det == 0) throw Error(Errc::NonInvertibleGenerator, "generator has zero determinant");
        // a matrix of finite order has determinant +-1
        if (det != 1 && det != -1)
            throw Error(Errc::OrderCapExceeded, "generator determinant " + to_string(det) + " has infinite order");
    }

    FiniteGroupRep rep;
    rep.dim_ = static_cast<int>(n);
    rep.name_ = std::move(name);
    rep.generators_ = generators;

    auto add = [&](RationalMatrix m) {
        auto [it, fresh] = rep.lookup_.emplace(m, static_cast<int>(rep.elements_.size()));
        if (fresh) {
            rep.elements_.push_back(GroupElement{std::move(m)});
            if (static_cast<int>(rep.elements_.size()) > max_order)
                throw Error(Errc::OrderCapExceeded,
                            "closure exceeded max_order = " + std::to_string(max_order));
        }
        return it->second;
    };

    add(RationalMatrix::identity(n));
    for (std::size_t head = 0; head < rep.elements_.size(); ++head)
        for (const auto& g : generators) add(rep.elements_[head].matrix * g);

    const std::size_t order = rep.elements_.size();
    rep.cayley_.assign(order * order, -1);
    rep.inverse_.assign(order, -1);
    for (std::size_t a = 0; a < order; ++a)
        for (std::size_t b = 0; b < order; ++b) {
            int p = rep.index_of(rep.elements_[a].matrix * rep.elements_[b].matrix);
            rep.cayley_[a * order + b] = p;
            if (p == 0) rep.inverse_[a] = static_cast<int>(b);
        }
    return rep;
}

/// eta = (1/|G|) sum_g T_g^T T_g.
inline InvariantMetric invariant_metric(const FiniteGroupRep& rep) {
    const auto n = static_cast<std::size_t>(rep.dim());
    RationalMatrix sum(n, n);
    for (const auto& g : rep.elements()) sum = sum + g.matrix.transpose() * g.matrix;
    return InvariantMetric{sum.scaled(Rational(1, rep.order()))};
}

inline void check_point_dim(const FiniteGroupRep& rep, std::size_t size) {
    if (static_cast<int>(size) != rep.dim())
        throw Error(Errc::DimensionMismatch,
                    "point has dimension " + std::to_string(size) + ", group acts on " + std::to_string(rep.dim()));
}

/// {T_g x}, deduplicated, in order of first appearance.
inline std::vector<RationalVector> orbit(const FiniteGroupRep& rep, const RationalVector& x) {
    check_point_dim(rep, x.size());
    std::vector<RationalVector> out;
    std::set<RationalVector> seen;
    for (const auto& g : rep.elements()) {
        RationalVector y = g.matrix * x;
        if (seen.insert(y).second) out.push_back(std::move(y));
    }
    return out;
}

inline Subgroup isotropy_subgroup(const FiniteGroupRep& rep, const RationalVector& x) {
    check_point_dim(rep, x.size());
    Subgroup h;
    for (int g = 0; g < rep.order(); ++g)
        if (rep.matrix(g) * x == x) h.members.push_back(g);
    return h;
}

/// g H g^{-1}.
inline Subgroup conjugate_subgroup(const FiniteGroupRep& rep, const Subgroup& h, int g) {
    if (g < 0 || g >= rep.order()) throw Error(Errc::DimensionMismatch, "element index out of range");
    if (!rep.is_subgroup(h)) throw Error(Errc::NotASubgroup, "index set is not closed under product and inverse");
    Subgroup out;
    const int gi = rep.inverse(g);
    for (int m : h.members) out.members.push_back(rep.product(rep.product(g, m), gi));
    std::sort(out.members.begin(), out.members.end());
    return out;
}

/// Every subgroup exactly once, sorted by order then members.
///
/// Cyclic subgroups are generated first; the list is then closed under joins
/// with cyclic subgroups until no new subgroup appears.
inline std::vector<Subgroup> all_subgroups(const FiniteGroupRep& rep, int cap = default_subgroup_cap) {
    std::set<Subgroup> found;
    std::vector<Subgroup> cyclic;
    long closures = 0;
    auto count = [&] {
        if (++closures > cap)
            throw Error(Errc::SubgroupCapExceeded, "more than " + std::to_string(cap) + " candidate closures");
    };
    for (int g = 0; g < rep.order(); ++g) {
        count();
        Subgroup c = rep.closure({g});
        if (found.insert(c).second) cyclic.push_back(std::move(c));
    }
    std::vector<Subgroup> frontier(found.begin(), found.end());
    while (!frontier.empty()) {
        std::vector<Subgroup> next;
        for (const auto& a : frontier)
            for (const auto& c : cyclic) {
                if (is_subset(c, a)) continue;
                count();
                std::vector<int> seeds = a.members;
                seeds.insert(seeds.end(), c.members.begin(), c.members.end());
                Subgroup j = rep.closure(seeds);
                if (found.insert(j).second) next.push_back(std::move(j));
            }
        frontier = std::move(next);
    }
    std::vector<Subgroup> out(found.begin(), found.end());
    std::stable_sort(out.begin(), out.end(),
                     [](const Subgroup& a, const Subgroup& b) { return a.order() < b.order(); });
    return out;
}

/// Exact basis of Fix(H) = {x : T_h x = x for all h in H}.
inline std::vector<RationalVector> fixed_subspace(const FiniteGroupRep& rep, const Subgroup& h) {
    const auto n = static_cast<std::size_t>(rep.dim());
    std::vector<RationalVector> rows;
    const RationalMatrix id = RationalMatrix::identity(n);
    for (int m : h.members) {
        if (m == 0) continue;
        RationalMatrix d = rep.matrix(m) - id;
        for (std::size_t i = 0; i < n; ++i) rows.push_back(d.row(i));
    }
    if (rows.empty()) {
        std::vector<RationalVector> basis;
        for (std::size_t i = 0; i < n; ++i) {
            RationalVector e(n, Rational(0));
            e[i] = 1;
            basis.push_back(std::move(e));
        }
        return basis;
    }
    auto basis = nullspace(RationalMatrix::from_rows(rows));
    for (auto& v : basis) v = primitive(std::move(v));
    return basis;
}

} // namespace orbitscope
