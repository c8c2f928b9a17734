#include <gtest/gtest.h>

#include <random>

#include "orbitscope/catalog.hpp"
#include "orbitscope/strata.hpp"

using namespace orbitscope;

namespace {

int realized_count(const std::vector<SymmetryType>& types) {
    int c = 0;
    for (const auto& t : types) c += t.realized;
    return c;
}

// Random invariant of x-degree <= 2 d_k with small rational coefficients.
Polynomial random_invariant(const IntegrityBasis& b, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-9, 9), den(1, 5);
    Polynomial psi(b.size(), VariableKind::J);
    for (int w = 1; w <= 2 * b.degrees.back(); ++w)
        for (const auto& m : monomials_of_weight(b.degrees, w)) {
            Rational c(num(rng), den(rng));
            c.canonicalize();
            psi.add_term(m, c);
        }
    return substitute(psi, b.basis);
}

std::vector<double> numeric_metric_gradient(const RationalMatrix& eta_inv, const std::vector<Polynomial>& grad,
                                            std::span<const double> x) {
    const std::size_t n = grad.size();
    std::vector<double> g(n), out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) g[i] = grad[i].evaluate_numeric<double>(x);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i] += eta_inv(i, j).get_d() * g[j];
    return out;
}

// Conjugacy classes by direct scan of every pair (oracle for the class count).
std::size_t brute_force_class_count(const FiniteGroupRep& g) {
    auto subs = all_subgroups(g);
    std::vector<int> cls(subs.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        if (cls[i] >= 0) continue;
        cls[i] = next;
        for (std::size_t j = i + 1; j < subs.size(); ++j)
            for (int e = 0; e < g.order(); ++e) {
                std::vector<int> conj;
                for (int m : subs[i].members)
                    conj.push_back(g.product(g.product(e, m), g.inverse(e)));
                std::sort(conj.begin(), conj.end());
                if (conj == subs[j].members) {
                    cls[j] = next;
                    break;
                }
            }
        ++next;
    }
    return static_cast<std::size_t>(next);
}

} // namespace

TEST(SymmetryTypes, Z2Plane) {
    auto g = catalog::z2_plane();
    auto types = symmetry_types(g);
    ASSERT_EQ(types.size(), 2u);
    EXPECT_EQ(types[0].representative, g.whole());
    EXPECT_EQ(types[0].fix_dim, 0);
    EXPECT_TRUE(types[0].realized);
    EXPECT_EQ(types[1].fix_dim, 2);
    EXPECT_TRUE(types[1].realized);
}

TEST(SymmetryTypes, Z2xZ2) {
    auto g = catalog::z2xz2();
    auto types = symmetry_types(g);
    ASSERT_EQ(types.size(), 5u);
    EXPECT_EQ(realized_count(types), 4);
    int minus_i = g.index_of(catalog::mat({{-1, 0}, {0, -1}}));
    Subgroup diag{{0, minus_i}};
    int t = type_index(types, diag);
    ASSERT_GE(t, 0);
    EXPECT_EQ(types[static_cast<std::size_t>(t)].fix_dim, 0);
    EXPECT_FALSE(types[static_cast<std::size_t>(t)].realized);
    int fix_one = 0;
    for (const auto& ty : types) fix_one += ty.realized && ty.fix_dim == 1;
    EXPECT_EQ(fix_one, 2);
}

TEST(SymmetryTypes, D4) {
    auto g = catalog::d4();
    auto types = symmetry_types(g);
    EXPECT_EQ(all_subgroups(g).size(), 10u);
    ASSERT_EQ(types.size(), 8u);
    EXPECT_EQ(types.size(), brute_force_class_count(g));
    EXPECT_EQ(realized_count(types), 4);
    EXPECT_TRUE(types.front().realized);
    EXPECT_EQ(types.front().representative, g.whole());
    EXPECT_EQ(types.back().representative, g.trivial());
    for (const auto& t : types) {
        if (!t.realized) continue;
        EXPECT_TRUE(t.witness.has_value());
        EXPECT_EQ(isotropy_subgroup(g, *t.witness), t.representative);
    }
}

TEST(SymmetryTypes, ClassInvariants) {
    for (const auto& g : {catalog::d4(), catalog::s3_perm(), catalog::s4_perm(), catalog::z4(),
                          catalog::conjugated(catalog::d4(), catalog::mat({{2, 1}, {1, 1}}))}) {
        auto types = symmetry_types(g);
        EXPECT_EQ(types.size(), brute_force_class_count(g)) << g.name();
        for (const auto& t : types)
            for (const auto& c : t.conjugates) {
                EXPECT_EQ(c.order(), t.order());
                EXPECT_EQ(fixed_subspace(g, c).size(), static_cast<std::size_t>(t.fix_dim));
            }
        // deterministic given the seed
        auto again = symmetry_types(g);
        for (std::size_t i = 0; i < types.size(); ++i) EXPECT_EQ(again[i].witness, types[i].witness);
    }
}

TEST(StratumOf, D4Examples) {
    auto g = catalog::d4();
    auto types = symmetry_types(g);
    const auto& axis = stratum_of(g, types, {1, 0});
    const auto& diag = stratum_of(g, types, {1, 1});
    EXPECT_EQ(axis.order(), 2u);
    EXPECT_EQ(axis.fix_dim, 1);
    EXPECT_EQ(diag.order(), 2u);
    EXPECT_NE(axis.id, diag.id);
    EXPECT_EQ(stratum_of(g, types, {2, 1}).representative, g.trivial());
    EXPECT_EQ(stratum_of(g, RationalVector{0, 3}).id, axis.id);
    EXPECT_THROW(stratum_of(g, RationalVector{1}), Error);
}

TEST(StratumOf, ConstantOnOrbits) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> c(-3, 3);
    for (const auto& g : {catalog::d4(), catalog::s3_perm(), catalog::z2xz2()}) {
        auto types = symmetry_types(g);
        for (int trial = 0; trial < 60; ++trial) {
            RationalVector x;
            for (int i = 0; i < g.dim(); ++i) x.push_back(c(rng));
            const int id = stratum_of(g, types, x).id;
            for (const auto& y : orbit(g, x)) EXPECT_EQ(stratum_of(g, types, y).id, id);
        }
    }
}

TEST(Lattice, Examples) {
    auto z2 = isotropy_lattice(catalog::z2_plane());
    EXPECT_TRUE(z2.less(1, 0));
    EXPECT_FALSE(z2.less(0, 1));

    auto l = isotropy_lattice(catalog::z2xz2());
    const auto& types = l.types;
    const int bottom = static_cast<int>(types.size()) - 1;
    int mid = 0;
    for (const auto& t : types)
        if (t.realized && t.fix_dim == 1) {
            ++mid;
            EXPECT_TRUE(l.less(bottom, t.id));
            EXPECT_TRUE(l.less(t.id, 0));
        }
    EXPECT_EQ(mid, 2);

    auto d4 = isotropy_lattice(catalog::d4());
    for (const auto& t : d4.types)
        if (t.realized && t.fix_dim == 1) {
            EXPECT_TRUE(d4.less(static_cast<int>(d4.types.size()) - 1, t.id));
            EXPECT_TRUE(d4.less(t.id, 0));
        }
}

TEST(Lattice, StrictPartialOrderConsistentWithFixedSpaces) {
    for (const auto& g : {catalog::d4(), catalog::s3_perm(), catalog::s4_perm(), catalog::z2xz2()}) {
        auto l = isotropy_lattice(g);
        const int m = static_cast<int>(l.types.size());
        for (int i = 0; i < m; ++i) {
            EXPECT_FALSE(l.less(i, i));
            for (int j = 0; j < m; ++j) {
                if (!l.less(i, j)) continue;
                EXPECT_FALSE(l.less(j, i));
                EXPECT_GE(l.types[static_cast<std::size_t>(i)].fix_dim, l.types[static_cast<std::size_t>(j)].fix_dim);
                // some conjugate of H_i sits inside H_j, so Fix(H_j) lies in Fix of that conjugate
                bool nested = false;
                for (const auto& c : l.types[static_cast<std::size_t>(i)].conjugates) {
                    if (!is_subset(c, l.types[static_cast<std::size_t>(j)].representative)) continue;
                    nested = true;
                    for (const auto& v : l.types[static_cast<std::size_t>(j)].fix_basis)
                        for (int h : c.members) EXPECT_EQ(g.matrix(h) * v, v);
                }
                EXPECT_TRUE(nested);
                for (int k = 0; k < m; ++k)
                    if (l.less(j, k)) EXPECT_TRUE(l.less(i, k));
            }
        }
        auto edges = l.hasse_edges();
        EXPECT_FALSE(edges.empty());
        for (const auto& e : edges) EXPECT_TRUE(l.less(e.first, e.second));
    }
}

TEST(PrincipalStratum, Examples) {
    for (const auto& g : {catalog::z2_plane(), catalog::d4(), catalog::s4_perm()}) {
        auto l = isotropy_lattice(g);
        const auto& p = principal_stratum(l);
        EXPECT_EQ(p.representative, g.trivial());
        EXPECT_EQ(p.fix_dim, g.dim());
    }
    auto t = isotropy_lattice(catalog::trivial(2));
    ASSERT_EQ(t.types.size(), 1u);
    EXPECT_EQ(principal_stratum(t).id, 0);
    IsotropyLattice empty;
    EXPECT_THROW(principal_stratum(empty), Error);
}

TEST(CriticalOrbits, Examples) {
    auto d4 = principal_critical_orbits(catalog::d4());
    ASSERT_EQ(d4.rays.size(), 2u);
    std::set<RationalVector> dirs;
    for (const auto& r : d4.rays) dirs.insert(r.direction);
    EXPECT_TRUE(dirs.count({1, 0}));
    EXPECT_TRUE(dirs.count({1, 1}));
    for (const auto& r : d4.rays) {
        double n = 0;
        for (double x : r.unit) n += x * x;
        EXPECT_NEAR(n, 1.0, 1e-15);
    }
    EXPECT_TRUE(principal_critical_orbits(catalog::z2_plane()).rays.empty());
    auto z22 = principal_critical_orbits(catalog::z2xz2());
    ASSERT_EQ(z22.rays.size(), 2u);
    std::set<RationalVector> axes;
    for (const auto& r : z22.rays) axes.insert(r.direction);
    EXPECT_EQ(axes, (std::set<RationalVector>{{1, 0}, {0, 1}}));
}

TEST(Michel, RaysAreCriticalForEveryInvariant) {
    std::mt19937_64 rng(37);
    for (const auto& g : {catalog::d4(), catalog::z2xz2(), catalog::s3_perm(),
                          catalog::conjugated(catalog::d4(), catalog::mat({{1, 0}, {0, 2}}))}) {
        auto b = compute_mib(g);
        auto eta_inv = inverse_metric(g);
        auto rays = principal_critical_orbits(g);
        ASSERT_FALSE(rays.rays.empty()) << g.name();
        for (int trial = 0; trial < 20; ++trial) {
            auto phi = random_invariant(b, rng);
            auto grad = gradient(phi);
            for (const auto& r : rays.rays) {
                EXPECT_TRUE(is_parallel(metric_gradient(eta_inv, phi, r.direction), r.direction));
                auto gn = numeric_metric_gradient(eta_inv, grad, r.unit);
                double scale = 1;
                for (double v : gn) scale = std::max(scale, std::abs(v));
                EXPECT_LE(tangential_residual(gn, r.unit), 1e-9 * scale) << g.name();
            }
        }
    }
}

TEST(Michel, PrincipalPointsAreNotCritical) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> normal;
    for (const auto& g : {catalog::d4(), catalog::z2xz2()}) {
        auto b = compute_mib(g);
        auto eta_inv = inverse_metric(g);
        auto phi = random_invariant(b, rng);
        auto grad = gradient(phi);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(2);
            for (auto& v : x) v = normal(rng);
            double n = std::hypot(x[0], x[1]);
            for (auto& v : x) v /= n;
            EXPECT_GT(tangential_residual(numeric_metric_gradient(eta_inv, grad, x), x), 1e-6) << g.name();
        }
    }
}
