#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "orbitscope/catalog.hpp"
#include "orbitscope/landau.hpp"

using namespace orbitscope;

namespace {

struct Fixture {
    FiniteGroupRep rep;
    IntegrityBasis basis;
    LandauModel model;
};

Fixture fixture(const FiniteGroupRep& rep, int ell = -1) {
    auto b = compute_mib(rep);
    return {rep, b, build_generic(rep, b, ell)};
}

Rational q(double v) { return Rational(v); }

std::set<std::string> names(const LandauModel& m) {
    std::set<std::string> out;
    for (const auto& c : m.coefficients) out.insert(c.name);
    return out;
}

struct GridMin {
    double value;
    double x, y;
};

// Dense polar grid over the disk, then repeated local zooming; uses only
// exact-coefficient evaluation of Phi, no derivatives.
GridMin grid_search(const Polynomial& phi, double radius) {
    NumericPolynomial<double> f(phi);
    GridMin best{f(std::vector<double>{0, 0}), 0, 0};
    const int nr = 400, nt = 720;
    for (int i = 1; i <= nr; ++i)
        for (int j = 0; j < nt; ++j) {
            double r = radius * i / nr, t = 2 * M_PI * j / nt;
            std::vector<double> p{r * std::cos(t), r * std::sin(t)};
            double v = f(p);
            if (v < best.value) best = {v, p[0], p[1]};
        }
    double h = radius / nr * 2;
    for (int round = 0; round < 40; ++round) {
        GridMin local = best;
        for (int i = -10; i <= 10; ++i)
            for (int j = -10; j <= 10; ++j) {
                std::vector<double> p{best.x + h * i / 10, best.y + h * j / 10};
                double v = f(p);
                if (v < local.value) local = {v, p[0], p[1]};
            }
        best = local;
        h *= 0.5;
    }
    return best;
}

int type_of(const LandauModel& m, RationalVector x) { return stratum_of(m.rep, m.types, x).id; }

} // namespace

TEST(BuildGeneric, Examples) {
    auto line = fixture(catalog::z2_line(), 4);
    EXPECT_EQ(names(line.model), (std::set<std::string>{"J1", "J1^2"}));
    auto d4 = fixture(catalog::d4());
    EXPECT_EQ(d4.model.degree_x, 8);
    EXPECT_EQ(names(d4.model),
              (std::set<std::string>{"J1", "J1^2", "J2", "J1^3", "J1*J2", "J1^4", "J1^2*J2", "J2^2"}));
    auto z2 = fixture(catalog::z2_plane(), 4);
    EXPECT_EQ(z2.model.coefficients.size(), 9u);
}

TEST(BuildGeneric, ModelInvariants) {
    auto d4 = fixture(catalog::d4());
    EXPECT_TRUE(d4.model.is_critical("J1"));
    EXPECT_FALSE(d4.model.is_critical("J2"));
    EXPECT_THROW(d4.model.is_critical("nope"), Error);
    ParameterValues lam{{"J1", -1}, {"J1^2", 1}, {"J2", q(0.5)}, {"J1^2*J2", 3}};
    auto psi = d4.model.psi_at(lam);
    for (const auto& [m, c] : psi.terms()) {
        int w = weighted_degree(m, d4.basis.degrees);
        EXPECT_GE(w, 2);
        EXPECT_LE(w, d4.model.degree_x);
    }
    EXPECT_TRUE(is_invariant(d4.rep, d4.model.phi_at(lam)));
    try {
        d4.model.psi_at({{"J3", 1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.qualified(), "landau.UnknownParameter");
    }
    // S3 has a degree-one invariant; its linear term is not part of the model
    auto s3 = fixture(catalog::s3_perm());
    EXPECT_FALSE(s3.model.psi.has("J1"));
    EXPECT_TRUE(s3.model.is_critical("J1^2"));
    EXPECT_TRUE(s3.model.is_critical("J2"));
}

TEST(Stability, Examples) {
    auto line = fixture(catalog::z2_line(), 4);
    EXPECT_TRUE(check_stability(line.model, {{"J1", -1}, {"J1^2", 1}}, 2.0).stable);
    auto bad = check_stability(line.model, {{"J1^2", -1}}, 2.0);
    EXPECT_FALSE(bad.stable);
    ASSERT_FALSE(bad.witnesses.empty());
    EXPECT_NEAR(std::abs(bad.witnesses[0][0]), 2.0, 1e-12);

    auto d4 = fixture(catalog::d4());
    for (double c : {0.0, 0.5, 2.0})
        EXPECT_TRUE(check_stability(d4.model, {{"J1", -1}, {"J1^2", 1}, {"J2", q(c)}}, 3.0).stable) << c;
    EXPECT_FALSE(check_stability(d4.model, {{"J1^2", 1}, {"J2", -5}}, 3.0).stable);
}

TEST(Minimize, Z2LineConvex) {
    auto line = fixture(catalog::z2_line(), 4);
    auto r = minimize(line.model, {{"J1", 1}, {"J1^2", 1}});
    ASSERT_EQ(r.points.size(), 1u);
    EXPECT_EQ(r.points[0].location, std::vector<double>{0.0});
    EXPECT_EQ(r.points[0].kind, CriticalKind::Minimum);
    EXPECT_EQ(r.points[0].symmetry, 0);
    EXPECT_EQ(r.points[0].orbit_size, 1);
}

TEST(Minimize, Z2LinePitchfork) {
    auto line = fixture(catalog::z2_line(), 4);
    auto r = minimize(line.model, {{"J1", -1}, {"J1^2", 1}});
    ASSERT_EQ(r.points.size(), 2u);
    const auto& m = r.points[0];
    EXPECT_NEAR(std::abs(m.location[0]), 1 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(m.value, -0.25, 1e-14);
    EXPECT_EQ(m.kind, CriticalKind::Minimum);
    EXPECT_EQ(line.model.types[static_cast<std::size_t>(m.symmetry)].order(), 1u);
    EXPECT_EQ(m.orbit_size, 2);
    EXPECT_EQ(r.points[1].location, std::vector<double>{0.0});
    EXPECT_EQ(r.points[1].kind, CriticalKind::Maximum);
}

TEST(Minimize, PitchforkMagnitude) {
    auto line = fixture(catalog::z2_line(), 4);
    for (double b : {0.5, 1.0, 3.0})
        for (double a : {-1.0, -0.3, -0.01, -1e-4}) {
            auto r = minimize(line.model, {{"J1", q(a)}, {"J1^2", q(b)}});
            EXPECT_NEAR(std::abs(r.global().location[0]), std::sqrt(-a / (2 * b)), 1e-8) << a << " " << b;
        }
}

TEST(Minimize, D4PhaseSelectionAgainstGridSearch) {
    auto d4 = fixture(catalog::d4());
    const int axis = type_of(d4.model, {1, 0});
    const int diag = type_of(d4.model, {1, 1});
    for (auto [c, expect] : {std::pair{0.5, axis}, std::pair{-0.5, diag}}) {
        ParameterValues lam{{"J1", -1}, {"J1^2", 1}, {"J2", q(c)}, {"J2^2", 1}};
        auto r = minimize(d4.model, lam);
        const auto& best = r.global();
        EXPECT_EQ(best.symmetry, expect) << c;
        EXPECT_EQ(best.kind, CriticalKind::Minimum);
        EXPECT_EQ(best.orbit_size, 4);
        auto oracle = grid_search(d4.model.phi_at(lam), 2.0);
        EXPECT_NEAR(best.value, oracle.value, 1e-6) << c;
        // the oracle's minimizer lies on the same kind of ray
        std::vector<double> ox{oracle.x, oracle.y};
        EXPECT_EQ(classify_symmetry(d4.model, ox, 1e-3).id, expect);
    }
}

TEST(Minimize, DiagnosticsAndErrors) {
    auto line = fixture(catalog::z2_line(), 4);
    try {
        minimize(line.model, {{"J1^2", -1}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::StabilityViolation);
    }
    MinimizeOptions opt;
    opt.starts = 5;
    auto r = minimize(line.model, {{"J1", -1}, {"J1^2", 1}}, opt);
    EXPECT_EQ(r.starts, 5);
    EXPECT_GE(r.converged, 1);
}

TEST(Minimize, Deterministic) {
    auto d4 = fixture(catalog::d4());
    ParameterValues lam{{"J1", -1}, {"J1^2", 1}, {"J2", q(0.3)}, {"J2^2", 1}, {"J1*J2", q(-0.2)}};
    auto a = minimize(d4.model, lam);
    auto b = minimize(d4.model, lam);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].location, b.points[i].location);
        EXPECT_EQ(a.points[i].value, b.points[i].value);
    }
}

TEST(Classify, Examples) {
    auto d4 = fixture(catalog::d4());
    EXPECT_EQ(classify_symmetry(d4.model, std::vector<double>{1.0, 1e-12}).id, type_of(d4.model, {1, 0}));
    EXPECT_EQ(classify_symmetry(d4.model, std::vector<double>{0.7071, 0.7071}).id, type_of(d4.model, {1, 1}));
    EXPECT_EQ(classify_symmetry(d4.model, std::vector<double>{0.0, 0.0}).id, 0);
    EXPECT_EQ(classify_symmetry(d4.model, std::vector<double>{0.3, 0.9}).representative, d4.rep.trivial());
}

TEST(Classify, AmbiguousSet) {
    auto g = close_generators({catalog::mat({{-1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}),
                               catalog::mat({{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, 1}})});
    auto types = symmetry_types(g);
    const double d = 0.45e-8;
    std::vector<double> x{d, 0.0, d, 1.0};
    try {
        classify_symmetry(g, types, x, 1e-8);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::AmbiguousClassification);
    }
    // a tighter tolerance resolves it
    EXPECT_EQ(classify_symmetry(g, types, x, 1e-10).representative, g.trivial());
}

TEST(Properties, ValueInvarianceAndOrbitCriticality) {
    std::mt19937_64 rng(43);
    std::normal_distribution<double> normal;
    for (const auto& rep : {catalog::d4(), catalog::s3_perm(),
                            catalog::conjugated(catalog::d4(), catalog::mat({{1, 0}, {0, 2}}))}) {
        auto f = fixture(rep);
        ParameterValues lam;
        for (const auto& c : f.model.coefficients) lam[c.name] = Rational(static_cast<int>(normal(rng) * 8), 8);
        lam[f.model.coefficients.back().name] = 1;
        auto ev = evaluator(f.model, lam);
        for (int t = 0; t < 100; ++t) {
            std::vector<double> x(static_cast<std::size_t>(rep.dim()));
            for (auto& v : x) v = normal(rng);
            const double fx = ev.value(x);
            for (const auto& e : rep.elements()) {
                auto y = detail::to_std(detail::to_eigen(e.matrix) * detail::to_eigen(x));
                EXPECT_LE(std::abs(ev.value(y) - fx), 1e-10 * (1 + std::abs(fx)));
            }
        }
    }
    auto d4 = fixture(catalog::d4());
    ParameterValues lam{{"J1", -1}, {"J1^2", 1}, {"J2", q(-0.5)}, {"J2^2", 1}};
    auto ev = evaluator(d4.model, lam);
    for (const auto& cp : minimize(d4.model, lam).points) {
        for (const auto& e : d4.rep.elements()) {
            Eigen::VectorXd y = detail::to_eigen(e.matrix) * detail::to_eigen(cp.location);
            EXPECT_LE(ev.gradient(detail::as_span(y)).norm(), cp.gradient_norm + 1e-12);
            const auto& ty = classify_symmetry(d4.model, detail::as_span(y));
            const auto& tx = d4.model.types[static_cast<std::size_t>(cp.symmetry)];
            EXPECT_EQ(ty.id, tx.id);
        }
    }
}

TEST(Sweep, PitchforkTransition) {
    auto line = fixture(catalog::z2_line(), 4);
    auto pd = sweep(line.model, {{"J1^2", 1}}, "J1", linear_grid(-1, 1, 21));
    ASSERT_EQ(pd.points.size(), 21u);
    for (const auto& p : pd.points) {
        EXPECT_TRUE(p.error.empty());
        if (p.parameter >= 0)
            EXPECT_EQ(p.symmetry, 0) << p.parameter.get_d();
        else
            EXPECT_EQ(line.model.types[static_cast<std::size_t>(p.symmetry)].order(), 1u);
    }
    ASSERT_EQ(pd.transitions.size(), 1u);
    EXPECT_LE(std::abs(pd.transitions[0].estimate().get_d()), 1e-6);
    EXPECT_THROW(sweep(line.model, {}, "J7", linear_grid(-1, 1, 3)), Error);
}

TEST(Sweep, D4BranchesAlongFixedLines) {
    auto d4 = fixture(catalog::d4());
    auto rays = principal_critical_orbits(d4.model.types);
    std::set<int> line_types;
    for (const auto& r : rays.rays) line_types.insert(r.type);
    for (auto [c, expect] : {std::pair{0.5, type_of(d4.model, {1, 0})}, std::pair{-0.5, type_of(d4.model, {1, 1})}}) {
        auto pd = sweep(d4.model, {{"J1^2", 1}, {"J2", q(c)}, {"J2^2", 1}}, "J1", linear_grid(-1, 1, 11));
        for (const auto& p : pd.points) {
            if (p.parameter >= 0) {
                EXPECT_EQ(p.symmetry, 0);
            } else {
                EXPECT_EQ(p.symmetry, expect);
                EXPECT_TRUE(line_types.count(p.symmetry));
            }
        }
        ASSERT_EQ(pd.transitions.size(), 1u);
        EXPECT_LE(std::abs(pd.transitions[0].estimate().get_d()), 1e-6);
    }
}

TEST(Sweep, ErrorsAreRecordedPerPoint) {
    auto line = fixture(catalog::z2_line(), 4);
    // negative quartic coefficient: every descent escapes
    auto pd = sweep(line.model, {{"J1", 1}}, "J1^2", linear_grid(-1, 1, 3));
    ASSERT_EQ(pd.points.size(), 3u);
    EXPECT_FALSE(pd.points[0].error.empty());
    EXPECT_EQ(pd.points[0].symmetry, -1);
    EXPECT_TRUE(pd.points[2].error.empty());
}

TEST(CriticalOrbits, VerifyRays) {
    auto d4 = fixture(catalog::d4());
    ParameterValues lam{{"J1", -1}, {"J1^2", 1}, {"J2", q(0.3)}, {"J1*J2", q(-0.7)}, {"J2^2", 1}};
    auto rep = verify_critical_orbits(d4.model, lam, principal_critical_orbits(d4.model.types));
    EXPECT_TRUE(rep.passed);
    ASSERT_EQ(rep.rays.size(), 2u);
    for (const auto& r : rep.rays) {
        EXPECT_FALSE(r.critical_radii.empty());
        EXPECT_LT(r.max_residual, 1e-9);
    }

    auto line = fixture(catalog::z2_line(), 4);
    auto lr = verify_critical_orbits(line.model, {{"J1", -1}, {"J1^2", 1}}, principal_critical_orbits(line.model.types));
    EXPECT_TRUE(lr.passed);
    ASSERT_EQ(lr.rays.size(), 1u);
    ASSERT_EQ(lr.rays[0].critical_radii.size(), 2u);
    EXPECT_NEAR(std::abs(lr.rays[0].critical_radii[0]), 1 / std::sqrt(2.0), 1e-12);

    auto conj = fixture(catalog::conjugated(catalog::d4(), catalog::mat({{1, 0}, {0, 2}})));
    auto cr = verify_critical_orbits(conj.model, lam, principal_critical_orbits(conj.model.types));
    EXPECT_TRUE(cr.passed);
    EXPECT_EQ(cr.rays.size(), 2u);
}
