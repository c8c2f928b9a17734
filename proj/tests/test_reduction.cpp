#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "orbitscope/catalog.hpp"
#include "orbitscope/reduction.hpp"

using namespace orbitscope;

namespace {

Polynomial jpoly(const std::string& text, int k) { return parse_polynomial(text, k, VariableKind::J); }

struct Fixture {
    FiniteGroupRep rep;
    IntegrityBasis basis;
    ReductionSetup setup;

    explicit Fixture(FiniteGroupRep r) : rep(std::move(r)), basis(compute_mib(rep)), setup(reduction_setup(rep, basis)) {}
};

Fixture& z2() {
    static Fixture f(catalog::z2_line());
    return f;
}

Fixture& z2z2() {
    static Fixture f(catalog::z2xz2());
    return f;
}

Fixture& d4() {
    static Fixture f(catalog::d4());
    return f;
}

// Oracle: the same operators computed in x-space and written back in the basis.
Polynomial x_space_bracket(const Fixture& f, const Polynomial& a, const Polynomial& b) {
    Polynomial ax = substitute_basis(a, f.basis), bx = substitute_basis(b, f.basis);
    BasisExpresser e(f.basis);
    return e.express(metric_gradient_product(ax, bx, f.setup.eta_inv));
}

Polynomial random_j_poly(const std::vector<int>& weights, int weight, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> c(-5, 5);
    const int k = static_cast<int>(weights.size());
    Polynomial p(k, VariableKind::J);
    for (const auto& m : monomials_of_weight(weights, weight)) p.add_term(m, c(rng));
    return p;
}

GradedPotential sextic(const Rational& a, const Rational& b, const Rational& c, bool b_critical = false) {
    std::set<Monomial> crit{Monomial{1}};
    if (b_critical) {
        crit.insert(Monomial{2});
        crit.insert(Monomial{3});
    }
    Polynomial psi(1, VariableKind::J);
    psi.add_term(Monomial{1}, a);
    psi.add_term(Monomial{2}, b);
    psi.add_term(Monomial{3}, c);
    return graded_potential(psi, {2}, crit);
}

} // namespace

TEST(DeltaJ, Examples) {
    const auto& p = z2().setup.pmatrix;
    auto dj = delta_J(jpoly("J1^2", 1), p);
    ASSERT_EQ(dj.size(), 1u);
    EXPECT_EQ(dj[0], jpoly("8*J1^2", 1));
    EXPECT_TRUE(delta_J(jpoly("7", 1), p)[0].is_zero());

    auto dj2 = delta_J(jpoly("J1*J2", 2), z2z2().setup.pmatrix);
    EXPECT_EQ(dj2[0], jpoly("4*J1*J2", 2));
    EXPECT_EQ(dj2[1], jpoly("4*J1*J2", 2));
}

TEST(DeltaJ, MatchesXSpaceOracle) {
    auto& f = d4();
    std::mt19937_64 rng(3);
    for (int w : {4, 6, 8}) {
        Polynomial h = random_j_poly(f.basis.degrees, w, rng);
        auto dj = delta_J(h, f.setup.pmatrix);
        for (int a = 0; a < f.basis.size(); ++a) {
            Polynomial ja = Polynomial::variable(f.basis.size(), VariableKind::J, a);
            EXPECT_EQ(dj[static_cast<std::size_t>(a)], x_space_bracket(f, ja, h)) << "weight " << w;
        }
    }
}

TEST(HomologicalImage, Examples) {
    const auto& p = z2().setup.pmatrix;
    // a = 3, h = 5
    Polynomial img = homological_image(jpoly("3*J1", 1), jpoly("5*J1^3", 1), p);
    EXPECT_EQ(img, jpoly("180*J1^3", 1));
    EXPECT_EQ(substitute_basis(img, z2().basis).degree(), 6);
    EXPECT_EQ(homological_image(jpoly("3*J1", 1), jpoly("5*J1^2", 1), p), jpoly("120*J1^2", 1));
    EXPECT_TRUE(homological_image(jpoly("4", 1), jpoly("J1^2", 1), p).is_zero());
}

TEST(HomologicalImage, GradingLawAndOracle) {
    auto& f = d4();
    std::mt19937_64 rng(11);
    for (int s : {2, 4, 6})
        for (int t : {2, 4, 6, 8}) {
            Polynomial psi = random_j_poly(f.basis.degrees, s, rng);
            Polynomial h = random_j_poly(f.basis.degrees, t, rng);
            Polynomial img = homological_image(psi, h, f.setup.pmatrix);
            EXPECT_EQ(img, x_space_bracket(f, psi, h));
            if (img.is_zero()) continue;
            Polynomial x = substitute_basis(img, f.basis);
            EXPECT_TRUE(x.is_homogeneous());
            EXPECT_EQ(x.degree(), s + t - 2);
        }
}

TEST(UFunctions, Examples) {
    ParametricPolynomial psi(1);
    psi.add("a", jpoly("J1", 1));
    psi.add("b", jpoly("J1^2", 1));
    auto u = u_functions(psi, z2().setup.pmatrix);
    ASSERT_EQ(u.size(), 1u);
    EXPECT_EQ(u[0].at({{"a", 1}}), jpoly("4*J1", 1));
    EXPECT_EQ(u[0].at({{"b", 1}}), jpoly("8*J1^2", 1));
    EXPECT_EQ(u[0].at({{"a", Rational(1, 3)}, {"b", -2}}), jpoly("4/3*J1 - 16*J1^2", 1));

    EXPECT_TRUE(u_functions(Polynomial(1, VariableKind::J), z2().setup.pmatrix)[0].is_zero());

    ParametricPolynomial q(2);
    q.add("a", jpoly("J1", 2));
    q.add("b", jpoly("J2", 2));
    auto u2 = u_functions(q, z2z2().setup.pmatrix);
    ParameterValues v{{"a", 2}, {"b", 7}};
    EXPECT_EQ(u2[0].at(v), jpoly("8*J1", 2));
    EXPECT_EQ(u2[1].at(v), jpoly("28*J2", 2));
}

TEST(RemovableTerms, Z2Sextic) {
    auto psi = sextic(Rational(-1, 2), 1, Rational(3, 10));
    auto space = removable_terms(psi, 6, z2().setup.pmatrix);
    EXPECT_EQ(space.source_degree, 4);
    EXPECT_EQ(space.generator_degree, 4);
    ASSERT_EQ(space.basis.size(), 1u);
    EXPECT_EQ(space.pivots[0], (Monomial{3}));
    EXPECT_EQ(space.generators[0], jpoly("J1^2", 1));
    // Oracle: the generic quartic part alone produces the image.
    EXPECT_EQ(space.basis[0], homological_image(jpoly("J1^2", 1), jpoly("J1^2", 1), z2().setup.pmatrix));
    EXPECT_EQ(space.basis[0], jpoly("16*J1^3", 1));
    EXPECT_EQ(space.violations, 0);
    EXPECT_EQ(space.constraints.size(), 1u);
}

TEST(RemovableTerms, AllCriticalIsEmpty) {
    auto psi = sextic(Rational(-1, 2), 1, Rational(3, 10), true);
    for (int d = 3; d <= 10; ++d) {
        auto space = removable_terms(psi, d, z2().setup.pmatrix);
        EXPECT_TRUE(space.empty()) << d;
        EXPECT_EQ(space.violations, 0);
        if (d % 2 == 0) EXPECT_EQ(space.non_removable.size(), 1u) << d;
    }
}

TEST(RemovableTerms, ConstantQGivesU) {
    auto psi = sextic(Rational(-1, 2), 3, 0);
    auto space = removable_terms(psi, 4, z2().setup.pmatrix);
    EXPECT_EQ(space.generator_degree, 2);
    ASSERT_EQ(space.basis.size(), 1u);
    auto u = u_functions(psi, z2().setup.pmatrix);
    Polynomial u4 = u[0].weighted_component(psi.weights, 4);
    // both are multiples of J1^2
    EXPECT_EQ(space.basis[0].scaled(u4.coefficient(Monomial{2}) / space.basis[0].coefficient(Monomial{2})), u4);
}

TEST(Reduce, Z2SexticRemovesCubic) {
    auto& f = z2();
    for (auto [a, c] : std::vector<std::pair<Rational, Rational>>{{Rational(-1, 2), Rational(3, 10)},
                                                                  {Rational(1, 5), Rational(-2, 5)},
                                                                  {Rational(0), Rational(1)},
                                                                  {Rational(-3, 10), Rational(1, 4)}}) {
        const Rational b = 1;
        auto report = reduce(sextic(a, b, c), 6, f.setup);
        EXPECT_EQ(report.reduced.psi.coefficient(Monomial{3}), 0);
        ASSERT_EQ(report.generators.size(), 1u);
        const auto& g = report.generators[0];
        EXPECT_EQ(g.degree, 4);
        ASSERT_EQ(g.h_poly.terms().size(), 1u);
        const Rational h = g.h_poly.coefficient(Monomial{2});
        // exact J^3 coefficient after the change is c + 16 b h + 16 a h^2
        const Rational eq = c + 16 * b * h + 16 * a * h * h;
        EXPECT_LT(std::fabs(eq.get_d()), 1e-25);
        if (a == 0) EXPECT_EQ(h, -c / (16 * b));
        EXPECT_NEAR(h.get_d(), Rational(-c / (16 * b)).get_d(), 0.2 * std::fabs(Rational(c / b).get_d()));
        EXPECT_EQ(report.reduced.psi.coefficient(Monomial{1}), a);
        EXPECT_EQ(report.reduced.psi.coefficient(Monomial{2}), b + 8 * a * h);
        EXPECT_EQ(report.removed_terms.size(), 1u);
        EXPECT_EQ(report.violations, 0);
        EXPECT_TRUE(is_invariant(f.rep, substitute_basis(report.reduced.psi, f.basis)));
    }
}

TEST(Reduce, FixedPointHasNoGenerators) {
    auto psi = sextic(Rational(-1, 2), 1, 0);
    auto report = reduce(psi, 6, z2().setup);
    EXPECT_TRUE(report.generators.empty());
    EXPECT_EQ(report.reduced.psi, psi.psi);
    auto v = verify_reduction(z2().setup, report);
    for (const auto& p : v.points)
        for (auto r : p.residuals) EXPECT_EQ(r, 0.0L);
    EXPECT_TRUE(v.passed);
}

TEST(Reduce, FiltrationLaw) {
    auto& f = d4();
    std::mt19937_64 rng(5);
    Polynomial psi(2, VariableKind::J);
    psi.add_term(Monomial{1, 0}, Rational(-1, 3));
    for (int w = 4; w <= 10; w += 2) psi += random_j_poly(f.basis.degrees, w, rng).scaled(Rational(1, 7));
    psi.set_coefficient(Monomial{2, 0}, 1);
    auto g = graded_potential(psi, f.basis.degrees, {Monomial{1, 0}});
    auto report = reduce(g, 10, f.setup);
    ASSERT_FALSE(report.steps.empty());
    int last = 0;
    for (const auto& step : report.steps) {
        EXPECT_GT(step.generator.degree, last);
        last = step.generator.degree;
        for (int d = 0; d < step.generator.degree; ++d)
            EXPECT_EQ(step.before.component(d), step.after.component(d)) << "degree " << d;
        EXPECT_TRUE(is_invariant(f.rep, substitute_basis(step.after.psi, f.basis)));
        for (const auto& m : step.space.pivots) EXPECT_EQ(step.after.psi.coefficient(m), 0);
    }
    EXPECT_EQ(report.violations, 0);
    EXPECT_TRUE(check_reduction(f.setup, report).passed);
}

TEST(Reduce, Z2xZ2SurvivorsMatchRank) {
    auto& f = z2z2();
    const Rational a(-1, 4), eps(1, 3);
    Polynomial psi = jpoly("J1 + J2", 2).scaled(a) + jpoly("J1^2 + 2*J1*J2 + J2^2", 2) + jpoly("J1*J2", 2).scaled(eps) +
                     jpoly("2/5*J1^3 - 1/3*J1^2*J2 + 3/7*J1*J2^2 - 1/2*J2^3", 2);
    auto g = graded_potential(psi, f.basis.degrees, {Monomial{1, 0}, Monomial{0, 1}});
    auto report = reduce(g, 6, f.setup);

    // Oracle: rank of the images of all quartic generators under the quartic part.
    Polynomial quartic = g.component(4);
    auto rows = monomials_of_weight(f.basis.degrees, 6);
    auto cols = monomials_of_weight(f.basis.degrees, 4);
    RationalMatrix m(rows.size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        Polynomial img = x_space_bracket(f, quartic, Polynomial::monomial(2, VariableKind::J, cols[c]));
        for (std::size_t r = 0; r < rows.size(); ++r) m(r, c) = img.coefficient(rows[r]);
    }
    const std::size_t r = rank(m);
    ASSERT_EQ(report.steps.size(), 1u);
    EXPECT_EQ(report.steps[0].space.pivots.size(), r);
    std::size_t survivors = report.reduced.component(6).terms().size();
    EXPECT_EQ(survivors, rows.size() - r);
    EXPECT_EQ(report.removed_terms.size(), r);
    EXPECT_TRUE(check_reduction(f.setup, report).passed);
}

TEST(Reduce, AllCriticalRemovesNothing) {
    auto psi = sextic(Rational(-1, 2), 1, Rational(3, 10), true);
    auto report = reduce(psi, 6, z2().setup);
    EXPECT_TRUE(report.generators.empty());
    EXPECT_TRUE(report.removed_terms.empty());
    EXPECT_EQ(report.violations, 0);
    EXPECT_EQ(report.non_removable.size(), 2u);
    EXPECT_EQ(report.reduced.psi, psi.psi);
}

TEST(Reduce, LinearTermRejected) {
    auto s3 = catalog::s3_perm();
    auto basis = compute_mib(s3);
    auto setup = reduction_setup(s3, basis);
    auto psi = graded_potential(jpoly("J1 + J2", 3), basis.degrees);
    try {
        reduce(psi, 4, setup);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidPotential);
    }
}

TEST(Verify, SexticSlope) {
    auto& f = z2();
    auto report = reduce(sextic(Rational(-3, 10), 1, Rational(1, 2)), 6, f.setup);
    auto v = check_reduction(f.setup, report);
    EXPECT_GE(v.min_slope, 7.0);
}

TEST(Verify, CorruptedGeneratorFails) {
    auto& f = z2();
    auto report = reduce(sextic(Rational(-3, 10), 1, Rational(1, 2)), 6, f.setup);
    report.generators[0].h_poly = report.generators[0].h_poly.scaled(Rational(11, 10));
    EXPECT_FALSE(verify_reduction(f.setup, report).passed);
    try {
        check_reduction(f.setup, report);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::VerificationFailed);
    }
}

TEST(Verify, ModelSamplesInParallel) {
    auto& f = z2();
    auto model = build_generic(f.rep, f.basis, 6);
    std::vector<ParameterValues> samples{{{"J1", Rational(-1, 2)}, {"J1^2", 1}, {"J1^3", Rational(3, 10)}},
                                         {{"J1", Rational(1, 5)}, {"J1^2", 1}, {"J1^3", Rational(-2, 5)}},
                                         {{"J1", 0}, {"J1^2", 1}, {"J1^3", 1}}};
    auto results = verify_reduction(model, samples, 6);
    ASSERT_EQ(results.size(), 3u);
    for (const auto& r : results) {
        EXPECT_GE(r.result.min_slope, 7.0);
        EXPECT_EQ(r.report.reduced.psi.coefficient(Monomial{3}), 0);
    }
}

TEST(Reduce, PitchforkPreserved) {
    auto& f = z2();
    for (Rational a : {Rational(-1, 2), Rational(-1, 5), Rational(-1, 20), Rational(1, 10), Rational(3, 10)}) {
        ParameterValues values{{"J1", a}, {"J1^2", 1}, {"J1^3", Rational(3, 10)}};
        auto model = build_generic(f.rep, f.basis, 6);
        auto report = reduce(model, values, 6);
        ParametricPolynomial reduced(1);
        reduced.add_constant(report.reduced.psi);
        auto rmodel = make_model(f.rep, f.basis, reduced, 6, {});
        auto orig = minimize(model, values).global();
        auto red = minimize(rmodel, {}).global();
        EXPECT_EQ(orig.symmetry, red.symmetry) << a.get_str();
        EXPECT_EQ(orig.symmetry == 0, a > 0) << a.get_str();
    }
}
