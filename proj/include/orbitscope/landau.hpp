#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "orbitscope/group.hpp"
#include "orbitscope/invariants.hpp"
#include "orbitscope/strata.hpp"

namespace orbitscope {

/// Values of named control parameters. Names absent from the map are zero.
using ParameterValues = std::map<std::string, Rational>;

/// psi = constant + sum_name lambda_name * part_name, all parts J-space.
class ParametricPolynomial {
public:
    ParametricPolynomial() = default;
    explicit ParametricPolynomial(int k) : k_(k), constant_(k, VariableKind::J) {}

    int variable_count() const noexcept { return k_; }

    void add(const std::string& name, const Polynomial& part) {
        constant_.check_compatible(part);
        auto it = std::find_if(parts_.begin(), parts_.end(), [&](const auto& p) { return p.first == name; });
        if (it == parts_.end())
            parts_.emplace_back(name, part);
        else
            it->second += part;
    }

    void add_constant(const Polynomial& part) { constant_ += part; }

    const Polynomial& constant_part() const noexcept { return constant_; }
    const std::vector<std::pair<std::string, Polynomial>>& parts() const noexcept { return parts_; }

    bool has(const std::string& name) const {
        return std::any_of(parts_.begin(), parts_.end(), [&](const auto& p) { return p.first == name; });
    }

    void check_names(const ParameterValues& values) const {
        for (const auto& [name, v] : values)
            if (!has(name)) throw Error(Errc::UnknownParameter, "model has no parameter '" + name + "'");
    }

    Polynomial at(const ParameterValues& values) const {
        check_names(values);
        Polynomial out = constant_;
        for (const auto& [name, part] : parts_) {
            auto it = values.find(name);
            if (it != values.end() && it->second != 0) out += part.scaled(it->second);
        }
        return out;
    }

private:
    int k_ = 0;
    Polynomial constant_{0, VariableKind::J};
    std::vector<std::pair<std::string, Polynomial>> parts_;
};

struct Coefficient {
    std::string name;
    Monomial monomial;
    int x_degree = 0;
    bool critical = false;
};

/// A Landau polynomial over an integrity basis together with the group data
/// needed to minimize and classify it.
struct LandauModel {
    FiniteGroupRep rep;
    IntegrityBasis basis;
    std::vector<SymmetryType> types;
    RationalMatrix eta_inv;
    ParametricPolynomial psi;
    int degree_x = 0;
    std::vector<Coefficient> coefficients;

    Polynomial psi_at(const ParameterValues& values) const { return psi.at(values); }
    Polynomial phi_at(const ParameterValues& values) const { return substitute_basis(psi.at(values), basis); }

    bool is_critical(const std::string& name) const {
        for (const auto& c : coefficients)
            if (c.name == name) return c.critical;
        throw Error(Errc::UnknownParameter, "model has no parameter '" + name + "'");
    }
};

/// Canonical name of a J-monomial coefficient, e.g. "J1^2*J3".
inline std::string monomial_name(const Monomial& m) {
    return to_string(Polynomial::monomial(static_cast<int>(m.size()), VariableKind::J, m));
}

/// Wraps an arbitrary parametric potential. Coefficient records are derived
/// from the monomial parts; `critical` lists the parameter names allowed to
/// vanish.
inline LandauModel make_model(const FiniteGroupRep& rep, const IntegrityBasis& basis, ParametricPolynomial psi,
                              int degree_x, const std::set<std::string>& critical) {
    LandauModel m{rep, basis, symmetry_types(rep), inverse_metric(rep), std::move(psi), degree_x, {}};
    for (const auto& [name, part] : m.psi.parts()) {
        Coefficient c;
        c.name = name;
        if (!part.is_zero()) {
            c.monomial = part.terms().begin()->first;
            c.x_degree = weighted_degree(c.monomial, basis.degrees);
        }
        c.critical = critical.count(name) > 0;
        m.coefficients.push_back(std::move(c));
    }
    for (const auto& name : critical)
        if (!m.psi.has(name)) throw Error(Errc::UnknownParameter, "model has no parameter '" + name + "'");
    return m;
}

/// Every J-monomial of x-degree 2..degree_x with its own coefficient, named by
/// the monomial text. degree_x defaults to twice the top basis degree. Unless
/// `critical` is given, the coefficients of lowest x-degree are critical.
inline LandauModel build_generic(const FiniteGroupRep& rep, const IntegrityBasis& basis, int degree_x = -1,
                                 std::optional<std::set<std::string>> critical = std::nullopt) {
    if (basis.basis.empty()) throw Error(Errc::InvalidArgument, "empty integrity basis");
    if (degree_x < 0) degree_x = 2 * basis.degrees.back();
    const int k = basis.size();
    ParametricPolynomial psi(k);
    int lowest = -1;
    for (int w = 2; w <= degree_x; ++w) {
        auto mons = monomials_of_weight(basis.degrees, w);
        for (const auto& m : mons) psi.add(monomial_name(m), Polynomial::monomial(k, VariableKind::J, m));
        if (lowest < 0 && !mons.empty()) lowest = w;
    }
    std::set<std::string> crit;
    if (critical) {
        crit = *critical;
    } else {
        for (const auto& m : monomials_of_weight(basis.degrees, lowest)) crit.insert(monomial_name(m));
    }
    return make_model(rep, basis, std::move(psi), degree_x, crit);
}

// --- floating evaluation of the potential ------------------------------------

/// Phi, its gradient, Hessian and descent field in double precision.
class PotentialEvaluator {
public:
    PotentialEvaluator(const Polynomial& phi, const RationalMatrix& eta_inv) : n_(phi.variable_count()), phi_(phi) {
        eta_inv_ = Eigen::MatrixXd(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                eta_inv_(i, j) = eta_inv(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).get_d();
        for (int i = 0; i < n_; ++i) {
            Polynomial di = phi.derivative(i);
            grad_.emplace_back(di);
            for (int j = 0; j < n_; ++j) hess_.emplace_back(di.derivative(j));
        }
    }

    int dim() const noexcept { return n_; }

    double value(std::span<const double> x) const { return phi_(x); }

    Eigen::VectorXd gradient(std::span<const double> x) const {
        Eigen::VectorXd g(n_);
        for (int i = 0; i < n_; ++i) g(i) = grad_[static_cast<std::size_t>(i)](x);
        return g;
    }

    Eigen::MatrixXd hessian(std::span<const double> x) const {
        Eigen::MatrixXd h(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) h(i, j) = hess_[static_cast<std::size_t>(i * n_ + j)](x);
        return h;
    }

    /// f(x) = -eta^{-1} grad Phi(x); minima of Phi are its attractors.
    Eigen::VectorXd field(std::span<const double> x) const { return -(eta_inv_ * gradient(x)); }

    const Eigen::MatrixXd& eta_inv() const noexcept { return eta_inv_; }

private:
    int n_;
    NumericPolynomial<double> phi_;
    std::vector<NumericPolynomial<double>> grad_;
    std::vector<NumericPolynomial<double>> hess_;
    Eigen::MatrixXd eta_inv_;
};

inline PotentialEvaluator evaluator(const LandauModel& model, const ParameterValues& values) {
    return PotentialEvaluator(model.phi_at(values), model.eta_inv);
}

namespace detail {

inline std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline Eigen::MatrixXd to_eigen(const RationalMatrix& m) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j).get_d();
    return out;
}

/// Points spread over the ball of the given radius: a Halton sequence with a
/// seeded Cranley-Patterson shift, pushed radially from the cube onto the ball.
inline std::vector<Eigen::VectorXd> ball_starts(int n, int count, double radius, std::uint64_t seed) {
    static constexpr std::array<int, 16> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    if (n > static_cast<int>(primes.size())) throw Error(Errc::InvalidArgument, "too many dimensions for start points");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> shift(static_cast<std::size_t>(n));
    for (auto& s : shift) s = unit(rng);
    std::vector<Eigen::VectorXd> out;
    for (int i = 1; i <= count; ++i) {
        Eigen::VectorXd y(n);
        for (int d = 0; d < n; ++d) {
            double h = 0, f = 1;
            const int b = primes[static_cast<std::size_t>(d)];
            for (int j = i; j > 0; j /= b) {
                f /= b;
                h += f * (j % b);
            }
            double u = h + shift[static_cast<std::size_t>(d)];
            u -= std::floor(u);
            y(d) = 2 * u - 1;
        }
        const double inf = y.cwiseAbs().maxCoeff(), two = y.norm();
        if (two > 0) y *= radius * inf / two;
        out.push_back(std::move(y));
    }
    return out;
}

} // namespace detail

// --- stability ----------------------------------------------------------------

struct StabilityReport {
    bool stable = true;
    double radius = 0;
    int samples = 0;
    /// Smallest <x, eta^{-1} grad Phi(x)> seen on the sphere.
    double min_margin = std::numeric_limits<double>::infinity();
    /// Sphere points where the descent flow does not point inwards.
    std::vector<std::vector<double>> witnesses;
};

/// Samples the sphere |x| = radius (coordinate directions plus seeded random
/// ones) and checks that the descent flow -eta^{-1} grad Phi points inwards.
inline StabilityReport check_stability(const LandauModel& model, const ParameterValues& values, double radius,
                                       int samples = 256, std::uint64_t seed = 1) {
    auto ev = evaluator(model, values);
    const int n = model.rep.dim();
    std::vector<Eigen::VectorXd> dirs;
    for (int i = 0; i < n; ++i)
        for (double s : {1.0, -1.0}) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
            e(i) = s;
            dirs.push_back(e);
        }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    while (static_cast<int>(dirs.size()) < samples) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = normal(rng);
        if (v.norm() > 0) dirs.push_back(v / v.norm());
    }
    StabilityReport report;
    report.radius = radius;
    report.samples = static_cast<int>(dirs.size());
    for (const auto& d : dirs) {
        Eigen::VectorXd x = radius * d;
        double margin = -x.dot(ev.field(detail::as_span(x)));
        report.min_margin = std::min(report.min_margin, margin);
        if (!(margin > 0)) {
            report.stable = false;
            if (report.witnesses.size() < 8) report.witnesses.push_back(detail::to_std(x));
        }
    }
    return report;
}

// --- symmetry classification --------------------------------------------------

inline Subgroup numeric_isotropy(const FiniteGroupRep& rep, std::span<const double> x, double tol) {
    check_point_dim(rep, x.size());
    Eigen::VectorXd v = detail::to_eigen(x);
    const double scale = v.norm();
    Subgroup h;
    for (int g = 0; g < rep.order(); ++g) {
        Eigen::VectorXd diff = detail::to_eigen(rep.matrix(g)) * v - v;
        if (diff.norm() <= tol * scale) h.members.push_back(g);
    }
    return h;
}

/// Type of {g : |T_g x - x| <= tol |x|}. Fails when that set is not a subgroup.
inline const SymmetryType& classify_symmetry(const FiniteGroupRep& rep, const std::vector<SymmetryType>& types,
                                             std::span<const double> x, double tol = 1e-8) {
    for (double c : x)
        if (!std::isfinite(c)) throw Error(Errc::NonFiniteState, "cannot classify a non-finite point");
    Subgroup h = numeric_isotropy(rep, x, tol);
    if (!rep.is_subgroup(h))
        throw Error(Errc::AmbiguousClassification,
                    "near-fixing elements do not form a subgroup at tol " + std::to_string(tol));
    int i = type_index(types, h);
    if (i < 0) throw Error(Errc::AmbiguousClassification, "isotropy set has no symmetry type");
    return types[static_cast<std::size_t>(i)];
}

inline const SymmetryType& classify_symmetry(const LandauModel& model, std::span<const double> x, double tol = 1e-8) {
    return classify_symmetry(model.rep, model.types, x, tol);
}

// --- minimization -----------------------------------------------------------------

enum class CriticalKind { Minimum, Maximum, Saddle, Marginal };

inline const char* to_string(CriticalKind k) {
    switch (k) {
    case CriticalKind::Minimum: return "minimum";
    case CriticalKind::Maximum: return "maximum";
    case CriticalKind::Saddle: return "saddle";
    case CriticalKind::Marginal: return "marginal";
    }
    return "?";
}

struct Inertia {
    int negative = 0;
    int zero = 0;
    int positive = 0;
};

struct CriticalPoint {
    std::vector<double> location;
    double value = 0;
    double gradient_norm = 0;
    Inertia inertia;
    CriticalKind kind = CriticalKind::Marginal;
    int symmetry = -1;
    int orbit_size = 0;
};

struct MinimizeOptions {
    /// 0 means 16 * k.
    int starts = 0;
    double radius = 2.0;
    std::uint64_t seed = 1;
    double gradient_tol = 1e-10;
    double cluster_tol = 1e-7;
    double symmetry_tol = 1e-8;
    double marginal_tol = 1e-8;
    double snap_tol = 1e-9;
    int max_iterations = 500;
    double escape_factor = 10.0;
};

struct MinimizeResult {
    std::vector<CriticalPoint> points;
    int starts = 0;
    int converged = 0;
    /// Starts that ended above gradient_tol.
    std::vector<std::vector<double>> unconverged;

    const CriticalPoint& global() const {
        if (points.empty()) throw Error(Errc::NoConvergence, "no critical point found");
        return points.front();
    }
};

inline Inertia hessian_inertia(const Eigen::MatrixXd& h, double marginal_tol) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
    Inertia in;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double e = es.eigenvalues()(i);
        if (std::abs(e) < marginal_tol)
            ++in.zero;
        else if (e < 0)
            ++in.negative;
        else
            ++in.positive;
    }
    return in;
}

inline CriticalKind kind_of(const Inertia& in) {
    if (in.zero > 0) return CriticalKind::Marginal;
    if (in.negative == 0) return CriticalKind::Minimum;
    if (in.positive == 0) return CriticalKind::Maximum;
    return CriticalKind::Saddle;
}

namespace detail {

/// Backtracking descent (Newton direction when the Hessian is positive
/// definite) followed by Newton polishing. Returns the end point.
inline Eigen::VectorXd descend(const PotentialEvaluator& ev, Eigen::VectorXd x, const MinimizeOptions& opt,
                               double escape_radius) {
    const int n = ev.dim();
    double f = ev.value(as_span(x));
    for (int it = 0; it < opt.max_iterations; ++it) {
        Eigen::VectorXd g = ev.gradient(as_span(x));
        if (!g.allFinite() || !std::isfinite(f)) throw Error(Errc::NonFiniteState, "potential became non-finite");
        if (g.norm() <= opt.gradient_tol * 1e-3) break;
        Eigen::VectorXd dir = -g;
        Eigen::LLT<Eigen::MatrixXd> llt(ev.hessian(as_span(x)));
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd nd = llt.solve(-g);
            if (nd.allFinite() && nd.dot(g) < 0) dir = nd;
        }
        double step = 1.0, slope = dir.dot(g);
        Eigen::VectorXd trial;
        double ft = f;
        bool moved = false;
        for (int k = 0; k < 60; ++k) {
            trial = x + step * dir;
            ft = ev.value(as_span(trial));
            if (std::isfinite(ft) && ft <= f + 1e-4 * step * slope) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        if (trial.norm() > escape_radius)
            throw Error(Errc::StabilityViolation, "descent left the ball of radius " + std::to_string(escape_radius));
        const double change = (trial - x).norm();
        x = trial;
        f = ft;
        if (change <= 1e-16 * std::max(1.0, x.norm())) break;
    }
    // Newton polish: continue while the gradient keeps shrinking.
    for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd g = ev.gradient(as_span(x));
        if (g.norm() == 0) break;
        Eigen::VectorXd step = ev.hessian(as_span(x)).fullPivLu().solve(-g);
        if (!step.allFinite()) break;
        Eigen::VectorXd trial = x + step;
        if (!(ev.gradient(as_span(trial)).norm() < g.norm())) break;
        x = trial;
        if (step.norm() <= 1e-17 * std::max(1.0, x.norm())) break;
    }
    (void)n;
    return x;
}

/// The lexicographically largest orbit point, compared with a small tolerance
/// so rounding noise does not change the choice.
inline Eigen::VectorXd orbit_representative(const std::vector<Eigen::MatrixXd>& mats, const Eigen::VectorXd& x) {
    Eigen::VectorXd best = x;
    for (const auto& m : mats) {
        Eigen::VectorXd y = m * x;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (std::abs(y(i) - best(i)) <= 1e-9 * std::max(1.0, std::abs(best(i)))) continue;
            if (y(i) > best(i)) best = y;
            break;
        }
    }
    return best;
}

} // namespace detail

/// Multistart local descent plus Newton polishing on Phi in x-space. Critical
/// points are merged by orbit, classified, and sorted by value, then location.
/// The origin is always examined since Landau potentials have no linear term.
inline MinimizeResult minimize(const LandauModel& model, const ParameterValues& values,
                               const MinimizeOptions& options = {}) {
    const auto ev = evaluator(model, values);
    const int n = model.rep.dim();
    const int count = options.starts > 0 ? options.starts : 16 * model.basis.size();
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& e : model.rep.elements()) mats.push_back(detail::to_eigen(e.matrix));

    MinimizeResult result;
    result.starts = count;
    std::vector<Eigen::VectorXd> found;
    auto add_candidate = [&](Eigen::VectorXd x) {
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (std::abs(x(i)) <= options.snap_tol) x(i) = 0;
        if (x.norm() <= options.snap_tol) x.setZero();
        const double gnorm = ev.gradient(detail::as_span(x)).norm();
        const double scale = std::max(1.0, std::abs(ev.value(detail::as_span(x))));
        if (!(gnorm <= options.gradient_tol * scale)) {
            result.unconverged.push_back(detail::to_std(x));
            return;
        }
        ++result.converged;
        for (const auto& y : found)
            for (const auto& m : mats)
                if ((m * x - y).norm() <= options.cluster_tol * std::max(1.0, x.norm())) return;
        found.push_back(detail::orbit_representative(mats, x));
    };

    add_candidate(Eigen::VectorXd::Zero(n));
    for (const auto& start : detail::ball_starts(n, count, options.radius, options.seed))
        add_candidate(detail::descend(ev, start, options, options.escape_factor * options.radius));
    if (found.empty())
        throw Error(Errc::NoConvergence, std::to_string(result.unconverged.size()) + " starts did not converge");

    for (const auto& x : found) {
        CriticalPoint cp;
        cp.location = detail::to_std(x);
        cp.value = ev.value(detail::as_span(x));
        cp.gradient_norm = ev.gradient(cp.location).norm();
        cp.inertia = hessian_inertia(ev.hessian(cp.location), options.marginal_tol);
        cp.kind = kind_of(cp.inertia);
        const auto& t = classify_symmetry(model, cp.location, options.symmetry_tol);
        cp.symmetry = t.id;
        cp.orbit_size = model.rep.order() / static_cast<int>(t.order());
        result.points.push_back(std::move(cp));
    }
    std::stable_sort(result.points.begin(), result.points.end(), [](const CriticalPoint& a, const CriticalPoint& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.location < b.location;
    });
    return result;
}

// --- sweeps -------------------------------------------------------------------

struct PhasePoint {
    Rational parameter;
    /// -1 when minimization failed at this point.
    int symmetry = -1;
    double min_value = 0;
    std::vector<double> minimizer;
    std::string error;
};

struct Transition {
    Rational lo, hi;
    int from = -1, to = -1;
    Rational estimate() const { return (lo + hi) / 2; }
};

struct PhaseDiagram {
    std::string parameter;
    std::vector<PhasePoint> points;
    std::vector<Transition> transitions;
};

struct SweepOptions {
    MinimizeOptions minimize;
    /// Transitions are bisected until the bracketing interval is this narrow.
    double bisection_width = 1e-7;
};

/// Evenly spaced exact grid lo, ..., hi with `steps` points.
inline std::vector<Rational> linear_grid(const Rational& lo, const Rational& hi, int steps) {
    if (steps < 1) throw Error(Errc::InvalidArgument, "grid needs at least one point");
    std::vector<Rational> out;
    if (steps == 1) return {lo};
    for (int i = 0; i < steps; ++i) out.push_back(lo + (hi - lo) * Rational(i, steps - 1));
    return out;
}

inline PhasePoint phase_point(const LandauModel& model, ParameterValues values, const std::string& name,
                              const Rational& v, const MinimizeOptions& opt) {
    PhasePoint p;
    p.parameter = v;
    values[name] = v;
    try {
        auto r = minimize(model, values, opt);
        const auto& best = r.global();
        p.symmetry = best.symmetry;
        p.min_value = best.value;
        p.minimizer = best.location;
    } catch (const Error& e) {
        p.error = e.qualified() + ": " + e.detail();
    }
    return p;
}

/// Global-minimizer symmetry type along a grid of one parameter; each type
/// change between neighbouring grid points is bisected down to the requested
/// width. Errors at individual points are recorded and the sweep continues.
inline PhaseDiagram sweep(const LandauModel& model, const ParameterValues& fixed, const std::string& name,
                          const std::vector<Rational>& grid, const SweepOptions& options = {}) {
    model.psi.check_names(fixed);
    if (!model.psi.has(name)) throw Error(Errc::UnknownParameter, "model has no parameter '" + name + "'");
    PhaseDiagram out;
    out.parameter = name;
    for (const auto& v : grid) out.points.push_back(phase_point(model, fixed, name, v, options.minimize));
    for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
        const auto& a = out.points[i];
        const auto& b = out.points[i + 1];
        if (a.symmetry < 0 || b.symmetry < 0 || a.symmetry == b.symmetry) continue;
        Transition t{a.parameter, b.parameter, a.symmetry, b.symmetry};
        while (Rational(abs(t.hi - t.lo)).get_d() > options.bisection_width) {
            Rational mid = (t.lo + t.hi) / 2;
            auto p = phase_point(model, fixed, name, mid, options.minimize);
            if (p.symmetry < 0) break;
            if (p.symmetry == t.from)
                t.lo = mid;
            else
                t.hi = mid;
            if (p.symmetry != t.from && p.symmetry != t.to) t.to = p.symmetry;
        }
        out.transitions.push_back(t);
    }
    return out;
}

// --- critical orbit verification ----------------------------------------------

struct RayCheck {
    int type = -1;
    std::vector<double> direction;
    /// Signed radii r != 0 with d/dr Phi(r u) = 0.
    std::vector<double> critical_radii;
    /// Largest tangential part of eta^{-1} grad Phi over the checked points,
    /// relative to max(1, |eta^{-1} grad Phi|).
    double max_residual = 0;
    bool passed = true;
};

struct CriticalOrbitReport {
    std::vector<RayCheck> rays;
    bool passed = true;
};

/// Along each fixed line the restriction of Phi is scanned for interior
/// critical points, and the gradient is checked to be parallel to the line at
/// those points and at a few fixed radii.
inline CriticalOrbitReport verify_critical_orbits(const LandauModel& model, const ParameterValues& values,
                                                  const PrincipalCriticalOrbitSet& orbits, double tol = 1e-9,
                                                  double radius = 2.0) {
    auto ev = evaluator(model, values);
    CriticalOrbitReport report;
    for (const auto& ray : orbits.rays) {
        RayCheck rc;
        rc.type = ray.type;
        rc.direction = ray.unit;
        Eigen::VectorXd u = detail::to_eigen(ray.unit);
        auto radial = [&](double r) {
            Eigen::VectorXd x = r * u;
            return ev.gradient(detail::as_span(x)).dot(u);
        };
        const int grid = 2000;
        for (int side : {1, -1}) {
            double prev_r = side * radius / grid, prev = radial(prev_r);
            for (int i = 2; i <= grid; ++i) {
                double r = side * radius * i / grid, cur = radial(r);
                if (prev == 0 || (prev < 0) != (cur < 0)) {
                    double lo = prev_r, hi = r, flo = prev;
                    for (int k = 0; k < 200 && hi != lo; ++k) {
                        double mid = 0.5 * (lo + hi), fm = radial(mid);
                        if ((fm < 0) == (flo < 0) && fm != 0) {
                            lo = mid;
                            flo = fm;
                        } else {
                            hi = mid;
                        }
                        if (std::abs(hi - lo) <= 1e-15 * std::abs(hi)) break;
                    }
                    rc.critical_radii.push_back(0.5 * (lo + hi));
                }
                prev_r = r;
                prev = cur;
            }
        }
        std::vector<double> checks = rc.critical_radii;
        for (double r : {0.25, 0.5, 1.0, -0.75}) checks.push_back(r * radius);
        for (double r : checks) {
            Eigen::VectorXd x = r * u;
            Eigen::VectorXd g = -ev.field(detail::as_span(x));
            double res = tangential_residual(detail::as_span(g), ray.unit) / std::max(1.0, g.norm());
            rc.max_residual = std::max(rc.max_residual, res);
        }
        rc.passed = rc.max_residual <= tol;
        report.passed = report.passed && rc.passed;
        report.rays.push_back(std::move(rc));
    }
    return report;
}

} // namespace orbitscope
