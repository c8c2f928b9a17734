#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orbitscope/landau.hpp"

namespace orbitscope {

/// An autonomous field x' = f(x). `energy` is set for gradient fields only.
struct VectorField {
    int dim = 0;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f;
    std::function<double(const Eigen::VectorXd&)> energy;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return f(x); }
    bool is_gradient() const noexcept { return static_cast<bool>(energy); }
};

/// f = -eta~ grad Phi, so that minima of Phi attract.
inline VectorField gradient_field(const PotentialEvaluator& ev) {
    auto shared = std::make_shared<PotentialEvaluator>(ev);
    VectorField out;
    out.dim = ev.dim();
    out.f = [shared](const Eigen::VectorXd& x) { return shared->field(detail::as_span(x)); };
    out.energy = [shared](const Eigen::VectorXd& x) { return shared->value(detail::as_span(x)); };
    return out;
}

inline VectorField gradient_field(const LandauModel& model, const ParameterValues& values) {
    return gradient_field(evaluator(model, values));
}

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    double dt = 0;
    std::string integrator = "rk4";
    /// Steps that needed substeps to keep the energy from rising.
    int refined_steps = 0;

    std::size_t size() const noexcept { return times.size(); }
};

struct IntegrateOptions {
    /// Allowed energy increase per step.
    double energy_slack = 1e-9;
    /// A failing step is retried with 2, 4, ... 2^max_halvings substeps.
    int max_halvings = 8;
};

namespace detail {

inline Eigen::VectorXd rk4_step(const VectorField& field, const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd k1 = field(x);
    Eigen::VectorXd k2 = field(x + 0.5 * h * k1);
    Eigen::VectorXd k3 = field(x + 0.5 * h * k2);
    Eigen::VectorXd k4 = field(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline bool finite(const Eigen::VectorXd& x) { return x.allFinite(); }

} // namespace detail

/// Fixed-step classical Runge-Kutta. Samples are taken at t = i * dt.
inline Trajectory integrate(const VectorField& field, std::span<const double> x0, double t_end, double dt,
                            const IntegrateOptions& options = {}) {
    if (!(dt > 0) || !std::isfinite(dt)) throw Error(Errc::InvalidArgument, "dt must be positive");
    if (!(t_end >= 0) || !std::isfinite(t_end)) throw Error(Errc::InvalidArgument, "t_end must be nonnegative");
    if (static_cast<int>(x0.size()) != field.dim) throw Error(Errc::DimensionMismatch, "initial state dimension");
    Eigen::VectorXd x = detail::to_eigen(x0);
    if (!detail::finite(x)) throw Error(Errc::NonFiniteState, "initial state is not finite");

    Trajectory out;
    out.dt = dt;
    const auto steps = static_cast<long>(std::llround(t_end / dt));
    out.times.reserve(static_cast<std::size_t>(steps) + 1);
    out.states.reserve(static_cast<std::size_t>(steps) + 1);
    out.times.push_back(0.0);
    out.states.push_back(detail::to_std(x));
    double e = field.is_gradient() ? field.energy(x) : 0.0;
    for (long i = 1; i <= steps; ++i) {
        Eigen::VectorXd next = detail::rk4_step(field, x, dt);
        if (field.is_gradient()) {
            int halvings = 0;
            while (!(detail::finite(next) && field.energy(next) <= e + options.energy_slack)) {
                if (++halvings > options.max_halvings)
                    throw Error(Errc::MonotonicityViolation,
                                "energy increased at t = " + std::to_string(static_cast<double>(i) * dt) +
                                    " after step refinement");
                const long sub = 1L << halvings;
                const double h = dt / static_cast<double>(sub);
                next = x;
                for (long j = 0; j < sub; ++j) next = detail::rk4_step(field, next, h);
            }
            if (halvings > 0) ++out.refined_steps;
        }
        if (!detail::finite(next))
            throw Error(Errc::NonFiniteState, "state became non-finite at t = " + std::to_string(static_cast<double>(i) * dt));
        x = std::move(next);
        if (field.is_gradient()) e = field.energy(x);
        out.times.push_back(static_cast<double>(i) * dt);
        out.states.push_back(detail::to_std(x));
    }
    return out;
}

/// Independent trajectories, one task each.
inline std::vector<Trajectory> integrate_many(const VectorField& field, const std::vector<std::vector<double>>& starts,
                                              double t_end, double dt, const IntegrateOptions& options = {}) {
    std::vector<std::future<Trajectory>> jobs;
    for (const auto& x0 : starts)
        jobs.push_back(std::async(std::launch::async, [&field, &x0, t_end, dt, options] {
            return integrate(field, x0, t_end, dt, options);
        }));
    std::vector<Trajectory> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

// --- invariance of fixed spaces -------------------------------------------------------

struct StratumInvarianceReport {
    int samples = 0;
    /// Largest component of f(x) orthogonal to Fix(H), x in Fix(H).
    double max_field_residual = 0;
    /// Largest distance of a trajectory point from Fix(H).
    double max_trajectory_residual = 0;
    std::vector<std::string> violations;
    bool passed = true;
};

struct StratumCheckOptions {
    int samples = 8;
    std::uint64_t seed = 3;
    double radius = 1.0;
    double t_end = 2.0;
    double dt = 1e-2;
    double field_tol = 1e-10;
    double trajectory_tol = 1e-8;
};

namespace detail {

/// Orthogonal projector onto the span of the given vectors.
inline Eigen::MatrixXd projector(const std::vector<RationalVector>& basis, int n) {
    if (basis.empty()) return Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd b(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (int i = 0; i < n; ++i) b(i, static_cast<Eigen::Index>(j)) = basis[j][static_cast<std::size_t>(i)].get_d();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, b.cols());
    return q * q.transpose();
}

} // namespace detail

/// Checks that Fix(H) is invariant: the field is tangent to it and
/// trajectories started in it stay there.
inline StratumInvarianceReport check_stratum_invariance(const FiniteGroupRep& rep, const VectorField& field,
                                                        const Subgroup& h, const StratumCheckOptions& options = {}) {
    if (!rep.is_subgroup(h)) throw Error(Errc::NotASubgroup, "element set is not a subgroup");
    const int n = rep.dim();
    const auto basis = fixed_subspace(rep, h);
    const Eigen::MatrixXd proj = detail::projector(basis, n);
    const Eigen::MatrixXd perp = Eigen::MatrixXd::Identity(n, n) - proj;

    StratumInvarianceReport out;
    std::vector<Eigen::VectorXd> points;
    if (basis.empty()) {
        points.push_back(Eigen::VectorXd::Zero(n));
    } else {
        std::mt19937_64 rng(options.seed);
        std::normal_distribution<double> normal;
        for (int s = 0; s < options.samples; ++s) {
            Eigen::VectorXd x = proj * Eigen::VectorXd::NullaryExpr(n, [&] { return normal(rng); });
            if (x.norm() > 0) x *= options.radius / x.norm();
            points.push_back(x);
        }
    }
    for (const auto& x : points) {
        ++out.samples;
        const double fr = (perp * field(x)).norm();
        out.max_field_residual = std::max(out.max_field_residual, fr);
        if (fr > options.field_tol) out.violations.push_back("field leaves Fix(H): residual " + std::to_string(fr));
        if (basis.empty()) continue;
        auto traj = integrate(field, detail::as_span(x), options.t_end, options.dt);
        double worst = 0;
        for (const auto& s : traj.states) worst = std::max(worst, (perp * detail::to_eigen(s)).norm());
        out.max_trajectory_residual = std::max(out.max_trajectory_residual, worst);
        if (worst > options.trajectory_tol)
            out.violations.push_back("trajectory leaves Fix(H): distance " + std::to_string(worst));
    }
    out.passed = out.violations.empty();
    return out;
}

// --- orbit space ---------------------------------------------------------------------

struct OrbitSpaceTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> j_states;
};

inline OrbitSpaceTrajectory project_trajectory(const IntegrityBasis& basis, const Trajectory& traj) {
    OrbitSpaceTrajectory out;
    out.times = traj.times;
    for (const auto& x : traj.states) out.j_states.push_back(orbit_map(basis, std::span<const double>(x)));
    return out;
}

struct ConsistencyReport {
    /// max over interior samples of |central difference of J - DJ(x) f(x)|.
    double max_residual = 0;
    /// Largest rise of psi(J) between samples (gradient fields only).
    double max_energy_increase = 0;
    bool energy_monotone = true;
};

/// Compares d/dt J(x(t)) by central differences with DJ(x) f(x). psi, when
/// given, is the orbit-space potential whose values must not increase.
inline ConsistencyReport orbit_space_consistency(const IntegrityBasis& basis, const VectorField& field,
                                                 const Trajectory& traj, const Polynomial* psi = nullptr,
                                                 double energy_slack = 1e-9) {
    const auto proj = project_trajectory(basis, traj);
    const int k = basis.size();
    std::vector<std::vector<NumericPolynomial<double>>> dj(static_cast<std::size_t>(k));
    for (int a = 0; a < k; ++a)
        for (const auto& d : gradient(basis.basis[static_cast<std::size_t>(a)])) dj[static_cast<std::size_t>(a)].emplace_back(d);

    ConsistencyReport out;
    for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
        const auto& x = traj.states[i];
        Eigen::VectorXd f = field(detail::to_eigen(x));
        const double h = traj.times[i + 1] - traj.times[i - 1];
        for (int a = 0; a < k; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            double exact = 0;
            for (std::size_t j = 0; j < x.size(); ++j) exact += dj[ua][j](x) * f(static_cast<Eigen::Index>(j));
            const double fd = (proj.j_states[i + 1][ua] - proj.j_states[i - 1][ua]) / h;
            out.max_residual = std::max(out.max_residual, std::fabs(fd - exact));
        }
    }
    if (psi) {
        const NumericPolynomial<double> p(*psi);
        for (std::size_t i = 1; i < proj.j_states.size(); ++i) {
            const double rise = p(proj.j_states[i]) - p(proj.j_states[i - 1]);
            out.max_energy_increase = std::max(out.max_energy_increase, rise);
        }
        out.energy_monotone = out.max_energy_increase <= energy_slack;
    }
    return out;
}

} // namespace orbitscope
