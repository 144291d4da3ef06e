#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "elsim/lc_tensors.hpp"
#include "elsim/mollifier.hpp"
#include "elsim/state.hpp"

namespace elsim {

/// Step rejected because dt * max|a| / dx exceeded the guard.
class CflViolation : public std::runtime_error {
public:
    CflViolation(const std::string& what, double advisory_dt)
        : std::runtime_error(what), advisory_dt_(advisory_dt) {}
    double advisory_dt() const { return advisory_dt_; }

private:
    double advisory_dt_;
};

/// A non-finite value appeared; `term()` names the offending piece.
class NumericalBreakdown : public std::runtime_error {
public:
    explicit NumericalBreakdown(const std::string& term)
        : std::runtime_error("non-finite value in " + term), term_(term) {}
    const std::string& term() const { return term_; }

private:
    std::string term_;
};

enum class SolverMode { direct, mollified };

inline const char* to_string(SolverMode m) { return m == SolverMode::direct ? "direct" : "mollified"; }

inline SolverMode solver_mode_from_string(const std::string& s)
{
    if (s == "direct")
        return SolverMode::direct;
    if (s == "mollified")
        return SolverMode::mollified;
    throw InvalidArgument("solver.mode must be 'direct' or 'mollified'");
}

struct SolverConfig {
    double dt = 1e-3;
    double t_end = 0.0;
    SolverMode mode = SolverMode::direct;
    double theta = 0.0;  // mollified mode only
    Discretization discretization = Discretization::spectral;
    int snapshot_every = 0;  // steps between snapshots; 0 keeps only first and last
    double cfl_guard = 0.5;
    // Use grad Psi[d] (true) or grad d (false) in the Ericksen force.
    bool mollify_ericksen_gradient = true;

    void validate() const
    {
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw InvalidArgument("solver.dt must be positive");
        if (!(t_end >= 0.0) || !std::isfinite(t_end))
            throw InvalidArgument("solver.t_end must be nonnegative");
        if (!(cfl_guard > 0.0))
            throw InvalidArgument("solver.cfl_guard must be positive");
        if (snapshot_every < 0)
            throw InvalidArgument("diagnostics.snapshot_every must be nonnegative");
        if (mode == SolverMode::mollified) {
            if (!(theta > 0.0 && theta <= 1.0))
                throw InvalidArgument("solver.theta must lie in (0, 1] in mollified mode");
            if (dt > 0.25 * theta * (1.0 + 1e-12))
                throw InvalidArgument("solver.dt must not exceed theta/4 in mollified mode");
        }
    }
};

/// Body forces added to the director and velocity equations, evaluated at
/// the new time level. Used by manufactured-solution studies.
struct Forcing {
    std::function<VectorField(const Grid&, double)> velocity;
    std::function<VectorField(const Grid&, double)> director;
};

namespace detail {

inline void require_finite(const VectorField& f, const char* term)
{
    if (!f.all_finite())
        throw NumericalBreakdown(term);
}

inline void require_finite(const ScalarField& f, const char* term)
{
    if (!f.all_finite())
        throw NumericalBreakdown(term);
}

} // namespace detail

/// Inputs of one step that depend on the mode: the velocity transporting
/// momentum and the director entering the couplings.
struct StepCoefficients {
    VectorField transport_velocity;
    VectorField director;
};

/// One semi-implicit step from `s` with the given couplings.
///
/// Director: (I - gamma dt Lap) d+ = d + dt (-u . grad de + T[grad u, de] - gamma f(d)).
/// Velocity: (I - nu dt Lap) u* = u + dt (-a . grad u - lambda grad de^T h - lambda div S[h, de]),
/// with h = Lap d+ - f(d), followed by the Leray projection; the projection
/// potential divided by dt is the pressure.
inline SimState step_with(const SimState& s, const SolverConfig& cfg, const StepCoefficients& coef,
                          bool mollify_ericksen_gradient = true, const Forcing* forcing = nullptr)
{
    const Grid& g = s.grid();
    const auto disc = cfg.discretization;
    const ModelParams& prm = s.params;
    const double dt = cfg.dt;

    const double speed = std::max(s.u.max_norm(), coef.transport_velocity.max_norm());
    const double cfl = dt * speed / g.min_dx();
    if (cfl > cfg.cfl_guard) {
        const double advisory = 0.9 * cfg.cfl_guard * g.min_dx() / speed;
        throw CflViolation("CFL guard exceeded (" + detail::format_time(cfl) + " > "
                               + detail::format_time(cfg.cfl_guard) + "); advisory dt "
                               + detail::format_time(advisory),
                           advisory);
    }
    const double t_new = s.t + dt;

    // (1) director
    const TensorField grad_u = gradient(s.u, disc);
    const TensorField grad_de = gradient(coef.director, disc);
    const VectorField f_old = gl_force(s.d);
    VectorField rhs_d = advect(s.u, grad_de);
    rhs_d *= -1.0;
    rhs_d += kinematic_transport(grad_u, coef.director, prm.alpha);
    rhs_d.axpy(-prm.gamma, f_old);
    if (forcing && forcing->director)
        rhs_d += forcing->director(g, t_new);
    detail::require_finite(rhs_d, "director transport");
    VectorField d_new = s.d;
    d_new.axpy(dt, rhs_d);
    d_new = solve_shifted_laplacian(d_new, prm.gamma * dt, disc);
    detail::require_finite(d_new, "director update");

    // (2) tentative velocity
    VectorField h = laplacian(d_new, disc);
    h -= f_old;
    const VectorField ericksen =
        apply_transpose(mollify_ericksen_gradient ? grad_de : gradient(s.d, disc), h);
    detail::require_finite(ericksen, "Ericksen force");
    const VectorField stress_div = divergence_tensor(leslie_stress(h, coef.director, prm.alpha), disc);
    detail::require_finite(stress_div, "Leslie stress divergence");
    VectorField rhs_u = advect(coef.transport_velocity, grad_u);
    detail::require_finite(rhs_u, "momentum advection");
    rhs_u *= -1.0;
    rhs_u.axpy(-prm.lambda, ericksen);
    rhs_u.axpy(-prm.lambda, stress_div);
    if (forcing && forcing->velocity)
        rhs_u += forcing->velocity(g, t_new);
    VectorField u_star = s.u;
    u_star.axpy(dt, rhs_u);
    u_star = solve_shifted_laplacian(u_star, prm.nu * dt, disc);
    detail::require_finite(u_star, "velocity update");

    // (3) projection
    HelmholtzParts parts = helmholtz_decompose(u_star, disc);
    parts.potential *= 1.0 / dt;
    detail::require_finite(parts.potential, "pressure");
    return SimState(std::move(parts.solenoidal), std::move(d_new), std::move(parts.potential), t_new, prm);
}

/// Direct-mode step.
inline SimState step(const SimState& s, const SolverConfig& cfg, const Forcing* forcing = nullptr)
{
    return step_with(s, cfg, {s.u, s.d}, true, forcing);
}

/// Stateful stepper. In mollified mode it owns the history of accepted
/// states and the discretized kernel.
class Solver {
public:
    Solver(const SolverConfig& cfg, const Grid& grid) : cfg_(cfg)
    {
        cfg_.validate();
        if (cfg_.mode == SolverMode::mollified) {
            kernel_ = std::make_unique<MollifierKernel>(cfg_.theta, grid, cfg_.dt);
            const auto cap = static_cast<std::size_t>(std::ceil(2.0 * cfg_.theta / cfg_.dt)) + 2;
            history_ = std::make_unique<HistoryBuffer>(cfg_.dt, cap);
        }
    }

    const SolverConfig& config() const { return cfg_; }
    const HistoryBuffer* history() const { return history_.get(); }

    void set_forcing(Forcing f) { forcing_ = std::move(f); }

    /// Records an accepted state; a no-op in direct mode.
    void record(const SimState& s)
    {
        if (history_)
            history_->push(s);
    }

    /// Advances `s`, which must already be recorded in mollified mode.
    SimState advance(const SimState& s) const
    {
        const Forcing* f = (forcing_.velocity || forcing_.director) ? &forcing_ : nullptr;
        if (cfg_.mode == SolverMode::direct)
            return step(s, cfg_, f);
        StepCoefficients coef{apply(*kernel_, *history_, FieldSelector::velocity, s.t),
                              apply(*kernel_, *history_, FieldSelector::director, s.t)};
        return step_with(s, cfg_, coef, cfg_.mollify_ericksen_gradient, f);
    }

private:
    SolverConfig cfg_;
    std::unique_ptr<MollifierKernel> kernel_;
    std::unique_ptr<HistoryBuffer> history_;
    Forcing forcing_;
};

/// Callbacks invoked by run(). `on_state` sees every accepted state
/// (including the initial one) with its step index; `on_snapshot` sees the
/// first state, every snapshot_every-th state and the last one.
struct RunSinks {
    std::function<void(const SimState&, long long)> on_state;
    std::function<void(const SimState&, long long)> on_snapshot;
};

inline long long step_count(double t0, double t_end, double dt)
{
    if (t_end < t0 - 1e-9 * dt)
        throw InvalidArgument("solver.t_end must not precede the initial time");
    return std::llround((t_end - t0) / dt);
}

struct RunResult {
    SimState final_state;
    long long steps = 0;
};

inline RunResult run(const SimState& initial, const SolverConfig& cfg, const RunSinks& sinks = {},
                     const Forcing& forcing = {})
{
    if (!initial.all_finite())
        throw NumericalBreakdown("initial state");
    initial.params.validate();
    Solver solver(cfg, initial.grid());
    solver.set_forcing(forcing);
    const long long n = step_count(initial.t, cfg.t_end, cfg.dt);

    SimState s = initial;
    solver.record(s);
    if (sinks.on_state)
        sinks.on_state(s, 0);
    if (sinks.on_snapshot)
        sinks.on_snapshot(s, 0);
    for (long long k = 1; k <= n; ++k) {
        s = solver.advance(s);
        solver.record(s);
        if (sinks.on_state)
            sinks.on_state(s, k);
        const bool snap = k == n || (cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0);
        if (snap && sinks.on_snapshot)
            sinks.on_snapshot(s, k);
    }
    return {std::move(s), n};
}

/// Runs and keeps every accepted state.
inline Trajectory run_trajectory(const SimState& initial, const SolverConfig& cfg, const Forcing& forcing = {})
{
    Trajectory traj;
    RunSinks sinks;
    sinks.on_state = [&](const SimState& s, long long) { traj.states.push_back(s); };
    run(initial, cfg, sinks, forcing);
    return traj;
}

/// Pressure from the Poisson equation obtained by taking the divergence of
/// the momentum equation: -Lap p = div(u . grad u + lambda grad d^T h + lambda div S[h, d]).
inline ScalarField pressure_from_poisson(const SimState& s, Discretization disc)
{
    const ModelParams& prm = s.params;
    VectorField h = laplacian(s.d, disc);
    h -= gl_force(s.d);
    VectorField force = advect(s.u, gradient(s.u, disc));
    force.axpy(prm.lambda, apply_transpose(gradient(s.d, disc), h));
    force.axpy(prm.lambda, divergence_tensor(leslie_stress(h, s.d, prm.alpha), disc));
    ScalarField rhs = divergence(force, disc);
    const double m = rhs.mean();
    for (double& v : rhs.raw())
        v -= m;
    return poisson_solve(rhs, disc);
}

/// Space-time test function given by analytic callables, supported in time
/// within [support_begin, support_end].
struct TestFunction {
    std::function<std::array<double, 3>(double, double, double, double)> value;
    std::function<std::array<double, 3>(double, double, double, double)> time_derivative;
    double support_begin = 0.0;
    double support_end = 0.0;

    VectorField sample(const Grid& g, double t) const
    {
        return VectorField::sample(g, [&](double x, double y, double z) { return value(x, y, z, t); });
    }
    VectorField sample_time_derivative(const Grid& g, double t) const
    {
        return VectorField::sample(g, [&](double x, double y, double z) { return time_derivative(x, y, z, t); });
    }
};

struct WeakResidual {
    double velocity = 0.0;
    double director = 0.0;
};

/// Residuals of the two weak identities on a stored trajectory, with the
/// trapezoid rule in time and spectral derivatives of the test functions.
///
/// Velocity: int int [-u . dt phi + nu grad u : grad phi - (u (x) u) : grad phi
///                    + lambda (phi . grad d) . h - lambda S : grad phi] - int u0 . phi(t0)
/// Director: int int [-d . dt psi + gamma grad d : grad psi - d . ((grad psi) u)
///                    + gamma f . psi - T . psi] - int d0 . psi(t0)
inline WeakResidual weak_residual(const Trajectory& traj, const TestFunction& phi, const TestFunction& psi,
                                  Discretization disc = Discretization::spectral)
{
    if (traj.states.empty())
        throw InvalidArgument("weak_residual: empty trajectory");
    const double t0 = traj.states.front().t;
    const double t1 = traj.states.back().t;
    const double tol = 1e-9 * std::max(1.0, std::abs(t1));
    for (const TestFunction* tf : {&phi, &psi})
        if (tf->support_begin < t0 - tol || tf->support_end > t1 + tol)
            throw InvalidArgument("weak_residual: test function support exceeds the trajectory window");
    const Grid& g = traj.states.front().grid();

    double ru = 0.0, rd = 0.0;
    const std::size_t n = traj.states.size();
    for (std::size_t k = 0; k < n; ++k) {
        const SimState& s = traj.states[k];
        double w = 0.0;
        if (k > 0)
            w += 0.5 * (s.t - traj.states[k - 1].t);
        if (k + 1 < n)
            w += 0.5 * (traj.states[k + 1].t - s.t);
        if (w == 0.0)
            continue;
        const ModelParams& prm = s.params;
        const VectorField ph = phi.sample(g, s.t);
        const VectorField ps = psi.sample(g, s.t);
        const TensorField grad_ph = gradient(ph, disc);
        const TensorField grad_ps = gradient(ps, disc);
        const TensorField grad_u = gradient(s.u, disc);
        const TensorField grad_d = gradient(s.d, disc);
        VectorField h = laplacian(s.d, disc);
        const VectorField f = gl_force(s.d);
        h -= f;

        double iu = -inner(s.u, phi.sample_time_derivative(g, s.t));
        iu += prm.nu * inner(grad_u, grad_ph);
        iu -= inner(outer(s.u, s.u), grad_ph);
        iu += prm.lambda * inner(apply(grad_d, ph), h);
        iu -= prm.lambda * inner(leslie_stress(h, s.d, prm.alpha), grad_ph);

        double id = -inner(s.d, psi.sample_time_derivative(g, s.t));
        id += prm.gamma * inner(grad_d, grad_ps);
        id -= inner(s.d, apply(grad_ps, s.u));
        id += prm.gamma * inner(f, ps);
        id -= inner(kinematic_transport(grad_u, s.d, prm.alpha), ps);

        ru += w * iu;
        rd += w * id;
    }
    const SimState& s0 = traj.states.front();
    ru -= inner(s0.u, phi.sample(g, t0));
    rd -= inner(s0.d, psi.sample(g, t0));
    return {std::abs(ru), std::abs(rd)};
}

} // namespace elsim
