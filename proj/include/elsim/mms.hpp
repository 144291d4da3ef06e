#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "elsim/solver.hpp"

namespace elsim {

/// Manufactured solution on the periodic box:
///   u*(x, t) = e^{-t} U(x), with U an ABC flow (divergence-free),
///   d*(x, t) = e3 + e^{-t} D(x),
/// and p* = 0. The forcing makes (u*, d*) an exact solution of the
/// continuous system. All fields are trigonometric polynomials of low degree,
/// so the forcing is evaluated exactly by spectral differentiation on any
/// grid with n >= 12.
struct ManufacturedSolution {
    double amp_u = 0.5;
    double amp_d = 0.2;
    ModelParams params;

    VectorField velocity(const Grid& g, double t) const
    {
        const double a = amp_u * std::exp(-t);
        return VectorField::sample(g, [&](double x, double y, double z) {
            const auto w = phases(g, x, y, z);
            return std::array<double, 3>{a * (std::sin(w[2]) + std::cos(w[1])),
                                         a * (std::sin(w[0]) + std::cos(w[2])),
                                         a * (std::sin(w[1]) + std::cos(w[0]))};
        });
    }

    VectorField director(const Grid& g, double t) const
    {
        const double b = amp_d * std::exp(-t);
        return VectorField::sample(g, [&](double x, double y, double z) {
            const auto w = phases(g, x, y, z);
            return std::array<double, 3>{b * std::sin(w[0]) * std::cos(w[1]), b * std::cos(w[2]),
                                         1.0 + b * std::sin(w[0] + w[1])};
        });
    }

    /// Residual of the director equation at the exact solution.
    VectorField director_forcing(const Grid& g, double t) const
    {
        constexpr auto disc = Discretization::spectral;
        const VectorField u = velocity(g, t);
        const VectorField d = director(g, t);
        VectorField r = d;
        r[2] += ScalarField(g, -1.0);
        r *= -1.0;  // time derivative
        const TensorField grad_d = gradient(d, disc);
        r += advect(u, grad_d);
        r -= kinematic_transport(gradient(u, disc), d, params.alpha);
        r.axpy(-params.gamma, laplacian(d, disc));
        r.axpy(params.gamma, gl_force(d));
        return r;
    }

    /// Residual of the momentum equation at the exact solution.
    VectorField velocity_forcing(const Grid& g, double t) const
    {
        constexpr auto disc = Discretization::spectral;
        const VectorField u = velocity(g, t);
        const VectorField d = director(g, t);
        VectorField h = laplacian(d, disc);
        h -= gl_force(d);
        VectorField r = u;
        r *= -1.0;  // time derivative
        r.axpy(-params.nu, laplacian(u, disc));
        r += advect(u, gradient(u, disc));
        r.axpy(params.lambda, apply_transpose(gradient(d, disc), h));
        r.axpy(params.lambda, divergence_tensor(leslie_stress(h, d, params.alpha), disc));
        return r;
    }

    /// Both forcings are polynomials of degree at most 4 in s = e^{-t}; the
    /// returned callbacks interpolate them exactly from 5 samples per grid.
    Forcing forcing() const
    {
        struct Cache {
            std::map<std::array<int, 3>, std::array<std::pair<VectorField, VectorField>, 5>> samples;
        };
        auto cache = std::make_shared<Cache>();
        const ManufacturedSolution self = *this;
        auto lookup = [cache, self](const Grid& g) -> const auto& {
            auto it = cache->samples.find(g.n());
            if (it == cache->samples.end()) {
                std::array<std::pair<VectorField, VectorField>, 5> v;
                for (int j = 0; j < 5; ++j) {
                    const double t = -std::log(node(j));
                    v[j] = {self.velocity_forcing(g, t), self.director_forcing(g, t)};
                }
                it = cache->samples.emplace(g.n(), std::move(v)).first;
            }
            return it->second;
        };
        auto combine = [](const auto& samples, double t, bool first) {
            const double s = std::exp(-t);
            VectorField out(first ? samples[0].first.grid() : samples[0].second.grid());
            for (int j = 0; j < 5; ++j) {
                double w = 1.0;
                for (int m = 0; m < 5; ++m)
                    if (m != j)
                        w *= (s - node(m)) / (node(j) - node(m));
                out.axpy(w, first ? samples[j].first : samples[j].second);
            }
            return out;
        };
        Forcing f;
        f.velocity = [lookup, combine](const Grid& g, double t) { return combine(lookup(g), t, true); };
        f.director = [lookup, combine](const Grid& g, double t) { return combine(lookup(g), t, false); };
        return f;
    }

    SimState initial_state(const Grid& g) const
    {
        return SimState(velocity(g, 0.0), director(g, 0.0), ScalarField(g), 0.0, params);
    }

    /// Relative L2 error of (u, d - e3) against the exact solution at s.t.
    double error(const SimState& s) const
    {
        const Grid& g = s.grid();
        VectorField eu = s.u;
        eu -= velocity(g, s.t);
        VectorField ed = s.d;
        ed -= director(g, s.t);
        VectorField ref_d = director(g, s.t);
        ref_d[2] += ScalarField(g, -1.0);
        const double num = inner(eu, eu) + inner(ed, ed);
        const double den = inner(velocity(g, s.t), velocity(g, s.t)) + inner(ref_d, ref_d);
        return std::sqrt(num / den);
    }

private:
    static double node(int j) { return 0.6 + 0.1 * j; }

    static std::array<double, 3> phases(const Grid& g, double x, double y, double z)
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        return {two_pi * x / g.box_length(0), two_pi * y / g.box_length(1), two_pi * z / g.box_length(2)};
    }
};

struct ConvergenceLevel {
    int n = 0;
    double dt = 0.0;
    long long steps = 0;
    double error = 0.0;
    double order = std::numeric_limits<double>::quiet_NaN();  // against the previous level
};

struct ConvergenceStudy {
    std::string name;
    std::vector<ConvergenceLevel> levels;
    double observed_order = std::numeric_limits<double>::quiet_NaN();  // least-squares slope of log e vs log h
    bool exact = false;  // error at the roundoff floor on every level
};

struct MmsOptions {
    std::vector<int> resolutions{16, 32, 64};
    double t_end = 0.05;
    double spatial_dt_factor = 0.5;  // dt = factor * dx^2 in the spatial study
    int temporal_n = 16;
    double temporal_dt = 0.0125;     // coarsest dt of the temporal study, halved per level
    double exact_floor = 1e-10;
    ModelParams params;
};

namespace detail {

inline double fit_slope(const std::vector<double>& logh, const std::vector<double>& loge)
{
    const std::size_t m = logh.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += logh[i];
        my += loge[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxy += (logh[i] - mx) * (loge[i] - my);
        sxx += (logh[i] - mx) * (logh[i] - mx);
    }
    return sxy / sxx;
}

inline SimState mms_run(const ManufacturedSolution& ms, int n, double dt, double t_end, Discretization disc)
{
    const Grid g = Grid::cube(n);
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.discretization = disc;
    cfg.cfl_guard = 1.0;
    return run(ms.initial_state(g), cfg, {}, ms.forcing()).final_state;
}

inline void finish_study(ConvergenceStudy& st, const std::vector<double>& h, double floor)
{
    std::vector<double> logh, loge;
    st.exact = true;
    for (std::size_t i = 0; i < st.levels.size(); ++i) {
        auto& lv = st.levels[i];
        st.exact = st.exact && lv.error <= floor;
        if (i > 0 && lv.error > 0 && st.levels[i - 1].error > 0)
            lv.order = std::log(st.levels[i - 1].error / lv.error) / std::log(h[i - 1] / h[i]);
        logh.push_back(std::log(h[i]));
        loge.push_back(std::log(std::max(lv.error, 1e-300)));
    }
    if (st.levels.size() >= 2)
        st.observed_order = fit_slope(logh, loge);
}

/// Time steps are rounded so that t_end is an integer number of steps.
inline double snap_dt(double dt, double t_end, long long& steps)
{
    steps = std::max<long long>(1, std::llround(std::ceil(t_end / dt - 1e-9)));
    return t_end / static_cast<double>(steps);
}

} // namespace detail

/// Second-order finite differences with dt proportional to dx^2, so the
/// first-order time error converges at the same rate as the spatial error.
inline ConvergenceStudy mms_spatial_study(const MmsOptions& opt, Discretization disc = Discretization::fd2)
{
    if (opt.resolutions.size() < 3)
        throw InvalidArgument("mms: at least 3 resolutions are required");
    ManufacturedSolution ms;
    ms.params = opt.params;
    ConvergenceStudy st;
    st.name = std::string("spatial (") + to_string(disc) + ")";
    std::vector<double> h;
    for (int n : opt.resolutions) {
        const double dx = 1.0 / n;
        ConvergenceLevel lv;
        lv.n = n;
        lv.dt = detail::snap_dt(opt.spatial_dt_factor * dx * dx, opt.t_end, lv.steps);
        lv.error = ms.error(detail::mms_run(ms, n, lv.dt, opt.t_end, disc));
        st.levels.push_back(lv);
        h.push_back(dx);
    }
    detail::finish_study(st, h, opt.exact_floor);
    return st;
}

/// Spectral discretization at fixed resolution with dt halved per level.
inline ConvergenceStudy mms_temporal_study(const MmsOptions& opt)
{
    if (opt.resolutions.size() < 3)
        throw InvalidArgument("mms: at least 3 resolutions are required");
    ManufacturedSolution ms;
    ms.params = opt.params;
    ConvergenceStudy st;
    st.name = "temporal (spectral)";
    std::vector<double> h;
    double dt = opt.temporal_dt;
    for (std::size_t i = 0; i < opt.resolutions.size(); ++i, dt *= 0.5) {
        ConvergenceLevel lv;
        lv.n = opt.temporal_n;
        lv.dt = detail::snap_dt(dt, opt.t_end, lv.steps);
        lv.error = ms.error(detail::mms_run(ms, lv.n, lv.dt, opt.t_end, Discretization::spectral));
        st.levels.push_back(lv);
        h.push_back(lv.dt);
    }
    detail::finish_study(st, h, opt.exact_floor);
    return st;
}

/// Spatial error of the spectral discretization, measured as the difference
/// between consecutive resolutions at a common dt on the shared lattice
/// points. Each level's error compares n with the next resolution.
inline ConvergenceStudy mms_spectral_spatial_check(const MmsOptions& opt, int steps = 10)
{
    if (opt.resolutions.size() < 3)
        throw InvalidArgument("mms: at least 3 resolutions are required");
    ManufacturedSolution ms;
    ms.params = opt.params;
    ConvergenceStudy st;
    st.name = "spatial (spectral)";
    const double dt = opt.temporal_dt / 4.0;
    const double t_end = dt * steps;
    std::vector<SimState> finals;
    for (int n : opt.resolutions)
        finals.push_back(detail::mms_run(ms, n, dt, t_end, Discretization::spectral));
    std::vector<double> h;
    for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
        const SimState& a = finals[i];
        const SimState& b = finals[i + 1];
        const Grid& ga = a.grid();
        const Grid& gb = b.grid();
        if (gb.n(0) % ga.n(0) != 0)
            throw InvalidArgument("mms: spectral check needs each resolution to divide the next");
        const int r = gb.n(0) / ga.n(0);
        double num = 0.0, den = 0.0;
        for (int k = 0; k < ga.n(2); ++k)
            for (int j = 0; j < ga.n(1); ++j)
                for (int i2 = 0; i2 < ga.n(0); ++i2) {
                    const std::size_t pa = ga.index(i2, j, k);
                    const std::size_t pb = gb.index(r * i2, r * j, r * k);
                    for (int c = 0; c < 3; ++c) {
                        const double du = a.u[c][pa] - b.u[c][pb];
                        const double dd = a.d[c][pa] - b.d[c][pb];
                        num += du * du + dd * dd;
                        den += a.u[c][pa] * a.u[c][pa];
                    }
                }
        ConvergenceLevel lv;
        lv.n = ga.n(0);
        lv.dt = dt;
        lv.steps = steps;
        lv.error = std::sqrt(num / std::max(den, 1e-300));
        st.levels.push_back(lv);
        h.push_back(1.0 / lv.n);
    }
    detail::finish_study(st, h, opt.exact_floor);
    return st;
}

} // namespace elsim
