#pragma once

#include <vector>

#include "elsim/lc_tensors.hpp"

namespace elsim {

/// One time slice of the coupled system: velocity, director, pressure.
struct SimState {
    VectorField u;
    VectorField d;
    ScalarField p;  // zero mean
    double t = 0.0;
    ModelParams params;

    SimState() = default;
    SimState(VectorField u_, VectorField d_, ScalarField p_, double t_, ModelParams params_)
        : u(std::move(u_)), d(std::move(d_)), p(std::move(p_)), t(t_), params(params_)
    {
        require_same_grid(u.grid(), d.grid(), "SimState");
        require_same_grid(u.grid(), p.grid(), "SimState");
    }

    static SimState zero(const Grid& g, ModelParams params = {})
    {
        return SimState(VectorField(g), VectorField(g), ScalarField(g), 0.0, params);
    }

    const Grid& grid() const { return u.grid(); }

    bool all_finite() const { return u.all_finite() && d.all_finite() && p.all_finite() && std::isfinite(t); }

    friend bool operator==(const SimState& a, const SimState& b)
    {
        return a.t == b.t && a.u == b.u && a.d == b.d && a.p == b.p;
    }
};

/// Consecutive accepted states of one run, oldest first.
struct Trajectory {
    std::vector<SimState> states;

    bool empty() const { return states.empty(); }
    std::size_t size() const { return states.size(); }
    const Grid& grid() const { return states.front().grid(); }
    double start_time() const { return states.front().t; }
    double end_time() const { return states.back().t; }
    /// Spacing of the first two slices, or 0 for a single slice.
    double dt() const { return states.size() > 1 ? states[1].t - states[0].t : 0.0; }
};

} // namespace elsim
