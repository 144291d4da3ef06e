#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "elsim/operators.hpp"
#include "elsim/state.hpp"

namespace elsim {

class InsufficientHistory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FieldSelector { velocity, director };

/// Ring of consecutive states spaced by a uniform dt, oldest first.
///
/// The Fourier transforms of u and d are taken once on push so that every
/// later convolution only multiplies spectra.
class HistoryBuffer {
public:
    HistoryBuffer(double dt, std::size_t capacity) : dt_(dt), capacity_(capacity)
    {
        if (!(dt > 0.0))
            throw InvalidArgument("history: dt must be positive");
        if (capacity == 0)
            throw InvalidArgument("history: capacity must be positive");
    }

    /// Appends a state whose time is exactly one dt after the newest slice;
    /// drops the oldest slice when full.
    void push(const SimState& s)
    {
        if (!slices_.empty()) {
            require_same_grid(slices_.front().state.grid(), s.grid(), "history push");
            const double expected = back_time() + dt_;
            if (std::abs(s.t - expected) > 1e-6 * dt_)
                throw InvalidArgument("history: pushed state is not one dt after the newest slice");
        }
        Slice slice{s, {}, {}};
        for (int a = 0; a < 3; ++a) {
            slice.u_hat[a] = fft(s.u[a]);
            slice.d_hat[a] = fft(s.d[a]);
        }
        if (slices_.size() == capacity_)
            slices_.pop_front();
        slices_.push_back(std::move(slice));
    }

    void clear() { slices_.clear(); }

    double dt() const { return dt_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return slices_.size(); }
    bool empty() const { return slices_.empty(); }
    double front_time() const { return slices_.front().state.t; }
    double back_time() const { return slices_.back().state.t; }
    const Grid& grid() const { return slices_.front().state.grid(); }

    const SimState& state(std::size_t i) const { return slices_[i].state; }
    double time(std::size_t i) const { return slices_[i].state.t; }

    const VectorField& field(std::size_t i, FieldSelector sel) const
    {
        return sel == FieldSelector::velocity ? slices_[i].state.u : slices_[i].state.d;
    }

    const std::array<Spectrum, 3>& spectrum(std::size_t i, FieldSelector sel) const
    {
        return sel == FieldSelector::velocity ? slices_[i].u_hat : slices_[i].d_hat;
    }

    /// Index of the slice stored at time t, if any.
    std::optional<std::size_t> find(double t) const
    {
        if (slices_.empty())
            return std::nullopt;
        const long long k = std::llround((t - front_time()) / dt_);
        if (k < 0 || k >= static_cast<long long>(slices_.size()))
            return std::nullopt;
        if (std::abs(time(static_cast<std::size_t>(k)) - t) > 1e-6 * dt_)
            return std::nullopt;
        return static_cast<std::size_t>(k);
    }

private:
    struct Slice {
        SimState state;
        std::array<Spectrum, 3> u_hat;
        std::array<Spectrum, 3> d_hat;
    };

    double dt_;
    std::size_t capacity_;
    std::deque<Slice> slices_;
};

/// Space-time kernel of the retarded mollifier, discretized for one grid and
/// one time step.
///
/// The unscaled bump is eta(x, t) = c * b((t - 3/2) / (1/2)) * b(|x| / sqrt(t))
/// with b(s) = exp(-1 / (1 - s^2)) on |s| < 1. It vanishes outside
/// {|x|^2 < t, 1 < t < 2}. The scaled kernel theta^-4 eta(y / theta, tau / theta)
/// is sampled at lags tau = m * dt and periodic lattice offsets y; c makes the
/// sampled mass exactly one.
class MollifierKernel {
public:
    struct Lag {
        int lag = 0;            // tau = lag * dt
        double weight = 0.0;    // mass carried by this lag
        Spectrum transform;     // FFT of the spatial weights on the grid
    };

    static double bump(double s)
    {
        if (!(std::abs(s) < 1.0))
            return 0.0;
        return std::exp(-1.0 / (1.0 - s * s));
    }

    /// Unnormalized profile in kernel units.
    static double profile(double r2, double t)
    {
        if (!(t > 1.0 && t < 2.0) || !(r2 < t))
            return 0.0;
        return bump((t - 1.5) / 0.5) * bump(std::sqrt(r2 / t));
    }

    MollifierKernel(double theta, const Grid& grid, double dt) : theta_(theta), dt_(dt), grid_(grid)
    {
        if (!(theta > 0.0 && theta <= 1.0))
            throw InvalidArgument("mollifier: theta must lie in (0, 1]");
        if (!(dt > 0.0))
            throw InvalidArgument("mollifier: dt must be positive");
        if (dt > 0.25 * theta * (1.0 + 1e-12))
            throw InvalidArgument("mollifier: dt must not exceed theta/4");

        const double dv = grid.cell_volume();
        const double scale = 1.0 / (theta * theta * theta * theta);
        std::vector<std::vector<double>> weights;
        double mass = 0.0;
        const int m_lo = static_cast<int>(std::floor(theta / dt));
        const int m_hi = static_cast<int>(std::ceil(2.0 * theta / dt));
        for (int m = std::max(m_lo, 1); m <= m_hi; ++m) {
            const double tau = m * dt;
            const double s = tau / theta;
            if (!(s > 1.0 && s < 2.0))
                continue;
            std::vector<double> w(grid.size(), 0.0);
            const double rho = std::sqrt(theta * tau);
            int reach[3];
            for (int a = 0; a < 3; ++a)
                reach[a] = static_cast<int>(std::ceil(rho / grid.dx(a)));
            double lag_mass = 0.0;
            for (int c = -reach[2]; c <= reach[2]; ++c)
                for (int b = -reach[1]; b <= reach[1]; ++b)
                    for (int a = -reach[0]; a <= reach[0]; ++a) {
                        const double y0 = a * grid.dx(0), y1 = b * grid.dx(1), y2 = c * grid.dx(2);
                        const double r2 = (y0 * y0 + y1 * y1 + y2 * y2) / (theta * theta);
                        const double v = scale * profile(r2, s) * dv * dt;
                        if (v == 0.0)
                            continue;
                        // Offsets longer than half the box wrap onto the torus.
                        w[grid.wrapped_index(a, b, c)] += v;
                        lag_mass += v;
                    }
            if (lag_mass == 0.0)
                continue;
            lags_.push_back({m, lag_mass, {}});
            weights.push_back(std::move(w));
            mass += lag_mass;
        }
        if (!(mass > 0.0))
            throw InvalidArgument("mollifier: no lattice node inside the kernel support");
        normalization_ = 1.0 / mass;
        for (std::size_t l = 0; l < lags_.size(); ++l) {
            for (double& v : weights[l])
                v *= normalization_;
            lags_[l].weight *= normalization_;
            lags_[l].transform = fft(ScalarField(grid, std::move(weights[l])));
        }
    }

    double theta() const { return theta_; }
    double dt() const { return dt_; }
    const Grid& grid() const { return grid_; }
    double normalization() const { return normalization_; }
    const std::vector<Lag>& lags() const { return lags_; }

    /// eta(x, t) in kernel units, normalization included.
    double eta(const std::array<double, 3>& x, double t) const
    {
        return normalization_ * profile(dot3(x, x), t);
    }

    /// Sampled integral of the scaled kernel over all lags and offsets.
    double discrete_mass() const
    {
        double s = 0.0;
        for (const auto& l : lags_)
            s += l.weight;
        return s;
    }

private:
    double theta_;
    double dt_;
    Grid grid_;
    double normalization_ = 0.0;
    std::vector<Lag> lags_;
};

inline MollifierKernel make_kernel(double theta, const Grid& grid, double dt)
{
    return MollifierKernel(theta, grid, dt);
}

namespace detail {

inline std::string format_time(double t)
{
    std::ostringstream os;
    os.precision(10);
    os << t;
    return os.str();
}

/// Sum over lags of kernel * slice, with slice_for(l) returning the slice
/// index for the l-th lag or nullopt for a zero slice.
template <class SliceFor>
VectorField mollify_spectra(const MollifierKernel& kernel, const HistoryBuffer& history, FieldSelector sel,
                            SliceFor&& slice_for)
{
    const Grid& g = kernel.grid();
    const std::size_t half = detail::plan_for(g.n()).half_size();
    std::array<Spectrum, 3> acc;
    for (auto& a : acc)
        a.assign(half, Complex(0.0, 0.0));
    for (std::size_t l = 0; l < kernel.lags().size(); ++l) {
        const auto& lag = kernel.lags()[l];
        const std::optional<std::size_t> idx = slice_for(l);
        if (!idx)
            continue;
        const auto& fh = history.spectrum(*idx, sel);
        for (int a = 0; a < 3; ++a)
            for (std::size_t q = 0; q < half; ++q)
                acc[a][q] += lag.transform[q] * fh[a][q];
    }
    return {ifft(g, acc[0]), ifft(g, acc[1]), ifft(g, acc[2])};
}

} // namespace detail

/// Psi_theta[f](t): space-time convolution of the selected field with the
/// kernel, reading only slices at times in (t - 2 theta, t - theta). Slices at
/// negative times are the zero extension and need not be stored.
inline VectorField apply(const MollifierKernel& kernel, const HistoryBuffer& history, FieldSelector sel, double t)
{
    if (std::abs(history.dt() - kernel.dt()) > 1e-12 * kernel.dt())
        throw InvalidArgument("mollifier: history dt differs from kernel dt");
    if (!history.empty())
        require_same_grid(history.grid(), kernel.grid(), "mollifier apply");

    const double dt = kernel.dt();
    double missing_lo = 0.0, missing_hi = 0.0;
    bool missing = false;
    std::vector<std::optional<std::size_t>> index(kernel.lags().size());
    for (std::size_t l = 0; l < kernel.lags().size(); ++l) {
        const double s = t - kernel.lags()[l].lag * dt;
        if (s < -0.5 * dt)
            continue;
        index[l] = history.find(s);
        if (!index[l]) {
            missing_lo = missing ? std::min(missing_lo, s) : s;
            missing_hi = missing ? std::max(missing_hi, s) : s;
            missing = true;
        }
    }
    if (missing)
        throw InsufficientHistory("mollifier: history is missing time range [" + detail::format_time(missing_lo)
                                  + ", " + detail::format_time(missing_hi) + "]");

    return detail::mollify_spectra(kernel, history, sel, [&](std::size_t l) { return index[l]; });
}

struct MollifierBoundsReport {
    std::optional<double> l2_ratio;    // sup ||Psi w||^2 / sup ||w||^2; empty when 0/0
    std::optional<double> grad_ratio;  // sum ||grad Psi w||^2 / sum ||grad w||^2; empty when 0/0
    std::size_t samples = 0;

    bool l2_degenerate() const { return !l2_ratio.has_value(); }
    bool grad_degenerate() const { return !grad_ratio.has_value(); }
};

/// Compares the mollified field against the raw history in the two norms the
/// construction relies on. The stored slices are treated as one period in
/// time, so every slice enters each lag exactly once and the ratios measure
/// the averaging property alone.
inline MollifierBoundsReport mollifier_bounds_check(const HistoryBuffer& history, const MollifierKernel& kernel,
                                                   FieldSelector sel)
{
    MollifierBoundsReport r;
    if (history.empty())
        return r;
    const std::size_t n = history.size();
    double sup_raw = 0.0, sup_moll = 0.0, grad_raw = 0.0, grad_moll = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const VectorField& w = history.field(k, sel);
        sup_raw = std::max(sup_raw, inner(w, w));
        const TensorField gw = gradient(w, Discretization::spectral);
        grad_raw += inner(gw, gw);

        const VectorField m = detail::mollify_spectra(kernel, history, sel, [&](std::size_t l) {
            const long long lag = kernel.lags()[l].lag;
            const long long j = (static_cast<long long>(k) - lag) % static_cast<long long>(n);
            return std::optional<std::size_t>(static_cast<std::size_t>(j < 0 ? j + n : j));
        });
        sup_moll = std::max(sup_moll, inner(m, m));
        const TensorField gm = gradient(m, Discretization::spectral);
        grad_moll += inner(gm, gm);
    }
    r.samples = n;
    if (sup_raw > 0.0 || sup_moll > 0.0)
        r.l2_ratio = sup_raw > 0.0 ? sup_moll / sup_raw : std::numeric_limits<double>::infinity();
    if (grad_raw > 0.0 || grad_moll > 0.0)
        r.grad_ratio = grad_raw > 0.0 ? grad_moll / grad_raw : std::numeric_limits<double>::infinity();
    return r;
}

inline MollifierBoundsReport mollifier_bounds_check(const HistoryBuffer& history, double theta, FieldSelector sel)
{
    if (history.empty())
        return {};
    return mollifier_bounds_check(history, make_kernel(theta, history.grid(), history.dt()), sel);
}

} // namespace elsim
