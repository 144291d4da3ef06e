#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "elsim/lc_tensors.hpp"
#include "elsim/mollifier.hpp"
#include "elsim/state.hpp"

namespace elsim {

// ---------------------------------------------------------------------------
// Global energy

/// Raw integrals of one state. `total` and `dissipation_rate` carry the
/// model coefficients: E = kinetic + lambda (elastic + potential) and
/// D = nu diss_visc + lambda gamma diss_dir.
struct EnergyReport {
    double t = 0.0;
    double kinetic = 0.0;    // int |u|^2 / 2
    double elastic = 0.0;    // int |grad d|^2 / 2
    double potential = 0.0;  // int F(d)
    double diss_visc = 0.0;  // int |grad u|^2
    double diss_dir = 0.0;   // int |Lap d - f(d)|^2
    double total = 0.0;
    double dissipation_rate = 0.0;
};

inline EnergyReport global_energy(const SimState& s, Discretization disc = Discretization::spectral)
{
    EnergyReport r;
    r.t = s.t;
    r.kinetic = 0.5 * inner(s.u, s.u);
    const TensorField gd = gradient(s.d, disc);
    r.elastic = 0.5 * inner(gd, gd);
    r.potential = integrate(gl_potential(s.d));
    const TensorField gu = gradient(s.u, disc);
    r.diss_visc = inner(gu, gu);
    VectorField h = laplacian(s.d, disc);
    h -= gl_force(s.d);
    r.diss_dir = inner(h, h);
    const ModelParams& p = s.params;
    r.total = r.kinetic + p.lambda * (r.elastic + r.potential);
    r.dissipation_rate = p.nu * r.diss_visc + p.lambda * p.gamma * r.diss_dir;
    return r;
}

/// One row of the energy trace.
struct EnergyRow {
    EnergyReport report;
    double cum_diss = 0.0;
    double slack = 0.0;  // E(0) - E(t) - cum_diss
};

/// Streaming form of the energy audit. Dissipation is accumulated with the
/// right-endpoint rule: the step from t_{k-1} to t_k contributes
/// (t_k - t_{k-1}) D(t_k).
class EnergyMonitor {
public:
    explicit EnergyMonitor(Discretization disc = Discretization::spectral) : disc_(disc) {}

    EnergyRow add(const SimState& s)
    {
        EnergyRow row;
        row.report = global_energy(s, disc_);
        if (!started_) {
            e0_ = row.report.total;
            started_ = true;
        } else {
            cum_ += (s.t - last_t_) * row.report.dissipation_rate;
        }
        last_t_ = s.t;
        row.cum_diss = cum_;
        row.slack = e0_ - row.report.total - cum_;
        return row;
    }

private:
    Discretization disc_;
    bool started_ = false;
    double e0_ = 0.0;
    double cum_ = 0.0;
    double last_t_ = 0.0;
};

struct EnergyAudit {
    std::vector<EnergyRow> rows;
    double max_negative_slack = 0.0;  // magnitude of the most negative slack, 0 if none
    std::size_t violations = 0;       // rows with slack < -tolerance
};

inline EnergyAudit energy_inequality_audit(const Trajectory& traj, double tolerance = 1e-6,
                                           Discretization disc = Discretization::spectral)
{
    EnergyAudit a;
    EnergyMonitor m(disc);
    for (const auto& s : traj.states) {
        a.rows.push_back(m.add(s));
        const double sl = a.rows.back().slack;
        a.max_negative_slack = std::max(a.max_negative_slack, -sl);
        if (sl < -tolerance)
            ++a.violations;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Local energy audit

/// Separable nonnegative test function phi(x, t) = a(t) b(x).
struct LocalTestFunction {
    std::function<double(double)> a;
    std::function<double(double)> a_prime;
    std::function<double(double, double, double)> b;
};

/// Smooth bump centered at x0 with radius R (minimum-image distance) and the
/// time ramp a(t) = exp(1 - T / (t - t_begin)), T = t_end - t_begin, which
/// vanishes to all orders at t_begin and equals 1 at t_end.
inline LocalTestFunction bump_test_function(const Grid& g, std::array<double, 3> x0, double R, double t_begin,
                                            double t_end)
{
    for (int a = 0; a < 3; ++a)
        if (!(R < 0.5 * g.box_length(a)))
            throw InvalidArgument("local energy test function: radius must be below half the box");
    if (!(t_end > t_begin))
        throw InvalidArgument("local energy test function: empty time support");
    const double T = t_end - t_begin;
    LocalTestFunction f;
    f.a = [=](double t) { return t <= t_begin ? 0.0 : std::exp(1.0 - T / (t - t_begin)); };
    f.a_prime = [=](double t) {
        if (t <= t_begin)
            return 0.0;
        const double s = t - t_begin;
        return std::exp(1.0 - T / s) * T / (s * s);
    };
    f.b = [=](double x, double y, double z) {
        const double dx = g.min_image(0, x - x0[0]);
        const double dy = g.min_image(1, y - x0[1]);
        const double dz = g.min_image(2, z - x0[2]);
        const double q = (dx * dx + dy * dy + dz * dz) / (R * R);
        return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
    };
    return f;
}

struct LocalEnergyReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;  // rhs - lhs
    std::vector<std::pair<std::string, double>> terms;

    double term(const std::string& name) const
    {
        for (const auto& [n, v] : terms)
            if (n == name)
                return v;
        throw InvalidArgument("unknown local energy term '" + name + "'");
    }
};

/// Integrated local energy balance with phi = a(t) b(x) over the whole
/// trajectory, trapezoid rule in time. With e = |u|^2/2 + lambda (|grad d|^2/2 + F):
///
///   LHS = int e phi (t_end) - int e phi (t_0)
///         + int int [nu |grad u|^2 + lambda gamma (|Lap d|^2 + |f|^2)] phi
///   RHS = int int |u|^2/2 (dt phi + nu Lap phi) + lambda |grad d|^2/2 (dt phi + gamma Lap phi)
///         + lambda F dt phi + (|u|^2/2 + p) u . grad phi + lambda (grad d (.) grad d) : u (x) grad phi
///         + lambda gamma (grad d (.) grad d - |grad d|^2 I) : Hess phi
///         + lambda S[h, d] : u (x) grad phi - lambda T[grad u, d] . (grad phi . grad d)
///         - lambda gamma f . (grad phi . grad d) - 2 lambda gamma grad f : grad d phi
///
/// where (grad phi . grad d)_k = sum_i D_i phi D_i d_k.
inline LocalEnergyReport local_energy_audit(const Trajectory& traj, const LocalTestFunction& phi,
                                            Discretization disc = Discretization::spectral)
{
    if (traj.empty())
        throw InvalidArgument("local_energy_audit: empty trajectory");
    const Grid& g = traj.grid();
    const ScalarField b = ScalarField::sample(g, phi.b);
    for (double v : b.raw())
        if (v < 0.0)
            throw InvalidArgument("local_energy_audit: test function must be nonnegative");
    const VectorField grad_b = gradient(b, Discretization::spectral);
    const TensorField hess_b = gradient(grad_b, Discretization::spectral);
    const ScalarField lap_b = laplacian(b, Discretization::spectral);

    enum Term {
        kinetic_time, kinetic_heat, elastic_time, elastic_heat, potential_time, pressure_flux, ericksen_flux,
        hessian_flux, leslie_flux, transport_flux, potential_flux, potential_gradient, term_count
    };
    static const char* names[term_count] = {
        "kinetic_time", "kinetic_diffusion", "elastic_time", "elastic_diffusion", "potential_time",
        "pressure_convection_flux", "ericksen_flux", "hessian_flux", "leslie_flux", "transport_flux",
        "potential_flux", "potential_gradient"};
    double acc[term_count] = {};
    double dissipation = 0.0;
    double e_phi_start = 0.0, e_phi_end = 0.0;

    const std::size_t n = traj.size();
    for (std::size_t k = 0; k < n; ++k) {
        const SimState& s = traj.states[k];
        double w = 0.0;
        if (k > 0)
            w += 0.5 * (s.t - traj.states[k - 1].t);
        if (k + 1 < n)
            w += 0.5 * (traj.states[k + 1].t - s.t);
        const double a = phi.a(s.t);
        const double ap = phi.a_prime(s.t);
        const bool edge = k == 0 || k + 1 == n;
        if ((w == 0.0 || (a == 0.0 && ap == 0.0)) && !edge)
            continue;
        const ModelParams& prm = s.params;
        const double lam = prm.lambda, nu = prm.nu, gam = prm.gamma;

        const TensorField grad_u = gradient(s.u, disc);
        const TensorField grad_d = gradient(s.d, disc);
        const VectorField lap_d = laplacian(s.d, disc);
        const VectorField f = gl_force(s.d);
        const TensorField grad_f = gradient(f, disc);
        VectorField h = lap_d;
        h -= f;
        const ScalarField pot = gl_potential(s.d);

        double it[term_count] = {};
        double diss = 0.0, e_phi = 0.0;
        const double cv = g.cell_volume();
        for (std::size_t p = 0; p < g.size(); ++p) {
            const auto u = s.u.at(p);
            const auto gdp = grad_d.at(p);  // gdp[k][i] = D_i d_k
            const auto gup = grad_u.at(p);
            const auto dp = s.d.at(p);
            const auto hp = h.at(p);
            const auto fp = f.at(p);
            const auto lp = lap_d.at(p);
            const auto gfp = grad_f.at(p);
            const Mat3 hb = hess_b.at(p);
            const std::array<double, 3> gb = grad_b.at(p);
            const double bp = b[p];

            const double u2 = dot3(u, u);
            double gd2 = 0.0, gf_gd = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    gd2 += gdp[i][j] * gdp[i][j];
                    gf_gd += gfp[i][j] * gdp[i][j];
                }
            // (grad b . grad d)_k = sum_i D_i b D_i d_k
            std::array<double, 3> gbd{};
            for (int kk = 0; kk < 3; ++kk)
                for (int i = 0; i < 3; ++i)
                    gbd[kk] += gb[i] * gdp[kk][i];
            // grad d (.) grad d, E_ij = sum_k D_i d_k D_j d_k
            double e_u_gb = 0.0, e_hess = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    double eij = 0.0;
                    for (int kk = 0; kk < 3; ++kk)
                        eij += gdp[kk][i] * gdp[kk][j];
                    e_u_gb += eij * u[i] * gb[j];
                    e_hess += (eij - (i == j ? gd2 : 0.0)) * hb[i][j];
                }
            const Mat3 S = pointwise::leslie_stress(hp, dp, prm.alpha);
            double s_u_gb = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    s_u_gb += S[i][j] * u[i] * gb[j];
            const auto T = pointwise::kinematic_transport(gup, dp, prm.alpha);
            const double u_gb = dot3(u, gb);

            it[kinetic_time] += 0.5 * u2 * bp * ap;
            it[kinetic_heat] += 0.5 * u2 * nu * lap_b[p] * a;
            it[elastic_time] += lam * 0.5 * gd2 * bp * ap;
            it[elastic_heat] += lam * gam * 0.5 * gd2 * lap_b[p] * a;
            it[potential_time] += lam * pot[p] * bp * ap;
            it[pressure_flux] += (0.5 * u2 + s.p[p]) * u_gb * a;
            it[ericksen_flux] += lam * e_u_gb * a;
            it[hessian_flux] += lam * gam * e_hess * a;
            it[leslie_flux] += lam * s_u_gb * a;
            it[transport_flux] -= lam * dot3(T, gbd) * a;
            it[potential_flux] -= lam * gam * dot3(fp, gbd) * a;
            it[potential_gradient] -= 2.0 * lam * gam * gf_gd * bp * a;

            double gu2 = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    gu2 += gup[i][j] * gup[i][j];
            diss += (nu * gu2 + lam * gam * (dot3(lp, lp) + dot3(fp, fp))) * bp * a;
            e_phi += (0.5 * u2 + lam * (0.5 * gd2 + pot[p])) * bp * a;
        }
        for (int t = 0; t < term_count; ++t)
            acc[t] += w * cv * it[t];
        dissipation += w * cv * diss;
        if (k == 0)
            e_phi_start = cv * e_phi;
        if (k + 1 == n)
            e_phi_end = cv * e_phi;
    }

    LocalEnergyReport r;
    r.lhs = e_phi_end - e_phi_start + dissipation;
    r.terms.emplace_back("energy_end", e_phi_end);
    r.terms.emplace_back("energy_start", e_phi_start);
    r.terms.emplace_back("dissipation", dissipation);
    for (int t = 0; t < term_count; ++t) {
        r.terms.emplace_back(names[t], acc[t]);
        r.rhs += acc[t];
    }
    r.slack = r.rhs - r.lhs;
    return r;
}

// ---------------------------------------------------------------------------
// Phi(z, r)

/// B_r(x) x [t - r^2, t].
struct ParabolicCylinder {
    std::array<double, 3> x{};
    double t = 0.0;
    double r = 0.0;
};

struct PhiOptions {
    double pressure_exponent = -2.0;  // prefactor r^e inside the squared pressure term
    int subsamples = 6;               // per axis, for cells cut by the sphere
    Discretization discretization = Discretization::spectral;
};

struct PhiReport {
    ParabolicCylinder cylinder;
    double term_velocity = 0.0;     // r^-2 int int (|u|^3 + |grad d|^3)
    double term_pressure = 0.0;     // (r^e int int |p|^{3/2})^2
    double term_oscillation = 0.0;  // (avg |d - d_mean|^6)^{1/2}
    std::array<double, 3> d_mean{};
    double volume = 0.0;            // quadrature measure of the cylinder
    double phi = 0.0;
};

/// Quadrature weights (cell volume fractions) of the ball B_r(c) on the
/// periodic lattice, using minimum-image distances.
inline std::vector<std::pair<std::size_t, double>> ball_weights(const Grid& g, const std::array<double, 3>& c,
                                                                double r, int subsamples)
{
    std::vector<std::pair<std::size_t, double>> out;
    const double hx = g.dx(0), hy = g.dx(1), hz = g.dx(2);
    const double half_diag = 0.5 * std::sqrt(hx * hx + hy * hy + hz * hz);
    const double cv = g.cell_volume();
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = static_cast<int>(std::floor((c[a] - r) / g.dx(a))) - 1;
        hi[a] = static_cast<int>(std::ceil((c[a] + r) / g.dx(a))) + 1;
    }
    const double r2 = r * r;
    for (int k = lo[2]; k <= hi[2]; ++k)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int i = lo[0]; i <= hi[0]; ++i) {
                const double dx = i * hx - c[0], dy = j * hy - c[1], dz = k * hz - c[2];
                const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
                if (dist - half_diag >= r)
                    continue;
                double w;
                if (dist + half_diag <= r) {
                    w = cv;
                } else {
                    int inside = 0;
                    const int m = subsamples;
                    for (int c2 = 0; c2 < m; ++c2)
                        for (int c1 = 0; c1 < m; ++c1)
                            for (int c0 = 0; c0 < m; ++c0) {
                                const double sx = dx + ((c0 + 0.5) / m - 0.5) * hx;
                                const double sy = dy + ((c1 + 0.5) / m - 0.5) * hy;
                                const double sz = dz + ((c2 + 0.5) / m - 0.5) * hz;
                                if (sx * sx + sy * sy + sz * sz < r2)
                                    ++inside;
                            }
                    if (inside == 0)
                        continue;
                    w = cv * inside / static_cast<double>(m * m * m);
                }
                out.emplace_back(g.wrapped_index(i, j, k), w);
            }
    return out;
}

/// Weights of the piecewise-linear interpolant of samples at `times` over
/// [ta, tb].
inline std::vector<std::pair<std::size_t, double>> interval_weights(const std::vector<double>& times, double ta,
                                                                    double tb)
{
    std::vector<std::pair<std::size_t, double>> out;
    const double eps = 1e-9 * std::max(1.0, std::abs(tb));
    if (times.empty() || ta < times.front() - eps || tb > times.back() + eps)
        throw InvalidArgument("cylinder outside trajectory window");
    if (tb - ta <= 0.0)
        return out;
    std::map<std::size_t, double> w;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double t0 = times[k], t1 = times[k + 1];
        const double a = std::max(ta, t0), b = std::min(tb, t1);
        if (b <= a)
            continue;
        const double h = t1 - t0;
        // int_a^b (t1 - t)/h dt and int_a^b (t - t0)/h dt
        w[k] += ((t1 - a) * (t1 - a) - (t1 - b) * (t1 - b)) / (2.0 * h);
        w[k + 1] += ((b - t0) * (b - t0) - (a - t0) * (a - t0)) / (2.0 * h);
    }
    if (w.empty())
        throw InvalidArgument("cylinder outside trajectory window");
    return {w.begin(), w.end()};
}

/// Evaluates Phi over many cylinders of one trajectory, caching the pointwise
/// integrands. Keeps a reference to the trajectory.
class PhiEvaluator {
public:
    PhiEvaluator(const Trajectory& traj, PhiOptions opt = {}) : traj_(traj), opt_(opt)
    {
        if (traj.empty())
            throw InvalidArgument("phi: empty trajectory");
        for (const auto& s : traj.states) {
            times_.push_back(s.t);
            const TensorField gd = gradient(s.d, opt.discretization);
            ScalarField cubic(s.grid());
            ScalarField pres(s.grid());
            for (std::size_t p = 0; p < cubic.size(); ++p) {
                const auto u = s.u.at(p);
                const double un = std::sqrt(dot3(u, u));
                const Mat3 g = gd.at(p);
                double g2 = 0.0;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j)
                        g2 += g[i][j] * g[i][j];
                const double gn = std::sqrt(g2);
                cubic[p] = un * un * un + gn * gn * gn;
                const double ap = std::abs(s.p[p]);
                pres[p] = ap * std::sqrt(ap);
            }
            cubic_.push_back(std::move(cubic));
            pressure_.push_back(std::move(pres));
        }
    }

    const Trajectory& trajectory() const { return traj_; }

    PhiReport operator()(const ParabolicCylinder& cyl) const
    {
        const Grid& g = traj_.grid();
        if (!(cyl.r >= 2.0 * g.min_dx() * (1.0 - 1e-12)))
            throw InvalidArgument("phi: radius must be at least 2 dx");
        for (int a = 0; a < 3; ++a)
            if (!(cyl.r < 0.5 * g.box_length(a)))
                throw InvalidArgument("phi: radius must be below half the box");
        const auto tw = interval_weights(times_, cyl.t - cyl.r * cyl.r, cyl.t);
        const auto bw = ball_weights(g, cyl.x, cyl.r, opt_.subsamples);

        PhiReport rep;
        rep.cylinder = cyl;
        double vel = 0.0, pres = 0.0, vol = 0.0;
        std::array<double, 3> dsum{};
        for (const auto& [k, wt] : tw) {
            const VectorField& d = traj_.states[k].d;
            for (const auto& [p, wx] : bw) {
                const double w = wt * wx;
                vol += w;
                vel += w * cubic_[k][p];
                pres += w * pressure_[k][p];
                for (int a = 0; a < 3; ++a)
                    dsum[a] += w * d[a][p];
            }
        }
        if (!(vol > 0.0))
            throw InvalidArgument("phi: cylinder has no quadrature weight");
        for (int a = 0; a < 3; ++a)
            rep.d_mean[a] = dsum[a] / vol;
        double osc = 0.0;
        for (const auto& [k, wt] : tw) {
            const VectorField& d = traj_.states[k].d;
            for (const auto& [p, wx] : bw) {
                const double e0 = d[0][p] - rep.d_mean[0];
                const double e1 = d[1][p] - rep.d_mean[1];
                const double e2 = d[2][p] - rep.d_mean[2];
                const double q = e0 * e0 + e1 * e1 + e2 * e2;
                osc += wt * wx * q * q * q;
            }
        }
        const double r = cyl.r;
        rep.volume = vol;
        rep.term_velocity = vel / (r * r);
        const double pt = std::pow(r, opt_.pressure_exponent) * pres;
        rep.term_pressure = pt * pt;
        rep.term_oscillation = std::sqrt(osc / vol);
        rep.phi = rep.term_velocity + rep.term_pressure + rep.term_oscillation;
        return rep;
    }

private:
    const Trajectory& traj_;
    PhiOptions opt_;
    std::vector<double> times_;
    std::vector<ScalarField> cubic_;
    std::vector<ScalarField> pressure_;
};

inline PhiReport phi(const Trajectory& traj, const ParabolicCylinder& cyl, PhiOptions opt = {})
{
    return PhiEvaluator(traj, opt)(cyl);
}

// ---------------------------------------------------------------------------
// Singular candidates

struct SpaceTimePoint {
    double x = 0.0, y = 0.0, z = 0.0, t = 0.0;
};

struct Candidate {
    SpaceTimePoint point;
    double min_phi = 0.0;
    double max_d_mean = 0.0;
};

struct CandidateOptions {
    int stride = 1;       // lattice stride in space
    int time_stride = 1;  // stride over stored slices
    double d_mean_bound = std::numeric_limits<double>::infinity();
    PhiOptions phi;
};

/// Lattice points z whose smallest Phi over `radii` exceeds `threshold`, or
/// whose cylinder mean |d_{z,r}| exceeds the bound at some radius. Every
/// evaluated cylinder is passed to `on_report` when it is set.
inline std::vector<Candidate> phi_scan(const PhiEvaluator& eval, const std::vector<double>& radii, double threshold,
                                       const CandidateOptions& opt,
                                       const std::function<void(const PhiReport&)>& on_report)
{
    const Trajectory& traj = eval.trajectory();
    const Grid& g = traj.grid();
    if (radii.empty())
        throw InvalidArgument("phi_scan.radii must not be empty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] >= 2.0 * g.min_dx() * (1.0 - 1e-12)))
            throw InvalidArgument("phi_scan.radii entries must be >= 2 dx");
        if (i > 0 && !(radii[i] < radii[i - 1]))
            throw InvalidArgument("phi_scan.radii must be strictly decreasing");
    }
    if (opt.stride < 1 || opt.time_stride < 1)
        throw InvalidArgument("phi_scan.stride must be positive");
    std::vector<Candidate> out;
    if (!on_report && std::isinf(threshold) && threshold > 0 && std::isinf(opt.d_mean_bound))
        return out;
    const double rmax = radii.front();
    const double t_first = traj.start_time() + rmax * rmax - 1e-9 * std::max(1.0, traj.end_time());
    const auto& n = g.n();
    for (std::size_t k = 0; k < traj.size(); k += opt.time_stride) {
        const double t = traj.states[k].t;
        if (t < t_first)
            continue;
        for (int c = 0; c < n[2]; c += opt.stride)
            for (int b = 0; b < n[1]; b += opt.stride)
                for (int a = 0; a < n[0]; a += opt.stride) {
                    const auto x = g.position(a, b, c);
                    double min_phi = std::numeric_limits<double>::infinity();
                    double max_mean = 0.0;
                    for (double r : radii) {
                        const PhiReport rep = eval({x, t, r});
                        if (on_report)
                            on_report(rep);
                        min_phi = std::min(min_phi, rep.phi);
                        max_mean = std::max(max_mean, std::sqrt(dot3(rep.d_mean, rep.d_mean)));
                    }
                    if (min_phi > threshold || max_mean > opt.d_mean_bound)
                        out.push_back({{x[0], x[1], x[2], t}, min_phi, max_mean});
                }
    }
    return out;
}

inline std::vector<Candidate> singular_candidates(const PhiEvaluator& eval, const std::vector<double>& radii,
                                                  double threshold, const CandidateOptions& opt = {})
{
    return phi_scan(eval, radii, threshold, opt, {});
}

inline std::vector<Candidate> singular_candidates(const Trajectory& traj, const std::vector<double>& radii,
                                                  double threshold, const CandidateOptions& opt = {})
{
    return singular_candidates(PhiEvaluator(traj, opt.phi), radii, threshold, opt);
}

// ---------------------------------------------------------------------------
// Parabolic box counting

struct DimensionReport {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // root-mean-square misfit of log N
    std::vector<double> scales;
    std::vector<std::size_t> counts;
};

/// Box-counting dimension in the parabolic metric: boxes have spatial side r
/// and temporal side r^2; the estimate is the least-squares slope of
/// log N(r) against log(1/r) over `scales` geometric radii in [r_min, r_max].
/// Returns nullopt for an empty set.
inline std::optional<DimensionReport> parabolic_dimension_estimate(const std::vector<SpaceTimePoint>& points,
                                                                   double r_min, double r_max, int scales = 10)
{
    if (!(r_min > 0.0) || !(r_max > r_min))
        throw InvalidArgument("dimension estimate: need 0 < r_min < r_max");
    if (r_max / r_min < 10.0 * (1.0 - 1e-12))
        throw InvalidArgument("dimension estimate: radius range must span at least one decade");
    if (scales < 3)
        throw InvalidArgument("dimension estimate: degenerate fit, fewer than 3 scales");
    if (points.empty())
        return std::nullopt;
    DimensionReport rep;
    std::vector<double> xs, ys;
    for (int i = 0; i < scales; ++i) {
        const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (scales - 1));
        std::set<std::tuple<long long, long long, long long, long long>> boxes;
        for (const auto& p : points)
            boxes.emplace(static_cast<long long>(std::floor(p.x / r)), static_cast<long long>(std::floor(p.y / r)),
                          static_cast<long long>(std::floor(p.z / r)),
                          static_cast<long long>(std::floor(p.t / (r * r))));
        rep.scales.push_back(r);
        rep.counts.push_back(boxes.size());
        xs.push_back(std::log(1.0 / r));
        ys.push_back(std::log(static_cast<double>(boxes.size())));
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    rep.slope = sxy / sxx;
    rep.intercept = my - rep.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (rep.intercept + rep.slope * xs[i]);
        rss += e * e;
    }
    rep.residual = std::sqrt(rss / n);
    return rep;
}

// ---------------------------------------------------------------------------
// Fractional parabolic seminorm

struct FractionalSeminorm {
    double gradient_part = 0.0;  // int int |grad f|^p
    double time_part = 0.0;      // int_x int int_{|t-s|>=dt} |f(t) - f(s)|^p / |t-s|^{1+p/2}
    double total() const { return gradient_part + time_part; }
};

/// p-th power of the W^{1,1/2}_p seminorm of the director (or velocity) over
/// the trajectory, trapezoid weights in time; pairs closer than the step are
/// excluded.
inline FractionalSeminorm fractional_time_seminorm(const Trajectory& traj, double p,
                                                   FieldSelector sel = FieldSelector::director,
                                                   Discretization disc = Discretization::spectral)
{
    if (!(p > 2.0))
        throw InvalidArgument("fractional seminorm: p must exceed 2");
    if (traj.size() < 3)
        throw InvalidArgument("fractional seminorm: need at least 3 time slices");
    const std::size_t n = traj.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0)
            w[k] += 0.5 * (traj.states[k].t - traj.states[k - 1].t);
        if (k + 1 < n)
            w[k] += 0.5 * (traj.states[k + 1].t - traj.states[k].t);
    }
    auto field = [&](std::size_t k) -> const VectorField& {
        return sel == FieldSelector::velocity ? traj.states[k].u : traj.states[k].d;
    };
    const Grid& g = traj.grid();
    const double cv = g.cell_volume();
    FractionalSeminorm out;
    for (std::size_t k = 0; k < n; ++k) {
        const TensorField gf = gradient(field(k), disc);
        const ScalarField g2 = norm2(gf);
        double s = 0.0;
        for (double v : g2.raw())
            s += std::pow(v, 0.5 * p);
        out.gradient_part += w[k] * cv * s;
    }
    const double min_gap = traj.dt() * (1.0 - 1e-9);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
            const double gap = traj.states[l].t - traj.states[k].t;
            if (gap < min_gap)
                continue;
            const VectorField& a = field(k);
            const VectorField& b = field(l);
            double s = 0.0;
            for (std::size_t q = 0; q < g.size(); ++q) {
                const double e0 = a[0][q] - b[0][q], e1 = a[1][q] - b[1][q], e2 = a[2][q] - b[2][q];
                s += std::pow(e0 * e0 + e1 * e1 + e2 * e2, 0.5 * p);
            }
            // Both orderings (t, s) and (s, t).
            out.time_part += 2.0 * w[k] * w[l] * cv * s / std::pow(gap, 1.0 + 0.5 * p);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Interpolation bound

struct InterpolationBound {
    double lhs = 0.0;  // int ||grad d||_{L^{30/13}}^10 dt
    double rhs = 0.0;  // ||d||_{L^inf H^1}^8 ||d||_{L^2 H^2}^2
    std::optional<double> ratio;  // empty when both sides vanish
};

inline InterpolationBound interpolation_bound_check(const Trajectory& traj,
                                                    Discretization disc = Discretization::spectral)
{
    InterpolationBound r;
    if (traj.empty())
        return r;
    const std::size_t n = traj.size();
    const Grid& g = traj.grid();
    const double q = 30.0 / 13.0;
    double sup_h1 = 0.0, int_h2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double w = 0.0;
        if (n == 1)
            w = 1.0;
        if (k > 0)
            w += 0.5 * (traj.states[k].t - traj.states[k - 1].t);
        if (k + 1 < n)
            w += 0.5 * (traj.states[k + 1].t - traj.states[k].t);
        const VectorField& d = traj.states[k].d;
        const TensorField gd = gradient(d, disc);
        const ScalarField g2 = norm2(gd);
        double lq = 0.0;
        for (double v : g2.raw())
            lq += std::pow(v, 0.5 * q);
        const double norm_q = std::pow(lq * g.cell_volume(), 1.0 / q);
        r.lhs += w * std::pow(norm_q, 10.0);

        const double l2 = inner(d, d);
        const double h1 = l2 + inner(gd, gd);
        double second = 0.0;
        for (int a = 0; a < 3; ++a) {
            const TensorField hess = gradient(gradient(d[a], disc), disc);
            second += inner(hess, hess);
        }
        sup_h1 = std::max(sup_h1, h1);
        int_h2 += w * (h1 + second);
    }
    r.rhs = std::pow(sup_h1, 4.0) * int_h2;
    if (r.lhs > 0.0 || r.rhs > 0.0)
        r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : std::numeric_limits<double>::infinity();
    return r;
}

} // namespace elsim
