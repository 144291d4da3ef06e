#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "elsim/diagnostics.hpp"
#include "elsim/solver.hpp"
#include "test_support.hpp"

using namespace elsim;
using elsim::test::kTwoPi;

namespace {

constexpr double kPi = std::numbers::pi;

Trajectory constant_trajectory(const SimState& s, double dt, int slices)
{
    Trajectory tr;
    for (int k = 0; k < slices; ++k) {
        SimState c = s;
        c.t = s.t + k * dt;
        tr.states.push_back(c);
    }
    return tr;
}

SimState equilibrium(const Grid& g)
{
    return SimState(VectorField(g), VectorField(g, {0.0, 0.6, 0.8}), ScalarField(g), 0.0, {});
}

SolverConfig config(double dt, double t_end)
{
    SolverConfig c;
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

} // namespace

TEST(GlobalEnergy, ClosedFormExamples)
{
    const Grid g = Grid::cube(16);
    const EnergyReport eq = global_energy(equilibrium(g));
    EXPECT_NEAR(eq.total, 0.0, 1e-15);
    EXPECT_NEAR(eq.dissipation_rate, 0.0, 1e-15);

    const EnergyReport zero = global_energy(SimState::zero(g));
    EXPECT_NEAR(zero.potential, 0.25, 1e-15);
    EXPECT_NEAR(zero.total, 0.25, 1e-15);

    SimState shear = equilibrium(g);
    shear.u[0] = ScalarField::sample(g, [](double, double y, double) { return std::sin(kTwoPi * y); });
    const EnergyReport sh = global_energy(shear);
    EXPECT_NEAR(sh.kinetic, 0.25, 1e-14);
    EXPECT_NEAR(sh.diss_visc, kTwoPi * kTwoPi / 2.0, 1e-11);
    EXPECT_NEAR(sh.diss_dir, 0.0, 1e-15);
}

TEST(GlobalEnergy, WeightsFollowCoefficients)
{
    const Grid g = Grid::cube(8);
    SimState s = SimState::zero(g, {0.5, 2.0, 3.0, 5.0});
    const EnergyReport r = global_energy(s);
    EXPECT_NEAR(r.total, 3.0 * 0.25, 1e-15);
}

TEST(EnergyAudit, TrivialTrajectoriesHaveZeroSlack)
{
    const Grid g = Grid::cube(8);
    for (const Trajectory& tr : {run_trajectory(SimState::zero(g), config(0.01, 0.05)),
                                 run_trajectory(equilibrium(g), config(0.01, 0.05))}) {
        const EnergyAudit a = energy_inequality_audit(tr);
        ASSERT_EQ(a.rows.size(), 6u);
        for (const auto& row : a.rows)
            EXPECT_NEAR(row.slack, 0.0, 1e-15);
        EXPECT_EQ(a.violations, 0u);
    }
}

TEST(EnergyAudit, SmallDataRunSatisfiesInequality)
{
    const Grid g = Grid::cube(16);
    const Trajectory tr = run_trajectory(elsim::test::smooth_state(g, 0.05, 0.01, 8), config(1e-3, 0.05));
    const EnergyAudit a = energy_inequality_audit(tr);
    EXPECT_EQ(a.violations, 0u);
    EXPECT_LT(a.rows.back().report.total, a.rows.front().report.total);
    EXPECT_GT(a.rows.back().cum_diss, 0.0);
}

TEST(LocalEnergy, TrivialTrajectoriesVanish)
{
    const Grid g = Grid::cube(16);
    const LocalTestFunction phi = bump_test_function(g, {0.5, 0.5, 0.5}, 0.3, 0.0, 0.05);
    for (const Trajectory& tr : {constant_trajectory(SimState::zero(g), 0.01, 6),
                                 constant_trajectory(equilibrium(g), 0.01, 6)}) {
        const LocalEnergyReport r = local_energy_audit(tr, phi);
        if (tr.states[0].d.max_abs() > 0.0)
            for (const auto& [name, v] : r.terms)
                EXPECT_NEAR(v, 0.0, 1e-13) << name;
    }
    // Zero data: only the potential terms survive and they balance exactly
    // in time, F(0) = 1/4 being constant.
    const LocalEnergyReport z = local_energy_audit(constant_trajectory(SimState::zero(g), 0.01, 6), phi);
    EXPECT_NEAR(z.term("leslie_flux"), 0.0, 1e-15);
    EXPECT_NEAR(z.term("transport_flux"), 0.0, 1e-15);
}

TEST(LocalEnergy, SlackShrinksUnderRefinement)
{
    const Grid g = Grid::cube(16);
    const SimState s0 = elsim::test::smooth_state(g, 0.3, 0.1, 4);
    const double T = 0.1;
    const LocalTestFunction phi = bump_test_function(g, {0.4, 0.5, 0.6}, 0.35, 0.02, T);
    double prev = 0.0;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        const LocalEnergyReport r = local_energy_audit(run_trajectory(s0, config(dt, T)), phi);
        const double e = std::abs(r.slack);
        if (prev > 0.0)
            EXPECT_GT(prev / e, 1.8) << dt;
        prev = e;
        EXPECT_LT(e, 1e-2 * std::abs(r.lhs) + 1e-12);
    }
}

TEST(Phi, ZeroFieldsAndUniformFlow)
{
    const Grid g = Grid::cube(32, 4.0);
    EXPECT_EQ(phi(constant_trajectory(SimState::zero(g), 0.25, 5), {{2.0, 2.0, 2.0}, 1.0, 0.5}).phi, 0.0);

    SimState s(VectorField(g, {1.0, 0.0, 0.0}), VectorField(g, {0, 0, 1}), ScalarField(g), 0.0, {});
    const PhiReport r = phi(constant_trajectory(s, 0.25, 5), {{2.03, 1.97, 2.11}, 1.0, 1.0});
    EXPECT_NEAR(r.term_velocity, 4.0 * kPi / 3.0, 5e-3 * 4.0 * kPi / 3.0);
    EXPECT_NEAR(r.volume, 4.0 * kPi / 3.0, 5e-3 * 4.0 * kPi / 3.0);
    EXPECT_EQ(r.term_pressure, 0.0);
    EXPECT_NEAR(r.term_oscillation, 0.0, 1e-15);
    EXPECT_NEAR(r.d_mean[2], 1.0, 1e-12);
}

TEST(Phi, RejectsUnresolvedOrOutsideCylinders)
{
    const Grid g = Grid::cube(16);
    const Trajectory tr = constant_trajectory(equilibrium(g), 0.01, 5);
    EXPECT_THROW(phi(tr, {{0.5, 0.5, 0.5}, 0.04, 0.1}), InvalidArgument);   // r < 2 dx
    EXPECT_THROW(phi(tr, {{0.5, 0.5, 0.5}, 0.04, 0.25}), InvalidArgument);  // starts before t = 0
    EXPECT_NO_THROW(phi(tr, {{0.5, 0.5, 0.5}, 0.04, 0.13}));
}

TEST(Phi, VelocityTermIsCubic)
{
    const Grid g = Grid::cube(16);
    SimState s = elsim::test::smooth_state(g, 0.5, 0.3, 6);
    const ParabolicCylinder cyl{{0.41, 0.52, 0.33}, 0.04, 0.18};
    const double base = phi(constant_trajectory(s, 0.01, 5), cyl).term_velocity;
    s.u *= 2.0;
    s.d *= 2.0;
    EXPECT_NEAR(phi(constant_trajectory(s, 0.01, 5), cyl).term_velocity, 8.0 * base, 1e-12 * base);
}

namespace {

// Smooth periodic space-time fields on the unit box.
std::array<double, 3> field_u(double x, double y, double z, double t)
{
    return {std::sin(kTwoPi * (y + t)), 0.5 * std::cos(kTwoPi * z), std::sin(kTwoPi * x) * (1.0 + t)};
}
std::array<double, 3> field_d(double x, double y, double, double t)
{
    return {0.3 * std::cos(kTwoPi * x), 0.4 * std::sin(kTwoPi * (y - t)), 1.0};
}
double field_p(double x, double y, double, double t)
{
    return std::cos(kTwoPi * (x + y)) * std::cos(t);
}

Trajectory sampled_trajectory(const Grid& g, double t0, double t1, int slices, double scale,
                              std::array<double, 3> x0, double s0)
{
    // Samples r u(x0 + r x, s0 + r^2 t), d(...), r^2 p(...) for r = scale.
    Trajectory tr;
    for (int k = 0; k < slices; ++k) {
        const double t = t0 + (t1 - t0) * k / (slices - 1);
        const double ts = s0 + scale * scale * t;
        auto X = [&](double x, double y, double z) {
            return std::array<double, 3>{x0[0] + scale * x, x0[1] + scale * y, x0[2] + scale * z};
        };
        VectorField u = VectorField::sample(g, [&](double x, double y, double z) {
            const auto p = X(x, y, z);
            auto v = field_u(p[0], p[1], p[2], ts);
            return std::array<double, 3>{scale * v[0], scale * v[1], scale * v[2]};
        });
        VectorField d = VectorField::sample(g, [&](double x, double y, double z) {
            const auto p = X(x, y, z);
            return field_d(p[0], p[1], p[2], ts);
        });
        ScalarField pr = ScalarField::sample(g, [&](double x, double y, double z) {
            const auto p = X(x, y, z);
            return scale * scale * field_p(p[0], p[1], p[2], ts);
        });
        tr.states.emplace_back(std::move(u), std::move(d), std::move(pr), t, ModelParams{});
    }
    return tr;
}

} // namespace

TEST(Phi, ParabolicScaleInvariance)
{
    const double r = 0.2;
    const std::array<double, 3> x0{0.3137, 0.5521, 0.4283};
    const double t0 = 0.1;
    // Original: unit box, n = 64 (r / dx = 12.8), slices over [0, t0].
    const Trajectory orig = sampled_trajectory(Grid::cube(64), 0.0, t0, 51, 1.0, {0, 0, 0}, 0.0);
    const PhiReport a = phi(orig, {x0, t0, r});
    // Rescaled: box 1/r, dx = 1/8, cylinder P_1(0), slices over [-1, 0].
    const Trajectory resc = sampled_trajectory(Grid::cube(40, 1.0 / r), -1.0, 0.0, 31, r, x0, t0);
    const PhiReport b = phi(resc, {{0.0, 0.0, 0.0}, 0.0, 1.0});
    EXPECT_NEAR(b.term_velocity / a.term_velocity, 1.0, 0.02);
    EXPECT_NEAR(b.term_pressure / a.term_pressure, 1.0, 0.02);
    EXPECT_NEAR(b.term_oscillation / a.term_oscillation, 1.0, 0.02);
    EXPECT_NEAR(b.phi / a.phi, 1.0, 0.02);
}

TEST(SingularCandidates, EquilibriumAndInfiniteThresholdAreEmpty)
{
    const Grid g = Grid::cube(16);
    const Trajectory eq = constant_trajectory(equilibrium(g), 0.01, 5);
    CandidateOptions opt;
    opt.stride = 4;
    EXPECT_TRUE(singular_candidates(eq, {0.25, 0.125}, 1e-6, opt).empty());
    const Trajectory rough = constant_trajectory(elsim::test::smooth_state(g, 1.0, 1.0, 2), 0.01, 8);
    EXPECT_TRUE(singular_candidates(rough, {0.25, 0.125}, std::numeric_limits<double>::infinity(), opt).empty());
    EXPECT_THROW(singular_candidates(eq, {0.125, 0.25}, 1.0, opt), InvalidArgument);
}

TEST(SingularCandidates, FindsSyntheticHedgehog)
{
    const Grid g = Grid::cube(32);
    const std::array<double, 3> x0{0.5, 0.5, 0.5};
    const double delta = 0.5 * g.dx(0);
    SimState s = SimState::zero(g);
    // Hedgehog inside radius 0.25, blended smoothly into a constant director.
    s.d = VectorField::sample(g, [&](double x, double y, double z) {
        const double a = g.min_image(0, x - x0[0]), b = g.min_image(1, y - x0[1]), c = g.min_image(2, z - x0[2]);
        const double n = std::sqrt(a * a + b * b + c * c + delta * delta);
        const double q = (a * a + b * b + c * c) / (0.25 * 0.25);
        const double chi = q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
        return std::array<double, 3>{chi * a / n, chi * b / n, chi * c / n + (1.0 - chi)};
    });
    const Trajectory tr = constant_trajectory(s, 0.005, 5);
    CandidateOptions opt;
    opt.stride = 4;
    const auto cands = singular_candidates(tr, {0.125, 0.0625}, 0.5, opt);
    ASSERT_FALSE(cands.empty());
    bool hit = false;
    for (const auto& c : cands) {
        const double dist = std::hypot(c.point.x - x0[0], c.point.y - x0[1], c.point.z - x0[2]);
        EXPECT_LT(dist, 0.3);
        hit = hit || dist < g.dx(0);
    }
    EXPECT_TRUE(hit);
}

TEST(Dimension, SyntheticSets)
{
    std::vector<SpaceTimePoint> point{{0.3, 0.3, 0.3, 0.5}};
    EXPECT_LE(parabolic_dimension_estimate(point, 0.01, 0.1)->slope, 0.2);

    std::vector<SpaceTimePoint> seg, tseg;
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        const double s = (i + 0.5) / N;
        seg.push_back({s, 0.0, 0.0, 0.25});
        tseg.push_back({0.3, 0.3, 0.3, s});
    }
    EXPECT_NEAR(parabolic_dimension_estimate(seg, 0.001, 0.1)->slope, 1.0, 0.2);
    EXPECT_NEAR(parabolic_dimension_estimate(tseg, 0.01, 0.1)->slope, 2.0, 0.2);
}

TEST(Dimension, EmptyAndDegenerateInputs)
{
    EXPECT_FALSE(parabolic_dimension_estimate({}, 0.01, 0.1).has_value());
    std::vector<SpaceTimePoint> p{{0, 0, 0, 0}};
    EXPECT_THROW(parabolic_dimension_estimate(p, 0.02, 0.1), InvalidArgument);
    EXPECT_THROW(parabolic_dimension_estimate(p, 0.01, 0.1, 2), InvalidArgument);
}

TEST(FractionalSeminorm, ClosedForms)
{
    const Grid g = Grid::cube(8);
    const double p = 20.0 / 7.0;
    EXPECT_THROW(fractional_time_seminorm(constant_trajectory(SimState::zero(g), 0.1, 5), 2.0), InvalidArgument);
    EXPECT_EQ(fractional_time_seminorm(constant_trajectory(SimState::zero(g), 0.1, 5), p).total(), 0.0);

    // Time-constant director: only the gradient part, equal to T int |grad d|^p.
    SimState s = SimState::zero(g);
    s.d[0] = ScalarField::sample(g, [](double x, double, double) { return std::sin(kTwoPi * x); });
    const FractionalSeminorm c = fractional_time_seminorm(constant_trajectory(s, 0.1, 11), p);
    EXPECT_EQ(c.time_part, 0.0);
    const ScalarField g2 = norm2(gradient(s.d, Discretization::spectral));
    double ref = 0.0;
    for (double v : g2.raw())
        ref += std::pow(v, 0.5 * p);
    EXPECT_NEAR(c.gradient_part, 1.0 * ref * g.cell_volume(), 1e-12 * c.gradient_part);

    // d = t e1 on [0, T]: per point 2 (7/10)(7/17) T^{17/7}.
    const double T = 1.0;
    const int slices = 801;
    Trajectory lin;
    for (int k = 0; k < slices; ++k) {
        const double t = T * k / (slices - 1);
        lin.states.emplace_back(VectorField(g), VectorField(g, {t, 0.0, 0.0}), ScalarField(g), t, ModelParams{});
    }
    const double expected = 2.0 * (7.0 / 10.0) * (7.0 / 17.0) * std::pow(T, 17.0 / 7.0);
    const FractionalSeminorm f = fractional_time_seminorm(lin, p);
    EXPECT_NEAR(f.time_part, expected, 1e-2 * expected);

    // |c|^p homogeneity.
    Trajectory scaled = lin;
    for (auto& st : scaled.states)
        st.d *= -3.0;
    EXPECT_NEAR(fractional_time_seminorm(scaled, p).time_part, std::pow(3.0, p) * f.time_part,
                1e-12 * std::pow(3.0, p) * f.time_part);
}

TEST(InterpolationBound, ZeroHomogeneityAndStability)
{
    const Grid g = Grid::cube(16);
    const InterpolationBound z = interpolation_bound_check(constant_trajectory(SimState::zero(g), 0.1, 3));
    EXPECT_EQ(z.lhs, 0.0);
    EXPECT_EQ(z.rhs, 0.0);
    EXPECT_FALSE(z.ratio.has_value());

    SimState s = elsim::test::smooth_state(g, 0.0, 0.3, 12);
    const InterpolationBound a = interpolation_bound_check(constant_trajectory(s, 0.1, 5));
    const InterpolationBound fine = interpolation_bound_check(constant_trajectory(s, 0.025, 17));
    ASSERT_TRUE(a.ratio && fine.ratio);
    EXPECT_TRUE(std::isfinite(*a.ratio));
    EXPECT_NEAR(*a.ratio, *fine.ratio, 1e-12 * *a.ratio);

    s.d *= 2.0;
    const InterpolationBound twice = interpolation_bound_check(constant_trajectory(s, 0.1, 5));
    EXPECT_NEAR(twice.lhs, 1024.0 * a.lhs, 1e-10 * twice.lhs);
    EXPECT_NEAR(twice.rhs, 1024.0 * a.rhs, 1e-10 * twice.rhs);
}
