#include <gtest/gtest.h>

#include <string>

#include "elsim/config.hpp"
#include "test_support.hpp"

using namespace elsim;

namespace {

std::string rejection(const std::string& text)
{
    try {
        parse_run_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, DefaultsAndFullDocument)
{
    const RunConfig d = parse_run_config(std::string("{}"));
    EXPECT_EQ(d.grid.n(), (std::array<int, 3>{32, 32, 32}));
    EXPECT_EQ(d.initial.preset, "small-smooth");
    EXPECT_EQ(d.solver.mode, SolverMode::direct);

    const RunConfig c = parse_run_config(std::string(R"({
      "grid": {"n": [16, 8, 12], "box_length": [1, 0.5, 2]},
      "params": {"alpha": 0.25, "nu": 2, "lambda": 0.5, "gamma": 3},
      "solver": {"dt": 0.01, "t_end": 1, "mode": "mollified", "theta": 0.2, "discretization": "fd2",
                 "cfl_guard": 0.3, "mollify_ericksen_gradient": false},
      "initial_condition": {"preset": "modes", "director_base": [1, 0, 0],
                            "director_modes": [{"component": 2, "k": [1, 0, 0], "amplitude": 0.1, "phase": 1}]},
      "diagnostics": {"energy_every": 5, "snapshot_every": 10,
                      "phi_scan": {"radii": [0.2, 0.15], "threshold": 0.5, "stride": 2}},
      "output_dir": "somewhere",
      "seed": 18446744073709551615
    })"));
    EXPECT_EQ(c.grid.n(), (std::array<int, 3>{16, 8, 12}));
    EXPECT_EQ(c.grid.box_length(2), 2.0);
    EXPECT_EQ(c.params.alpha, 0.25);
    EXPECT_EQ(c.params.gamma, 3.0);
    EXPECT_EQ(c.solver.mode, SolverMode::mollified);
    EXPECT_EQ(c.solver.discretization, Discretization::fd2);
    EXPECT_FALSE(c.solver.mollify_ericksen_gradient);
    EXPECT_EQ(c.solver.snapshot_every, 10);
    EXPECT_EQ(c.diagnostics.energy_every, 5);
    ASSERT_EQ(c.initial.director_modes.size(), 1u);
    EXPECT_EQ(c.initial.director_modes[0].component, 2);
    EXPECT_EQ(c.diagnostics.phi_scan.radii.size(), 2u);
    EXPECT_EQ(c.output_dir, "somewhere");
    EXPECT_EQ(c.seed, 18446744073709551615ull);
}

TEST(Config, ResolvedDocumentParsesBack)
{
    const RunConfig c = parse_run_config(std::string(
        R"({"grid": {"n": 16}, "solver": {"dt": 0.002, "t_end": 0.1, "mode": "mollified", "theta": 0.05},
            "diagnostics": {"phi_scan": {"radii": [0.2]}}, "seed": 9})"));
    const RunConfig back = parse_run_config(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(back.solver.theta, 0.05);
    EXPECT_EQ(back.seed, 9u);
}

TEST(Config, RejectionMessagesAreStable)
{
    EXPECT_EQ(rejection(R"({"grid": {"n": 2}})"), "grid.n entries must be >= 4");
    EXPECT_EQ(rejection(R"({"grid": {"box_length": [1, -1, 1]}})"), "grid.box_length entries must be positive");
    EXPECT_EQ(rejection(R"({"grid": {"n": [8, 8]}})"), "grid.n must be an integer or an array of 3");
    EXPECT_EQ(rejection(R"({"params": {"alpha": 1.5}})"), "params.alpha must lie in [0, 1]");
    EXPECT_EQ(rejection(R"({"params": {"nu": 0}})"), "params.nu must be positive");
    EXPECT_EQ(rejection(R"({"params": {"lambda": -1}})"), "params.lambda must be positive");
    EXPECT_EQ(rejection(R"({"params": {"gamma": "1"}})"), "params.gamma must be a number");
    EXPECT_EQ(rejection(R"({"solver": {"dt": 0}})"), "solver.dt must be positive");
    EXPECT_EQ(rejection(R"({"solver": {"t_end": -1}})"), "solver.t_end must be nonnegative");
    EXPECT_EQ(rejection(R"({"solver": {"mode": "implicit"}})"), "solver.mode must be 'direct' or 'mollified'");
    EXPECT_EQ(rejection(R"({"solver": {"discretization": "fd4"}})"),
              "solver.discretization must be 'spectral' or 'fd2'");
    EXPECT_EQ(rejection(R"({"solver": {"mode": "mollified", "theta": 0}})"),
              "solver.theta must lie in (0, 1] in mollified mode");
    EXPECT_EQ(rejection(R"({"solver": {"mode": "mollified", "theta": 0.1, "dt": 0.03}})"),
              "solver.dt must not exceed theta/4 in mollified mode");
    EXPECT_EQ(rejection(R"({"solver": {"cfl_guard": 0}})"), "solver.cfl_guard must be positive");
    EXPECT_EQ(rejection(R"({"diagnostics": {"energy_every": 0}})"), "diagnostics.energy_every must be positive");
    EXPECT_EQ(rejection(R"({"diagnostics": {"snapshot_every": -2}})"),
              "diagnostics.snapshot_every must be nonnegative");
    EXPECT_EQ(rejection(R"({"grid": {"n": 32}, "diagnostics": {"phi_scan": {"radii": [0.05]}}})"),
              "phi_scan.radii entries must be >= 2 dx");
    EXPECT_EQ(rejection(R"({"diagnostics": {"phi_scan": {"radii": [0.6]}}})"),
              "phi_scan.radii entries must be below half the box");
    EXPECT_EQ(rejection(R"({"diagnostics": {"phi_scan": {"radii": [0.1, 0.2]}}})"),
              "phi_scan.radii must be strictly decreasing");
    EXPECT_EQ(rejection(R"({"initial_condition": {"preset": "vortex"}})"),
              "initial_condition.preset must be one of zero, equilibrium-unit-director, small-smooth, random, modes");
    EXPECT_EQ(rejection(R"({"initial_condition": {"velocity_modes": []}})"), "");
    EXPECT_EQ(rejection(R"({"initial_condition": {"velocity_modes": [{"component": 0, "k": 1, "amplitude": 1}]}})"),
              "initial_condition mode lists require preset \"modes\"");
    EXPECT_EQ(rejection(R"({"initial_condition": {"preset": "modes",
                             "velocity_modes": [{"component": 3, "k": 1, "amplitude": 1}]}})"),
              "initial_condition mode component must be 0, 1 or 2");
    EXPECT_EQ(rejection(R"({"solver": {"tend": 1}})"), "unknown key solver.tend");
    EXPECT_EQ(rejection(R"({"colour": 1})"), "unknown key colour");
    EXPECT_EQ(rejection(R"({"seed": -1})"), "seed must be a nonnegative integer");
    EXPECT_EQ(rejection(R"({"grid": 3})"), "grid must be an object");
    EXPECT_EQ(rejection("[1, 2]"), "config must be an object");
    EXPECT_EQ(rejection("{").rfind("config is not valid JSON", 0), 0u);
}

TEST(Presets, EnergiesAndDeterminism)
{
    const Grid g = Grid::cube(16);
    const ModelParams prm;
    InitialCondition ic;

    ic.preset = "zero";
    const SimState z = make_initial_state(g, prm, ic, 1);
    EXPECT_EQ(z.u.max_abs(), 0.0);
    EXPECT_EQ(z.d.max_abs(), 0.0);

    ic.preset = "equilibrium-unit-director";
    const SimState e = make_initial_state(g, prm, ic, 1);
    EXPECT_EQ(e.u.max_abs(), 0.0);
    EXPECT_EQ(norm2(e.d).max_abs(), 1.0);

    ic.preset = "small-smooth";
    const SimState a = make_initial_state(g, prm, ic, 2024);
    const SimState b = make_initial_state(g, prm, ic, 2024);
    const SimState c = make_initial_state(g, prm, ic, 2025);
    EXPECT_TRUE(a == b);
    EXPECT_FALSE(a == c);
    EXPECT_LT(divergence(a.u, Discretization::spectral).max_abs(), 1e-12);
    const Grid g32 = Grid::cube(32);
    for (std::uint64_t seed : {0ull, 1ull, 2024ull}) {
        const SimState s = make_initial_state(g32, prm, ic, seed);
        double kinetic = 0.5 * inner(s.u, s.u);
        EXPECT_GT(kinetic, 0.0);
        EXPECT_LE(kinetic, 1e-2);
    }

    ic.preset = "modes";
    ic.velocity_modes = {{0, {0, 1, 0}, 0.5, 0.0}};
    ic.director_modes = {{1, {2, 0, 0}, 0.1, 0.25}};
    const SimState m = make_initial_state(g, prm, ic, 0);
    const auto x = g.position(0, 4, 0);
    EXPECT_NEAR(m.u[0][g.index(0, 4, 0)], 0.5 * std::sin(elsim::test::kTwoPi * x[1]), 1e-14);
    EXPECT_NEAR(m.d[1][g.index(2, 0, 0)], 0.1 * std::sin(elsim::test::kTwoPi * 2 * 2 / 16.0 + 0.25), 1e-14);
    EXPECT_EQ(m.d[2][5], 1.0);

    ic.preset = "other";
    EXPECT_THROW(make_initial_state(g, prm, ic, 0), InvalidArgument);
}
