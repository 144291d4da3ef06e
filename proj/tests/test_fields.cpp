#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "elsim/operators.hpp"
#include "test_support.hpp"

using namespace elsim;
using elsim::test::kTwoPi;

namespace {

ScalarField sine_x(const Grid& g, double L = 1.0)
{
    return ScalarField::sample(g, [L](double x, double, double) { return std::sin(kTwoPi * x / L); });
}

double fd_sine_derivative_error(int n)
{
    const Grid g = Grid::cube(n);
    const ScalarField f = sine_x(g);
    const VectorField grad = gradient(f, Discretization::fd2);
    double err = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double x = g.position(p)[0];
        err = std::max(err, std::abs(grad[0][p] - kTwoPi * std::cos(kTwoPi * x)));
    }
    return err;
}

} // namespace

TEST(Grid, RejectsTooFewPoints)
{
    EXPECT_THROW(Grid({3, 8, 8}, {1, 1, 1}), InvalidArgument);
    EXPECT_THROW(Grid({8, 8, 8}, {1, 0, 1}), InvalidArgument);
    const Grid g({8, 6, 4}, {1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(g.dx(1), 2.0 / 6.0);
    EXPECT_EQ(g.wrapped_index(-1, 6, 4), g.index(7, 0, 0));
}

TEST(Gradient, ConstantIsZero)
{
    const Grid g = Grid::cube(8);
    const ScalarField c(g, 3.5);
    for (auto disc : {Discretization::fd2, Discretization::spectral})
        EXPECT_LT(gradient(c, disc).max_abs(), 1e-13);
}

TEST(Gradient, SpectralSineIsExact)
{
    const double L = 2.0;
    const Grid g({16, 8, 8}, {L, 1.0, 1.0});
    const VectorField grad = gradient(sine_x(g, L), Discretization::spectral);
    for (std::size_t p = 0; p < g.size(); ++p) {
        const double x = g.position(p)[0];
        EXPECT_NEAR(grad[0][p], kTwoPi / L * std::cos(kTwoPi * x / L), 1e-13);
        EXPECT_NEAR(grad[1][p], 0.0, 1e-13);
    }
}

TEST(Gradient, FiniteDifferenceIsSecondOrder)
{
    const double ratio = fd_sine_derivative_error(16) / fd_sine_derivative_error(32);
    EXPECT_GT(ratio, 3.5);
    EXPECT_LT(ratio, 4.5);
}

TEST(Gradient, VectorConventionRowIsComponent)
{
    const Grid g = Grid::cube(8);
    // u = (sin(2 pi y), 0, 0): only d u_0 / d x_1 is nonzero.
    VectorField u(g);
    u[0] = ScalarField::sample(g, [](double, double y, double) { return std::sin(kTwoPi * y); });
    const TensorField G = gradient(u, Discretization::spectral);
    EXPECT_GT(G(0, 1).max_abs(), 6.0);
    EXPECT_LT(G(1, 0).max_abs(), 1e-13);
}

TEST(Divergence, ConstantAndLaplacianOfSine)
{
    const Grid g = Grid::cube(16);
    EXPECT_LT(divergence(VectorField(g, {1.0, 2.0, 3.0}), Discretization::fd2).max_abs(), 1e-13);
    const ScalarField f = sine_x(g);
    const ScalarField div = divergence(gradient(f, Discretization::spectral), Discretization::spectral);
    for (std::size_t p = 0; p < g.size(); ++p)
        EXPECT_NEAR(div[p], -kTwoPi * kTwoPi * f[p], 1e-11);
}

TEST(Divergence, TensorContractsColumnIndex)
{
    // div(h (x) d) with constant d equals (d . grad) h.
    const Grid g = Grid::cube(16);
    std::mt19937_64 rng(7);
    const VectorField h = elsim::test::random_bandlimited_vector(g, 3, rng);
    const VectorField d(g, {0.3, -1.2, 0.7});
    const VectorField lhs = divergence_tensor(outer(h, d), Discretization::spectral);
    const VectorField rhs = apply(gradient(h, Discretization::spectral), d);
    EXPECT_LT((lhs - rhs).max_abs(), 1e-12);
}

TEST(Laplacian, MatchesDivergenceOfGradientSpectrally)
{
    const Grid g = Grid::cube(16);
    std::mt19937_64 rng(1);
    const ScalarField f = elsim::test::random_bandlimited(g, 4, rng);
    const auto disc = Discretization::spectral;
    const ScalarField lap = laplacian(f, disc);
    EXPECT_LT((lap - divergence(gradient(f, disc), disc)).max_abs(), 1e-12 * std::max(1.0, lap.max_abs()));
    EXPECT_LT(laplacian(ScalarField(g, 2.0), Discretization::fd2).max_abs(), 1e-12);
    const ScalarField s = sine_x(g);
    EXPECT_LT((laplacian(s, disc) + kTwoPi * kTwoPi * s).max_abs(), 1e-11);
}

TEST(Integrate, ConstantsAndFullPeriodSine)
{
    const Grid g = Grid::cube(8);
    EXPECT_NEAR(integrate(ScalarField(g, 1.0)), 1.0, 1e-15);
    EXPECT_NEAR(integrate(sine_x(g)), 0.0, 1e-15);
    std::mt19937_64 rng(3);
    const ScalarField f = elsim::test::random_samples(g, rng);
    EXPECT_GE(inner(f, f), 0.0);
    const ScalarField h = elsim::test::random_samples(g, rng);
    EXPECT_DOUBLE_EQ(inner(f, h), inner(h, f));
    EXPECT_THROW(inner(f, ScalarField(Grid::cube(4))), InvalidArgument);
}

TEST(Leray, AnnihilatesGradientsAndKeepsSolenoidalFields)
{
    const Grid g = Grid::cube(16);
    std::mt19937_64 rng(11);
    ScalarField q = elsim::test::random_bandlimited(g, 4, rng);
    const VectorField gq = gradient(q, Discretization::spectral);
    EXPECT_LT(leray_project(gq).max_abs(), 1e-12);

    const VectorField v = elsim::test::random_samples_vector(g, rng);
    const VectorField w = leray_project(v);
    EXPECT_LT(divergence(w, Discretization::spectral).max_abs(), 1e-10);
    EXPECT_LT((leray_project(w) - w).max_abs(), 1e-12);
    EXPECT_LE(l2_norm(w), l2_norm(v) + 1e-14);
    for (int a = 0; a < 3; ++a)
        EXPECT_NEAR(w[a].mean(), v[a].mean(), 1e-14);
}

TEST(Leray, FiniteDifferenceModeZeroesFdDivergence)
{
    const Grid g({12, 10, 8}, {1.0, 0.8, 1.3});
    std::mt19937_64 rng(5);
    const VectorField w = leray_project(elsim::test::random_samples_vector(g, rng), Discretization::fd2);
    EXPECT_LT(divergence(w, Discretization::fd2).max_abs(), 1e-10);
}

TEST(Poisson, EigenfunctionZeroAndResidual)
{
    const Grid g = Grid::cube(16);
    EXPECT_LT(poisson_solve(ScalarField(g)).max_abs(), 1e-15);

    const ScalarField s = sine_x(g);
    const ScalarField P = poisson_solve(kTwoPi * kTwoPi * s);
    EXPECT_LT((P - s).max_abs(), 1e-12);

    std::mt19937_64 rng(2);
    ScalarField rhs = elsim::test::random_samples(g, rng);
    const double m = rhs.mean();
    for (auto& v : rhs.raw())
        v -= m;
    const ScalarField sol = poisson_solve(rhs);
    EXPECT_LT((laplacian(sol, Discretization::spectral) + rhs).max_abs(), 1e-10);
    EXPECT_NEAR(sol.mean(), 0.0, 1e-14);
}

TEST(Poisson, RejectsNonzeroMean)
{
    const Grid g = Grid::cube(8);
    EXPECT_THROW(poisson_solve(ScalarField(g, 1.0)), InconsistentPressureProblem);
}

TEST(Operators, GradientDivergenceDuality)
{
    const Grid g({16, 12, 8}, {1.0, 1.5, 0.7});
    std::mt19937_64 rng(17);
    // Nyquist-free random fields, so the spectral operators are exactly skew-adjoint.
    const ScalarField f = elsim::test::random_bandlimited(g, 3, rng);
    const VectorField v = elsim::test::random_bandlimited_vector(g, 3, rng);
    const auto disc = Discretization::spectral;
    EXPECT_NEAR(inner(gradient(f, disc), v), -inner(f, divergence(v, disc)), 1e-10);
}

TEST(Operators, Linearity)
{
    const Grid g = Grid::cube(8);
    std::mt19937_64 rng(23);
    const ScalarField f = elsim::test::random_samples(g, rng);
    const ScalarField h = elsim::test::random_samples(g, rng);
    const double a = 0.7, b = -1.9;
    for (auto disc : {Discretization::fd2, Discretization::spectral}) {
        const VectorField lhs = gradient(a * f + b * h, disc);
        const VectorField rhs = a * gradient(f, disc) + b * gradient(h, disc);
        EXPECT_LT((lhs - rhs).max_abs(), 1e-12);
        EXPECT_LT((laplacian(a * f + b * h, disc) - (a * laplacian(f, disc) + b * laplacian(h, disc))).max_abs(),
                  1e-10);
    }
}

TEST(ShiftedLaplacian, InvertsImplicitOperator)
{
    const Grid g = Grid::cube(8);
    std::mt19937_64 rng(29);
    const ScalarField b = elsim::test::random_samples(g, rng);
    for (auto disc : {Discretization::fd2, Discretization::spectral}) {
        const ScalarField x = solve_shifted_laplacian(b, 0.01, disc);
        EXPECT_LT((x - 0.01 * laplacian(x, disc) - b).max_abs(), 1e-12);
    }
}
