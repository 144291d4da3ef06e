#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "elsim/operators.hpp"
#include "elsim/state.hpp"

namespace elsim {

/// Uniform double in [lo, hi) from a 64-bit engine, independent of the
/// standard library's distribution implementation.
inline double uniform(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0)
{
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

/// Random trigonometric polynomial with wavenumbers |m_a| <= K on every axis.
/// Each mode is kept with probability 1/2 and has amplitude decaying like
/// 1 / (1 + |m|^2).
inline ScalarField random_bandlimited(const Grid& g, int K, std::mt19937_64& rng, double amp = 1.0)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    struct Mode {
        int m[3];
        double a, phase;
    };
    std::vector<Mode> modes;
    for (int i = -K; i <= K; ++i)
        for (int j = -K; j <= K; ++j)
            for (int k = -K; k <= K; ++k) {
                if (uniform(rng, 0.0, 1.0) < 0.5)
                    continue;
                modes.push_back({{i, j, k}, uniform(rng) * amp / (1 + i * i + j * j + k * k),
                                 uniform(rng, 0.0, two_pi)});
            }
    // exp(i 2 pi m x_a / L_a) tabulated per axis; each mode is then a product.
    std::array<std::vector<std::complex<double>>, 3> table;
    for (int a = 0; a < 3; ++a) {
        table[a].resize(static_cast<std::size_t>(g.n(a)) * (2 * K + 1));
        for (int i = 0; i < g.n(a); ++i)
            for (int m = -K; m <= K; ++m)
                table[a][i * (2 * K + 1) + (m + K)] = std::polar(1.0, two_pi * m * i / g.n(a));
    }
    std::vector<std::complex<double>> coef;
    for (const auto& md : modes)
        coef.push_back(std::polar(md.a, md.phase));
    ScalarField out(g);
    const int w = 2 * K + 1;
    std::vector<std::complex<double>> yz(modes.size());
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j) {
            for (std::size_t q = 0; q < modes.size(); ++q)
                yz[q] = table[1][j * w + modes[q].m[1] + K] * table[2][k * w + modes[q].m[2] + K] * coef[q];
            for (int i = 0; i < g.n(0); ++i) {
                double s = 0.0;
                for (std::size_t q = 0; q < modes.size(); ++q) {
                    const std::complex<double> ex = table[0][i * w + modes[q].m[0] + K];
                    s += ex.real() * yz[q].imag() + ex.imag() * yz[q].real();
                }
                out.at(i, j, k) = s;
            }
        }
    return out;
}

inline VectorField random_bandlimited_vector(const Grid& g, int K, std::mt19937_64& rng, double amp = 1.0)
{
    ScalarField x = random_bandlimited(g, K, rng, amp);
    ScalarField y = random_bandlimited(g, K, rng, amp);
    ScalarField z = random_bandlimited(g, K, rng, amp);
    return {std::move(x), std::move(y), std::move(z)};
}

/// Divergence-free band-limited velocity of amplitude `amp_u` and a unit
/// director along x_3 plus a band-limited perturbation of amplitude `amp_d`.
inline SimState smooth_state(const Grid& g, double amp_u, double amp_d, std::uint64_t seed, ModelParams prm = {},
                             int K = 2)
{
    std::mt19937_64 rng(seed);
    VectorField u = leray_project(random_bandlimited_vector(g, K, rng, amp_u));
    VectorField d = random_bandlimited_vector(g, K, rng, amp_d);
    for (double& v : d[2].raw())
        v += 1.0;
    return SimState(std::move(u), std::move(d), ScalarField(g), 0.0, prm);
}

/// One term a sin(2 pi k . x / L + phase) of a single field component.
struct FourierMode {
    int component = 0;
    std::array<int, 3> k{};
    double amplitude = 0.0;
    double phase = 0.0;
};

inline const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"zero", "equilibrium-unit-director", "small-smooth", "random",
                                                "modes"};
    return names;
}

/// Initial data description. "modes" sums the listed Fourier terms onto a
/// constant director; the velocity is projected onto divergence-free fields.
struct InitialCondition {
    std::string preset = "small-smooth";
    double amplitude_u = 0.035;
    double amplitude_d = 0.007;
    std::array<double, 3> director_base{0.0, 0.0, 1.0};
    std::vector<FourierMode> velocity_modes;
    std::vector<FourierMode> director_modes;
};

namespace detail {

inline void add_modes(VectorField& f, const std::vector<FourierMode>& modes)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const Grid& g = f.grid();
    for (const auto& md : modes) {
        ScalarField term = ScalarField::sample(g, [&](double x, double y, double z) {
            return md.amplitude
                * std::sin(two_pi * (md.k[0] * x / g.box_length(0) + md.k[1] * y / g.box_length(1)
                                     + md.k[2] * z / g.box_length(2))
                           + md.phase);
        });
        f[md.component] += term;
    }
}

} // namespace detail

/// Builds the initial state. Random presets depend only on `seed`.
inline SimState make_initial_state(const Grid& g, const ModelParams& prm, const InitialCondition& ic,
                                   std::uint64_t seed)
{
    if (ic.preset == "zero")
        return SimState::zero(g, prm);
    if (ic.preset == "equilibrium-unit-director") {
        SimState s = SimState::zero(g, prm);
        s.d = VectorField(g, {0.0, 0.0, 1.0});
        return s;
    }
    if (ic.preset == "small-smooth")
        return smooth_state(g, ic.amplitude_u, ic.amplitude_d, seed, prm, 2);
    if (ic.preset == "random")
        return smooth_state(g, ic.amplitude_u, ic.amplitude_d, seed, prm, 4);
    if (ic.preset == "modes") {
        VectorField u(g);
        detail::add_modes(u, ic.velocity_modes);
        VectorField d(g, ic.director_base);
        detail::add_modes(d, ic.director_modes);
        return SimState(leray_project(u), std::move(d), ScalarField(g), 0.0, prm);
    }
    throw InvalidArgument("initial_condition.preset must be one of zero, equilibrium-unit-director, "
                          "small-smooth, random, modes");
}

} // namespace elsim
