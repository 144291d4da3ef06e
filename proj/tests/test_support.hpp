#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "elsim/operators.hpp"
#include "elsim/presets.hpp"
#include "elsim/state.hpp"

namespace elsim::test {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using elsim::random_bandlimited;
using elsim::random_bandlimited_vector;
using elsim::smooth_state;
using elsim::uniform;

/// Independent uniform samples; not smooth.
inline ScalarField random_samples(const Grid& g, std::mt19937_64& rng)
{
    ScalarField f(g);
    for (std::size_t p = 0; p < f.size(); ++p)
        f[p] = uniform(rng);
    return f;
}

inline VectorField random_samples_vector(const Grid& g, std::mt19937_64& rng)
{
    return {random_samples(g, rng), random_samples(g, rng), random_samples(g, rng)};
}

inline TensorField random_samples_tensor(const Grid& g, std::mt19937_64& rng)
{
    TensorField t(g);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            t(i, j) = random_samples(g, rng);
    return t;
}

} // namespace elsim::test
