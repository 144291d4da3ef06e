#pragma once

#include <algorithm>
#include <cmath>

#include "elsim/operators.hpp"

namespace elsim {

/// Coefficients of the simplified Ericksen-Leslie system.
///
/// alpha is the molecular shape parameter (0 disc-like, 1/2 spherical,
/// 1 rod-like); nu the viscosity; lambda the kinetic/elastic competition;
/// gamma the relaxation rate.
struct ModelParams {
    double alpha = 0.5;
    double nu = 1.0;
    double lambda = 1.0;
    double gamma = 1.0;

    void validate() const
    {
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw InvalidArgument("params.alpha must lie in [0, 1]");
        if (!(nu > 0.0))
            throw InvalidArgument("params.nu must be positive");
        if (!(lambda > 0.0))
            throw InvalidArgument("params.lambda must be positive");
        if (!(gamma > 0.0))
            throw InvalidArgument("params.gamma must be positive");
    }
};

// Pointwise kernels. These are the single source of truth for the tensor
// algebra; the field-level functions below loop over them.
namespace pointwise {

inline std::array<double, 3> gl_force(const std::array<double, 3>& d)
{
    const double s = dot3(d, d) - 1.0;
    return {s * d[0], s * d[1], s * d[2]};
}

inline double gl_potential(const std::array<double, 3>& d)
{
    const double s = 1.0 - dot3(d, d);
    return 0.25 * s * s;
}

/// alpha h (x) d - (1 - alpha) d (x) h
inline Mat3 leslie_stress(const std::array<double, 3>& h, const std::array<double, 3>& d, double alpha)
{
    Mat3 s{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            s[i][j] = alpha * h[i] * d[j] - (1.0 - alpha) * d[i] * h[j];
    return s;
}

/// alpha G d - (1 - alpha) G^T d
inline std::array<double, 3> kinematic_transport(const Mat3& g, const std::array<double, 3>& d, double alpha)
{
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
        double gd = 0.0;
        double gtd = 0.0;
        for (int j = 0; j < 3; ++j) {
            gd += g[i][j] * d[j];
            gtd += g[j][i] * d[j];
        }
        out[i] = alpha * gd - (1.0 - alpha) * gtd;
    }
    return out;
}

} // namespace pointwise

/// f(d) = (|d|^2 - 1) d, the gradient of the Ginzburg-Landau potential.
inline VectorField gl_force(const VectorField& d)
{
    VectorField out(d.grid());
    for (std::size_t p = 0; p < d.size(); ++p)
        out.set(p, pointwise::gl_force(d.at(p)));
    return out;
}

/// F(d) = (1 - |d|^2)^2 / 4.
inline ScalarField gl_potential(const VectorField& d)
{
    return map_points(d, [](const std::array<double, 3>& v) { return pointwise::gl_potential(v); });
}

/// Leslie stress S_alpha[h, d] = alpha h (x) d - (1 - alpha) d (x) h.
inline TensorField leslie_stress(const VectorField& h, const VectorField& d, double alpha)
{
    require_same_grid(h.grid(), d.grid(), "leslie_stress");
    TensorField out(h.grid());
    for (std::size_t p = 0; p < h.size(); ++p)
        out.set(p, pointwise::leslie_stress(h.at(p), d.at(p), alpha));
    return out;
}

/// Kinematic transport T_alpha[G, d] = alpha G d - (1 - alpha) G^T d, where G
/// is read with G(i, j) = d u_i / d x_j.
inline VectorField kinematic_transport(const TensorField& grad_u, const VectorField& d, double alpha)
{
    require_same_grid(grad_u.grid(), d.grid(), "kinematic_transport");
    VectorField out(d.grid());
    for (std::size_t p = 0; p < d.size(); ++p)
        out.set(p, pointwise::kinematic_transport(grad_u.at(p), d.at(p), alpha));
    return out;
}

/// (grad d (.) grad d)_ij = sum_k D_i d_k D_j d_k, from a precomputed gradient
/// (D_i is the partial derivative along axis i).
inline TensorField ericksen_stress_from_gradient(const TensorField& grad_d)
{
    TensorField out(grad_d.grid());
    for (std::size_t p = 0; p < grad_d.size(); ++p) {
        const Mat3 g = grad_d.at(p);  // g[k][i] = D_i d_k
        Mat3 e{};
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k)
                    s += g[k][i] * g[k][j];
                e[i][j] = s;
                e[j][i] = s;
            }
        out.set(p, e);
    }
    return out;
}

inline TensorField ericksen_stress(const VectorField& d, Discretization disc)
{
    return ericksen_stress_from_gradient(gradient(d, disc));
}

/// max over the lattice of |S_alpha[h, d] : G - T_alpha[G, d] . h|.
///
/// With G(i, j) = d u_i / d x_j this vanishes pointwise for any tensor G, so
/// the integrated cancellation holds for every test function.
inline double check_cancellation(const VectorField& h, const VectorField& d, const TensorField& grad_u,
                                 double alpha)
{
    require_same_grid(h.grid(), d.grid(), "check_cancellation");
    require_same_grid(h.grid(), grad_u.grid(), "check_cancellation");
    double worst = 0.0;
    for (std::size_t p = 0; p < h.size(); ++p) {
        const auto hp = h.at(p);
        const auto dp = d.at(p);
        const Mat3 g = grad_u.at(p);
        const double lhs = frobenius(pointwise::leslie_stress(hp, dp, alpha), g);
        const double rhs = dot3(pointwise::kinematic_transport(g, dp, alpha), hp);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

struct StressIdentityResidual {
    /// sup |div(grad d (.) grad d) - grad d . Lap d - grad(|grad d|^2 / 2)|
    double stress_divergence = 0.0;
    /// sup |grad F(d) - grad d . f(d)|
    double chain_rule = 0.0;

    double max() const { return std::max(stress_divergence, chain_rule); }
};

/// Evaluates both rewriting identities with the discrete operators of `disc`.
/// Spectral residuals sit at roundoff for band-limited d; FD residuals are
/// O(dx^2).
inline StressIdentityResidual check_stress_divergence_identity(const VectorField& d, Discretization disc)
{
    const TensorField grad_d = gradient(d, disc);
    const VectorField lhs = divergence_tensor(ericksen_stress_from_gradient(grad_d), disc);
    VectorField rhs = apply_transpose(grad_d, laplacian(d, disc));
    ScalarField half_grad2 = norm2(grad_d);
    half_grad2 *= 0.5;
    rhs += gradient(half_grad2, disc);

    StressIdentityResidual r;
    r.stress_divergence = (lhs - rhs).max_abs();
    const VectorField grad_potential = gradient(gl_potential(d), disc);
    r.chain_rule = (grad_potential - apply_transpose(grad_d, gl_force(d))).max_abs();
    return r;
}

struct ExpansionIdentity {
    double lhs = 0.0;  // integral |Lap d - f(d)|^2
    double rhs = 0.0;  // integral |Lap d|^2 + |f|^2 - 2|grad d|^2 + 2|grad d|^2 |d|^2 + 4|(grad d)^T d|^2
    double residual() const { return std::abs(lhs - rhs); }
    double relative_residual() const { return residual() / (1.0 + std::abs(lhs)); }
};

/// Both sides of the integrated expansion of |Lap d - f(d)|^2.
inline ExpansionIdentity delta_expansion(const VectorField& d, Discretization disc)
{
    const TensorField grad_d = gradient(d, disc);
    const VectorField lap_d = laplacian(d, disc);
    const VectorField f = gl_force(d);
    ExpansionIdentity e;
    e.lhs = integrate(norm2(lap_d - f));

    ScalarField rhs(d.grid());
    for (std::size_t p = 0; p < d.size(); ++p) {
        const auto dp = d.at(p);
        const auto lp = lap_d.at(p);
        const auto fp = f.at(p);
        const Mat3 g = grad_d.at(p);  // g[i][j] = D_j d_i
        double grad2 = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                grad2 += g[i][j] * g[i][j];
        // ((grad d)^T d)_j = sum_i D_j d_i d_i
        double gtd2 = 0.0;
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int i = 0; i < 3; ++i)
                s += g[i][j] * dp[i];
            gtd2 += s * s;
        }
        rhs[p] = dot3(lp, lp) + dot3(fp, fp) - 2.0 * grad2 + 2.0 * grad2 * dot3(dp, dp) + 4.0 * gtd2;
    }
    e.rhs = integrate(rhs);
    return e;
}

/// |LHS - RHS| of the integrated expansion identity.
inline double delta_expansion_residual(const VectorField& d, Discretization disc = Discretization::spectral)
{
    return delta_expansion(d, disc).residual();
}

} // namespace elsim
