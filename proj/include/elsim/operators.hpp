#pragma once

#include <cmath>
#include <string>

#include "elsim/field.hpp"
#include "elsim/spectral.hpp"

namespace elsim {

/// How derivatives are taken. `fd2` is the second-order central stencil
/// (7-point Laplacian); `spectral` differentiates the trigonometric
/// interpolant exactly.
enum class Discretization { spectral, fd2 };

inline const char* to_string(Discretization d)
{
    return d == Discretization::spectral ? "spectral" : "fd2";
}

inline Discretization discretization_from_string(const std::string& s)
{
    if (s == "spectral")
        return Discretization::spectral;
    if (s == "fd2")
        return Discretization::fd2;
    throw InvalidArgument("unknown discretization '" + s + "'");
}

class InconsistentPressureProblem : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

namespace detail {

inline ScalarField spectral_derivative(const Spectrum& fh, const Grid& g, int axis)
{
    const auto& w = wavenumbers(g, false);
    Spectrum out(fh.size());
    w.for_each([&](std::size_t q, int i, int j, int k) {
        const int idx[3] = {i, j, k};
        out[q] = Complex(0.0, w.deriv[axis][idx[axis]]) * fh[q];
    });
    return ifft(g, out);
}

inline ScalarField fd_derivative(const ScalarField& f, int axis)
{
    const Grid& g = f.grid();
    ScalarField out(g);
    const double inv = 0.5 / g.dx(axis);
    const auto& n = g.n();
    for (int k = 0; k < n[2]; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                int lo[3] = {i, j, k};
                int hi[3] = {i, j, k};
                lo[axis] -= 1;
                hi[axis] += 1;
                out.at(i, j, k) = (f[g.wrapped_index(hi[0], hi[1], hi[2])]
                                   - f[g.wrapped_index(lo[0], lo[1], lo[2])]) * inv;
            }
    return out;
}

} // namespace detail

/// Partial derivative along one axis.
inline ScalarField partial(const ScalarField& f, int axis, Discretization disc)
{
    if (disc == Discretization::fd2)
        return detail::fd_derivative(f, axis);
    return detail::spectral_derivative(fft(f), f.grid(), axis);
}

/// Gradient of a scalar field.
inline VectorField gradient(const ScalarField& f, Discretization disc)
{
    if (disc == Discretization::fd2)
        return {detail::fd_derivative(f, 0), detail::fd_derivative(f, 1), detail::fd_derivative(f, 2)};
    const Spectrum fh = fft(f);
    return {detail::spectral_derivative(fh, f.grid(), 0),
            detail::spectral_derivative(fh, f.grid(), 1),
            detail::spectral_derivative(fh, f.grid(), 2)};
}

/// Gradient of a vector field: G(i, j) = d v_i / d x_j.
inline TensorField gradient(const VectorField& v, Discretization disc)
{
    TensorField g(v.grid());
    for (int i = 0; i < 3; ++i) {
        const VectorField gi = gradient(v[i], disc);
        for (int j = 0; j < 3; ++j)
            g(i, j) = gi[j];
    }
    return g;
}

inline ScalarField divergence(const VectorField& v, Discretization disc)
{
    ScalarField out = partial(v[0], 0, disc);
    out += partial(v[1], 1, disc);
    out += partial(v[2], 2, disc);
    return out;
}

/// Row-wise divergence, (div T)_i = sum_j d T_ij / d x_j.
///
/// The derivative contracts against the column index, the same index that
/// carries the derivative in grad(u). With this choice
/// integral (div T) . w = -integral T : grad(w) on the torus, and for a
/// constant d, div(h (x) d) = (d . grad) h.
inline VectorField divergence_tensor(const TensorField& t, Discretization disc)
{
    VectorField out(t.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out[i] += partial(t(i, j), j, disc);
    return out;
}

inline ScalarField laplacian(const ScalarField& f, Discretization disc)
{
    const Grid& g = f.grid();
    if (disc == Discretization::fd2) {
        ScalarField out(g);
        const auto& n = g.n();
        const double cx = 1.0 / (g.dx(0) * g.dx(0));
        const double cy = 1.0 / (g.dx(1) * g.dx(1));
        const double cz = 1.0 / (g.dx(2) * g.dx(2));
        for (int k = 0; k < n[2]; ++k)
            for (int j = 0; j < n[1]; ++j)
                for (int i = 0; i < n[0]; ++i) {
                    const double c = f.at(i, j, k);
                    out.at(i, j, k) =
                        cx * (f[g.wrapped_index(i + 1, j, k)] + f[g.wrapped_index(i - 1, j, k)] - 2 * c)
                        + cy * (f[g.wrapped_index(i, j + 1, k)] + f[g.wrapped_index(i, j - 1, k)] - 2 * c)
                        + cz * (f[g.wrapped_index(i, j, k + 1)] + f[g.wrapped_index(i, j, k - 1)] - 2 * c);
                }
        return out;
    }
    Spectrum fh = fft(f);
    const auto& w = wavenumbers(g, false);
    w.for_each([&](std::size_t q, int i, int j, int k) {
        fh[q] *= -(w.lap[0][i] + w.lap[1][j] + w.lap[2][k]);
    });
    return ifft(g, fh);
}

inline VectorField laplacian(const VectorField& v, Discretization disc)
{
    return {laplacian(v[0], disc), laplacian(v[1], disc), laplacian(v[2], disc)};
}

inline TensorField laplacian(const TensorField& t, Discretization disc)
{
    TensorField out(t.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            out(i, j) = laplacian(t(i, j), disc);
    return out;
}

/// Rectangle-rule quadrature over the whole box.
inline double integrate(const ScalarField& f)
{
    double s = 0.0;
    for (double v : f.raw())
        s += v;
    return s * f.grid().cell_volume();
}

inline double inner(const ScalarField& a, const ScalarField& b)
{
    require_same_grid(a.grid(), b.grid(), "inner");
    double s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p)
        s += a[p] * b[p];
    return s * a.grid().cell_volume();
}

inline double inner(const VectorField& a, const VectorField& b)
{
    return inner(a[0], b[0]) + inner(a[1], b[1]) + inner(a[2], b[2]);
}

inline double inner(const TensorField& a, const TensorField& b)
{
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            s += inner(a(i, j), b(i, j));
    return s;
}

inline double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }
inline double l2_norm(const VectorField& f) { return std::sqrt(inner(f, f)); }

/// Result of splitting v = w + grad(q) with div(w) = 0.
struct HelmholtzParts {
    VectorField solenoidal;
    ScalarField potential;  // zero mean
};

/// Helmholtz decomposition by Fourier multipliers. In `fd2` mode the
/// multipliers are those of the central difference, so the FD divergence of
/// the solenoidal part vanishes to roundoff. The mean of v stays in the
/// solenoidal part.
inline HelmholtzParts helmholtz_decompose(const VectorField& v, Discretization disc)
{
    const Grid& g = v.grid();
    const auto& w = wavenumbers(g, disc == Discretization::fd2);
    std::array<Spectrum, 3> vh{fft(v[0]), fft(v[1]), fft(v[2])};
    Spectrum qh(vh[0].size(), Complex(0.0, 0.0));
    w.for_each([&](std::size_t q, int i, int j, int k) {
        const double kv[3] = {w.deriv[0][i], w.deriv[1][j], w.deriv[2][k]};
        const double k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        if (k2 == 0.0)
            return;
        const Complex kdotv = kv[0] * vh[0][q] + kv[1] * vh[1][q] + kv[2] * vh[2][q];
        // grad q <-> i k q_hat, and k . v_hat = i |k|^2 q_hat.
        qh[q] = Complex(0.0, -1.0) * kdotv / k2;
        for (int a = 0; a < 3; ++a)
            vh[a][q] -= kv[a] * kdotv / k2;
    });
    return {VectorField(ifft(g, vh[0]), ifft(g, vh[1]), ifft(g, vh[2])), ifft(g, qh)};
}

/// Projection onto divergence-free fields (Leray projection).
inline VectorField leray_project(const VectorField& v, Discretization disc = Discretization::spectral)
{
    return helmholtz_decompose(v, disc).solenoidal;
}

/// Zero-mean solution of -Laplacian(P) = rhs. Throws
/// InconsistentPressureProblem when the mean of rhs exceeds 1e-8 * max|rhs|.
inline ScalarField poisson_solve(const ScalarField& rhs, Discretization disc = Discretization::spectral)
{
    const double scale = rhs.max_abs();
    if (std::abs(rhs.mean()) > 1e-8 * scale)
        throw InconsistentPressureProblem(
            "poisson_solve: right-hand side has nonzero mean; periodic pressure problem is inconsistent");
    const Grid& g = rhs.grid();
    const auto& w = wavenumbers(g, disc == Discretization::fd2);
    Spectrum h = fft(rhs);
    w.for_each([&](std::size_t q, int i, int j, int k) {
        const double l = w.lap[0][i] + w.lap[1][j] + w.lap[2][k];
        h[q] = l == 0.0 ? Complex(0.0, 0.0) : h[q] / l;
    });
    return ifft(g, h);
}

/// Solves (I - c Laplacian) x = b, the implicit diffusion step.
inline ScalarField solve_shifted_laplacian(const ScalarField& b, double c, Discretization disc)
{
    const Grid& g = b.grid();
    const auto& w = wavenumbers(g, disc == Discretization::fd2);
    Spectrum h = fft(b);
    w.for_each([&](std::size_t q, int i, int j, int k) {
        h[q] /= 1.0 + c * (w.lap[0][i] + w.lap[1][j] + w.lap[2][k]);
    });
    return ifft(g, h);
}

inline VectorField solve_shifted_laplacian(const VectorField& b, double c, Discretization disc)
{
    return {solve_shifted_laplacian(b[0], c, disc), solve_shifted_laplacian(b[1], c, disc),
            solve_shifted_laplacian(b[2], c, disc)};
}

/// (a . grad) v, with grad v supplied.
inline VectorField advect(const VectorField& a, const TensorField& grad_v)
{
    return apply(grad_v, a);
}

} // namespace elsim
