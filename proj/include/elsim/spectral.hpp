#pragma once

#include <array>
#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "elsim/field.hpp"

namespace elsim {

using Complex = std::complex<double>;

/// Half spectrum of a real field: axis 0 holds n0/2 + 1 modes, the other axes
/// hold all modes in FFTW order.
using Spectrum = std::vector<Complex>;

namespace detail {

/// Owns an r2c/c2r plan pair and aligned work buffers for one lattice shape.
/// Plans are built with FFTW_ESTIMATE so the transform is reproducible run to
/// run.
class FftPlan {
public:
    explicit FftPlan(const std::array<int, 3>& n) : n_(n)
    {
        real_size_ = static_cast<std::size_t>(n[0]) * n[1] * n[2];
        half_size_ = static_cast<std::size_t>(n[0] / 2 + 1) * n[1] * n[2];
        real_ = static_cast<double*>(fftw_malloc(sizeof(double) * real_size_));
        spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * half_size_));
        // FFTW is row-major with the last index fastest; our layout is x fastest.
        forward_ = fftw_plan_dft_r2c_3d(n[2], n[1], n[0], real_, spec_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_3d(n[2], n[1], n[0], spec_, real_, FFTW_ESTIMATE);
    }
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    ~FftPlan()
    {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t half_size() const { return half_size_; }

    void forward(const std::vector<double>& in, Spectrum& out)
    {
        std::memcpy(real_, in.data(), sizeof(double) * real_size_);
        fftw_execute(forward_);
        out.resize(half_size_);
        std::memcpy(static_cast<void*>(out.data()), spec_, sizeof(fftw_complex) * half_size_);
    }

    /// Normalized inverse: backward(forward(f)) == f up to roundoff.
    void backward(const Spectrum& in, std::vector<double>& out)
    {
        std::memcpy(spec_, in.data(), sizeof(fftw_complex) * half_size_);
        fftw_execute(backward_);
        out.resize(real_size_);
        const double scale = 1.0 / static_cast<double>(real_size_);
        for (std::size_t p = 0; p < real_size_; ++p)
            out[p] = real_[p] * scale;
    }

private:
    std::array<int, 3> n_;
    std::size_t real_size_ = 0;
    std::size_t half_size_ = 0;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

inline FftPlan& plan_for(const std::array<int, 3>& n)
{
    thread_local std::map<std::array<int, 3>, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[n];
    if (!slot)
        slot = std::make_unique<FftPlan>(n);
    return *slot;
}

} // namespace detail

/// Per-axis symbol tables for the half spectrum of a grid.
///
/// `deriv` is the first-derivative symbol (d/dx -> i * deriv); `lap` is the
/// second-derivative symbol (d2/dx2 -> -lap). Spectral tables use the exact
/// wavenumber, with the Nyquist mode of odd derivatives set to zero. FD tables
/// use the symbols of the central difference and the three-point Laplacian.
struct Wavenumbers {
    std::array<std::vector<double>, 3> deriv;
    std::array<std::vector<double>, 3> lap;
    std::array<int, 3> extent{};  // modes stored per axis (axis 0 is halved)

    static Wavenumbers make(const Grid& g, bool finite_difference)
    {
        Wavenumbers w;
        for (int a = 0; a < 3; ++a) {
            const int n = g.n(a);
            const int m_count = a == 0 ? n / 2 + 1 : n;
            w.extent[a] = m_count;
            w.deriv[a].resize(m_count);
            w.lap[a].resize(m_count);
            const double base = 2.0 * std::numbers::pi / g.box_length(a);
            const double h = g.dx(a);
            for (int m = 0; m < m_count; ++m) {
                const int mm = (a != 0 && m > n / 2) ? m - n : m;
                const double k = base * mm;
                const bool nyquist = (n % 2 == 0) && (mm == n / 2 || mm == -n / 2);
                if (finite_difference) {
                    w.deriv[a][m] = std::sin(k * h) / h;
                    const double s = std::sin(0.5 * k * h);
                    w.lap[a][m] = 4.0 * s * s / (h * h);
                } else {
                    w.deriv[a][m] = nyquist ? 0.0 : k;
                    w.lap[a][m] = k * k;
                }
            }
        }
        return w;
    }

    /// Calls f(flat_index, i, j, k) over every stored mode.
    template <class F>
    void for_each(F&& f) const
    {
        std::size_t q = 0;
        for (int k = 0; k < extent[2]; ++k)
            for (int j = 0; j < extent[1]; ++j)
                for (int i = 0; i < extent[0]; ++i, ++q)
                    f(q, i, j, k);
    }
};

inline const Wavenumbers& wavenumbers(const Grid& g, bool finite_difference)
{
    thread_local std::map<std::pair<std::pair<std::array<int, 3>, std::array<double, 3>>, bool>,
                          std::unique_ptr<Wavenumbers>>
        cache;
    auto& slot = cache[{{g.n(), g.box_length()}, finite_difference}];
    if (!slot)
        slot = std::make_unique<Wavenumbers>(Wavenumbers::make(g, finite_difference));
    return *slot;
}

inline Spectrum fft(const ScalarField& f)
{
    Spectrum s;
    detail::plan_for(f.grid().n()).forward(f.raw(), s);
    return s;
}

inline ScalarField ifft(const Grid& g, const Spectrum& s)
{
    std::vector<double> out;
    detail::plan_for(g.n()).backward(s, out);
    return ScalarField(g, std::move(out));
}

} // namespace elsim
