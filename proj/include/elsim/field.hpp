#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "elsim/grid.hpp"

namespace elsim {

/// Real samples on a periodic lattice, one per point.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& grid, double value = 0.0)
        : grid_(grid), data_(grid.size(), value) {}
    ScalarField(const Grid& grid, std::vector<double> data)
        : grid_(grid), data_(std::move(data))
    {
        if (data_.size() != grid_.size())
            throw InvalidArgument("ScalarField: data length does not match grid");
    }

    /// Samples f(x, y, z) at every lattice point.
    template <class F>
    static ScalarField sample(const Grid& grid, F&& f)
    {
        ScalarField out(grid);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const auto x = grid.position(p);
            out.data_[p] = f(x[0], x[1], x[2]);
        }
        return out;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }
    double& operator[](std::size_t p) { return data_[p]; }
    double operator[](std::size_t p) const { return data_[p]; }
    double& at(int i, int j, int k) { return data_[grid_.index(i, j, k)]; }
    double at(int i, int j, int k) const { return data_[grid_.index(i, j, k)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

    bool all_finite() const
    {
        for (double v : data_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

    double mean() const
    {
        double s = 0.0;
        for (double v : data_)
            s += v;
        return data_.empty() ? 0.0 : s / static_cast<double>(data_.size());
    }

    ScalarField& operator+=(const ScalarField& o)
    {
        require_same_grid(grid_, o.grid_, "ScalarField +=");
        for (std::size_t p = 0; p < data_.size(); ++p)
            data_[p] += o.data_[p];
        return *this;
    }
    ScalarField& operator-=(const ScalarField& o)
    {
        require_same_grid(grid_, o.grid_, "ScalarField -=");
        for (std::size_t p = 0; p < data_.size(); ++p)
            data_[p] -= o.data_[p];
        return *this;
    }
    ScalarField& operator*=(double a)
    {
        for (double& v : data_)
            v *= a;
        return *this;
    }
    /// this += a * o
    ScalarField& axpy(double a, const ScalarField& o)
    {
        require_same_grid(grid_, o.grid_, "ScalarField axpy");
        for (std::size_t p = 0; p < data_.size(); ++p)
            data_[p] += a * o.data_[p];
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
    friend ScalarField operator*(ScalarField a, double s) { return a *= s; }
    friend ScalarField operator-(ScalarField a) { return a *= -1.0; }

    bool operator==(const ScalarField& o) const
    {
        return grid_ == o.grid_ && data_ == o.data_;
    }

private:
    Grid grid_;
    std::vector<double> data_;
};

/// Three component fields sharing one grid.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const Grid& grid, std::array<double, 3> value = {0.0, 0.0, 0.0})
        : c_{ScalarField(grid, value[0]), ScalarField(grid, value[1]), ScalarField(grid, value[2])} {}
    VectorField(ScalarField x, ScalarField y, ScalarField z)
        : c_{std::move(x), std::move(y), std::move(z)}
    {
        require_same_grid(c_[0].grid(), c_[1].grid(), "VectorField");
        require_same_grid(c_[0].grid(), c_[2].grid(), "VectorField");
    }

    template <class F>
    static VectorField sample(const Grid& grid, F&& f)
    {
        VectorField out(grid);
        for (std::size_t p = 0; p < grid.size(); ++p) {
            const auto x = grid.position(p);
            const std::array<double, 3> v = f(x[0], x[1], x[2]);
            for (int a = 0; a < 3; ++a)
                out.c_[a][p] = v[a];
        }
        return out;
    }

    const Grid& grid() const { return c_[0].grid(); }
    std::size_t size() const { return c_[0].size(); }
    ScalarField& operator[](int a) { return c_[a]; }
    const ScalarField& operator[](int a) const { return c_[a]; }

    std::array<double, 3> at(std::size_t p) const { return {c_[0][p], c_[1][p], c_[2][p]}; }
    void set(std::size_t p, const std::array<double, 3>& v)
    {
        for (int a = 0; a < 3; ++a)
            c_[a][p] = v[a];
    }

    bool all_finite() const
    {
        return c_[0].all_finite() && c_[1].all_finite() && c_[2].all_finite();
    }

    /// Largest pointwise Euclidean norm.
    double max_norm() const
    {
        double m = 0.0;
        for (std::size_t p = 0; p < size(); ++p) {
            const auto v = at(p);
            m = std::max(m, std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
        }
        return m;
    }

    double max_abs() const
    {
        return std::max(c_[0].max_abs(), std::max(c_[1].max_abs(), c_[2].max_abs()));
    }

    VectorField& operator+=(const VectorField& o)
    {
        for (int a = 0; a < 3; ++a)
            c_[a] += o.c_[a];
        return *this;
    }
    VectorField& operator-=(const VectorField& o)
    {
        for (int a = 0; a < 3; ++a)
            c_[a] -= o.c_[a];
        return *this;
    }
    VectorField& operator*=(double s)
    {
        for (auto& c : c_)
            c *= s;
        return *this;
    }
    VectorField& axpy(double s, const VectorField& o)
    {
        for (int a = 0; a < 3; ++a)
            c_[a].axpy(s, o.c_[a]);
        return *this;
    }

    friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
    friend VectorField operator*(double s, VectorField a) { return a *= s; }
    friend VectorField operator*(VectorField a, double s) { return a *= s; }
    friend VectorField operator-(VectorField a) { return a *= -1.0; }

    bool operator==(const VectorField& o) const { return c_ == o.c_; }

private:
    std::array<ScalarField, 3> c_;
};

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Nine component fields T(i, j), i, j in {0, 1, 2}. Gradients use the
/// convention grad(u)(i, j) = d u_i / d x_j: row is the component, column the
/// derivative.
class TensorField {
public:
    TensorField() = default;
    explicit TensorField(const Grid& grid)
    {
        for (auto& c : c_)
            c = ScalarField(grid);
    }

    const Grid& grid() const { return c_[0].grid(); }
    std::size_t size() const { return c_[0].size(); }
    ScalarField& operator()(int i, int j) { return c_[3 * i + j]; }
    const ScalarField& operator()(int i, int j) const { return c_[3 * i + j]; }

    Mat3 at(std::size_t p) const
    {
        Mat3 m{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m[i][j] = c_[3 * i + j][p];
        return m;
    }
    void set(std::size_t p, const Mat3& m)
    {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                c_[3 * i + j][p] = m[i][j];
    }

    TensorField transpose() const
    {
        TensorField t;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                t.c_[3 * i + j] = c_[3 * j + i];
        return t;
    }

    bool all_finite() const
    {
        for (const auto& c : c_)
            if (!c.all_finite())
                return false;
        return true;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (const auto& c : c_)
            m = std::max(m, c.max_abs());
        return m;
    }

    TensorField& operator+=(const TensorField& o)
    {
        for (int a = 0; a < 9; ++a)
            c_[a] += o.c_[a];
        return *this;
    }
    TensorField& operator-=(const TensorField& o)
    {
        for (int a = 0; a < 9; ++a)
            c_[a] -= o.c_[a];
        return *this;
    }
    TensorField& operator*=(double s)
    {
        for (auto& c : c_)
            c *= s;
        return *this;
    }
    TensorField& axpy(double s, const TensorField& o)
    {
        for (int a = 0; a < 9; ++a)
            c_[a].axpy(s, o.c_[a]);
        return *this;
    }

    friend TensorField operator+(TensorField a, const TensorField& b) { return a += b; }
    friend TensorField operator-(TensorField a, const TensorField& b) { return a -= b; }
    friend TensorField operator*(double s, TensorField a) { return a *= s; }

private:
    std::array<ScalarField, 9> c_;
};

// Pointwise helpers.

inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double frobenius(const Mat3& a, const Mat3& b)
{
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            s += a[i][j] * b[i][j];
    return s;
}

/// Applies f to every lattice point of a vector field, producing a scalar field.
template <class F>
ScalarField map_points(const VectorField& v, F&& f)
{
    ScalarField out(v.grid());
    for (std::size_t p = 0; p < v.size(); ++p)
        out[p] = f(v.at(p));
    return out;
}

/// Pointwise product of two scalar fields.
inline ScalarField multiply(const ScalarField& a, const ScalarField& b)
{
    require_same_grid(a.grid(), b.grid(), "multiply");
    ScalarField out(a.grid());
    for (std::size_t p = 0; p < a.size(); ++p)
        out[p] = a[p] * b[p];
    return out;
}

/// Pointwise Euclidean dot product.
inline ScalarField dot(const VectorField& a, const VectorField& b)
{
    require_same_grid(a.grid(), b.grid(), "dot");
    ScalarField out(a.grid());
    for (std::size_t p = 0; p < a.size(); ++p)
        out[p] = dot3(a.at(p), b.at(p));
    return out;
}

/// Pointwise squared Euclidean norm.
inline ScalarField norm2(const VectorField& a) { return dot(a, a); }

/// Pointwise squared Frobenius norm.
inline ScalarField norm2(const TensorField& t)
{
    ScalarField out(t.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t p = 0; p < t.size(); ++p)
                out[p] += t(i, j)[p] * t(i, j)[p];
    return out;
}

/// (T w)_i = sum_j T_ij w_j, pointwise.
inline VectorField apply(const TensorField& t, const VectorField& w)
{
    require_same_grid(t.grid(), w.grid(), "apply");
    VectorField out(t.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t p = 0; p < w.size(); ++p)
                out[i][p] += t(i, j)[p] * w[j][p];
    return out;
}

/// (T^T w)_j = sum_i T_ij w_i, pointwise. With T = grad(d) this is the
/// "grad d . w" contraction: (grad d . w)_j = sum_i (partial_j d_i) w_i.
inline VectorField apply_transpose(const TensorField& t, const VectorField& w)
{
    require_same_grid(t.grid(), w.grid(), "apply_transpose");
    VectorField out(t.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t p = 0; p < w.size(); ++p)
                out[j][p] += t(i, j)[p] * w[i][p];
    return out;
}

/// (a (x) b)_ij = a_i b_j, pointwise.
inline TensorField outer(const VectorField& a, const VectorField& b)
{
    require_same_grid(a.grid(), b.grid(), "outer");
    TensorField out(a.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t p = 0; p < a.size(); ++p)
                out(i, j)[p] = a[i][p] * b[j][p];
    return out;
}

/// A : B pointwise.
inline ScalarField contract(const TensorField& a, const TensorField& b)
{
    require_same_grid(a.grid(), b.grid(), "contract");
    ScalarField out(a.grid());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (std::size_t p = 0; p < a.size(); ++p)
                out[p] += a(i, j)[p] * b(i, j)[p];
    return out;
}

} // namespace elsim
