#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace elsim {

/// Thrown when an operation is given fields or arguments it cannot work with.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Periodic rectangular lattice. Point (i, j, k) sits at (i dx, j dy, k dz);
/// storage is row-major with x fastest.
class Grid {
public:
    Grid() = default;

    Grid(std::array<int, 3> n, std::array<double, 3> box_length)
        : n_(n), box_(box_length)
    {
        for (int a = 0; a < 3; ++a) {
            if (n_[a] < 4)
                throw InvalidArgument("grid.n entries must be >= 4");
            if (!(box_[a] > 0.0) || !std::isfinite(box_[a]))
                throw InvalidArgument("grid.box_length entries must be positive");
            dx_[a] = box_[a] / n_[a];
        }
    }

    /// Cubic lattice with n points per axis on a box of side L.
    static Grid cube(int n, double L = 1.0) { return Grid({n, n, n}, {L, L, L}); }

    const std::array<int, 3>& n() const { return n_; }
    int n(int axis) const { return n_[axis]; }
    const std::array<double, 3>& box_length() const { return box_; }
    double box_length(int axis) const { return box_[axis]; }
    const std::array<double, 3>& dx() const { return dx_; }
    double dx(int axis) const { return dx_[axis]; }

    std::size_t size() const
    {
        return static_cast<std::size_t>(n_[0]) * n_[1] * n_[2];
    }
    double cell_volume() const { return dx_[0] * dx_[1] * dx_[2]; }
    double volume() const { return box_[0] * box_[1] * box_[2]; }
    double min_dx() const { return std::min(dx_[0], std::min(dx_[1], dx_[2])); }

    std::size_t index(int i, int j, int k) const
    {
        return static_cast<std::size_t>(i)
            + static_cast<std::size_t>(n_[0]) * (static_cast<std::size_t>(j)
            + static_cast<std::size_t>(n_[1]) * static_cast<std::size_t>(k));
    }

    /// Index with periodic wrap on every axis.
    std::size_t wrapped_index(int i, int j, int k) const
    {
        return index(wrap(i, n_[0]), wrap(j, n_[1]), wrap(k, n_[2]));
    }

    std::array<double, 3> position(int i, int j, int k) const
    {
        return {i * dx_[0], j * dx_[1], k * dx_[2]};
    }

    std::array<double, 3> position(std::size_t flat) const
    {
        const auto c = coords(flat);
        return position(c[0], c[1], c[2]);
    }

    std::array<int, 3> coords(std::size_t flat) const
    {
        const int i = static_cast<int>(flat % n_[0]);
        flat /= n_[0];
        const int j = static_cast<int>(flat % n_[1]);
        const int k = static_cast<int>(flat / n_[1]);
        return {i, j, k};
    }

    /// Minimum-image separation of b relative to a along one axis.
    double min_image(int axis, double delta) const
    {
        const double L = box_[axis];
        delta -= L * std::round(delta / L);
        return delta;
    }

    bool operator==(const Grid& o) const { return n_ == o.n_ && box_ == o.box_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    static int wrap(int i, int n)
    {
        const int r = i % n;
        return r < 0 ? r + n : r;
    }

private:
    std::array<int, 3> n_{4, 4, 4};
    std::array<double, 3> box_{1.0, 1.0, 1.0};
    std::array<double, 3> dx_{0.25, 0.25, 0.25};
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what)
{
    if (a != b)
        throw InvalidArgument(std::string(what) + ": grid mismatch");
}

} // namespace elsim
