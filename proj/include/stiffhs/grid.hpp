#pragma once

#include "stiffhs/model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace stiffhs {

enum class GeometryKind { slab, radial, box2d };

const char* to_string(GeometryKind kind);

/// Uniform cell-centred grid. Three layouts share one conservative Laplacian:
///  - slab:   1D cells on [-H, H];
///  - radial: 1D cells on [0, L] carrying the operator r^{1-n} (r^{n-1} u')';
///  - box2d:  nx * nx cells on [-H, H]^2 with the 5-point stencil.
/// The discrete Laplacian is sum_j w_ij (u_j - u_i) with w_ij >= 0, and
/// sum_i volume_i * (Lap u)_i telescopes to the boundary flux.
class Grid {
public:
    static Grid slab(double half_width, double dx);
    static Grid radial(int n, double outer_radius, double dx);
    static Grid box(double half_width, double dx);

    GeometryKind kind() const noexcept { return kind_; }
    /// Space dimension n (radial grids carry any n >= 1).
    int dimension() const noexcept { return dim_; }
    bool is_1d() const noexcept { return kind_ != GeometryKind::box2d; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx_) * ny_; }
    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    double dx() const noexcept { return dx_; }
    /// Outer radius (radial) or half width (slab, box).
    double extent() const noexcept { return extent_; }

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    Point position(std::size_t k) const;
    double radius(std::size_t k) const;
    double volume(std::size_t k) const;

    /// 1D stencil weights toward the left / right neighbour (zero at walls).
    double weight_left(int i) const { return w_left_[i]; }
    double weight_right(int i) const { return w_right_[i]; }
    /// Weight the last 1D cell would carry toward a ghost cell beyond the outer wall.
    double ghost_weight() const noexcept { return ghost_weight_; }
    /// Largest diagonal of the stencil, bounded by 2n / dx^2.
    double max_stencil_sum() const noexcept { return max_stencil_sum_; }

    /// Zero-flux Laplacian; with `ghost` the outer 1D wall sees that value instead.
    std::vector<double> laplacian(std::span<const double> u, std::optional<double> ghost = {}) const;
    double laplacian_at(std::span<const double> u, std::size_t k, std::optional<double> ghost = {}) const;

    double integrate(std::span<const double> f) const;

    template <class F>
    void for_each_neighbor(std::size_t k, F&& f) const
    {
        if (is_1d()) {
            const int i = static_cast<int>(k);
            if (i > 0 && w_left_[i] > 0.0)
                f(k - 1, w_left_[i]);
            if (i + 1 < nx_ && w_right_[i] > 0.0)
                f(k + 1, w_right_[i]);
            return;
        }
        const int i = static_cast<int>(k % nx_);
        const int j = static_cast<int>(k / nx_);
        const double w = 1.0 / (dx_ * dx_);
        if (i > 0) f(k - 1, w);
        if (i + 1 < nx_) f(k + 1, w);
        if (j > 0) f(k - nx_, w);
        if (j + 1 < ny_) f(k + nx_, w);
    }

    bool same_layout(const Grid& other) const;

private:
    Grid() = default;
    void finish_1d();

    GeometryKind kind_ = GeometryKind::slab;
    int dim_ = 1;
    int nx_ = 0;
    int ny_ = 1;
    double dx_ = 0.0;
    double extent_ = 0.0;
    double lo_ = 0.0;
    std::vector<double> w_left_, w_right_, volume_;
    double ghost_weight_ = 0.0;
    double max_stencil_sum_ = 0.0;
};

/// Discrete sup-convolution: each cell takes the maximum over cells whose
/// centres lie within `sigma` (for radial grids the ball of radius sigma in
/// R^n reaches exactly the radii [r - sigma, r + sigma]).
std::vector<double> sup_convolution(const Grid& grid, std::span<const double> field, double sigma);

} // namespace stiffhs
