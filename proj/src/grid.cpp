#include "stiffhs/grid.hpp"

#include "stiffhs/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stiffhs {

const char* to_string(GeometryKind kind)
{
    switch (kind) {
    case GeometryKind::slab: return "slab";
    case GeometryKind::radial: return "radial";
    case GeometryKind::box2d: return "box2d";
    }
    return "?";
}

namespace {

int cell_count(double length, double dx)
{
    if (!(dx > 0.0) || !(length > 0.0))
        throw DomainError("grid needs positive extent and spacing");
    const double cells = std::round(length / dx);
    if (cells < 3.0 || cells > 1e8)
        throw DomainError("grid must have between 3 and 1e8 cells per axis");
    return static_cast<int>(cells);
}

} // namespace

Grid Grid::slab(double half_width, double dx)
{
    Grid g;
    g.kind_ = GeometryKind::slab;
    g.dim_ = 1;
    g.nx_ = cell_count(2.0 * half_width, dx);
    g.dx_ = dx;
    g.extent_ = 0.5 * g.nx_ * dx;
    g.lo_ = -g.extent_;
    g.finish_1d();
    return g;
}

Grid Grid::radial(int n, double outer_radius, double dx)
{
    if (n < 1)
        throw DomainError("radial grid needs dimension n >= 1");
    Grid g;
    g.kind_ = GeometryKind::radial;
    g.dim_ = n;
    g.nx_ = cell_count(outer_radius, dx);
    g.dx_ = dx;
    g.extent_ = g.nx_ * dx;
    g.lo_ = 0.0;
    g.finish_1d();
    return g;
}

Grid Grid::box(double half_width, double dx)
{
    Grid g;
    g.kind_ = GeometryKind::box2d;
    g.dim_ = 2;
    g.nx_ = cell_count(2.0 * half_width, dx);
    g.ny_ = g.nx_;
    g.dx_ = dx;
    g.extent_ = 0.5 * g.nx_ * dx;
    g.lo_ = -g.extent_;
    g.max_stencil_sum_ = 4.0 / (dx * dx);
    return g;
}

void Grid::finish_1d()
{
    const int n = nx_;
    w_left_.assign(n, 0.0);
    w_right_.assign(n, 0.0);
    volume_.assign(n, 0.0);
    const double h2 = dx_ * dx_;
    if (kind_ == GeometryKind::slab) {
        for (int i = 0; i < n; ++i) {
            w_left_[i] = i > 0 ? 1.0 / h2 : 0.0;
            w_right_[i] = i + 1 < n ? 1.0 / h2 : 0.0;
            volume_[i] = dx_;
        }
        ghost_weight_ = 1.0 / h2;
    } else {
        // Face areas r^{n-1} and shell volumes (r_+^n - r_-^n)/n; the
        // common factor |S^{n-1}| is applied in volume() only.
        const int d = dim_;
        auto face = [&](int f) { return std::pow(f * dx_, d - 1); };
        for (int i = 0; i < n; ++i) {
            const double shell = (std::pow((i + 1) * dx_, d) - std::pow(i * dx_, d)) / d;
            const double scale = shell / dx_; // r-weighted cell width
            w_left_[i] = i > 0 ? face(i) / (scale * h2) : 0.0;
            w_right_[i] = i + 1 < n ? face(i + 1) / (scale * h2) : 0.0;
            volume_[i] = unit_sphere_area(d) * shell;
        }
        const double shell = (std::pow(n * dx_, d) - std::pow((n - 1) * dx_, d)) / d;
        ghost_weight_ = face(n) / (shell / dx_ * h2);
    }
    max_stencil_sum_ = 0.0;
    for (int i = 0; i < n; ++i)
        max_stencil_sum_ = std::max(max_stencil_sum_, w_left_[i] + w_right_[i]);
    max_stencil_sum_ = std::max(max_stencil_sum_, w_left_[n - 1] + ghost_weight_);
}

Point Grid::position(std::size_t k) const
{
    if (is_1d())
        return {lo_ + (static_cast<double>(k) + 0.5) * dx_, 0.0};
    const double i = static_cast<double>(k % nx_);
    const double j = static_cast<double>(k / nx_);
    return {lo_ + (i + 0.5) * dx_, lo_ + (j + 0.5) * dx_};
}

double Grid::radius(std::size_t k) const { return norm(position(k)); }

double Grid::volume(std::size_t k) const
{
    if (is_1d())
        return volume_[k];
    return dx_ * dx_;
}

double Grid::laplacian_at(std::span<const double> u, std::size_t k, std::optional<double> ghost) const
{
    double acc = 0.0;
    for_each_neighbor(k, [&](std::size_t j, double w) { acc += w * (u[j] - u[k]); });
    if (ghost && is_1d() && static_cast<int>(k) == nx_ - 1)
        acc += ghost_weight_ * (*ghost - u[k]);
    return acc;
}

std::vector<double> Grid::laplacian(std::span<const double> u, std::optional<double> ghost) const
{
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k)
        out[k] = laplacian_at(u, k, ghost);
    return out;
}

double Grid::integrate(std::span<const double> f) const
{
    double s = 0.0;
    for (std::size_t k = 0; k < size(); ++k)
        s += volume(k) * f[k];
    return s;
}

bool Grid::same_layout(const Grid& other) const
{
    return kind_ == other.kind_ && dim_ == other.dim_ && nx_ == other.nx_ && ny_ == other.ny_ &&
           dx_ == other.dx_ && lo_ == other.lo_;
}

std::vector<double> sup_convolution(const Grid& grid, std::span<const double> field, double sigma)
{
    if (!(sigma >= 0.0))
        throw DomainError("sup-convolution radius must be >= 0");
    if (field.size() != grid.size())
        throw DomainError("field does not match grid");
    // Tolerance keeps radii that are exact multiples of dx on the inclusive side.
    const int reach = static_cast<int>(std::floor(sigma / grid.dx() + 1e-9));
    std::vector<double> out(field.begin(), field.end());
    if (reach == 0)
        return out;
    if (grid.is_1d()) {
        const int n = grid.nx();
        for (int i = 0; i < n; ++i) {
            double best = field[i];
            for (int j = std::max(0, i - reach); j <= std::min(n - 1, i + reach); ++j)
                best = std::max(best, field[j]);
            out[i] = best;
        }
        return out;
    }
    const int nx = grid.nx();
    const int ny = grid.ny();
    const double lim = (sigma / grid.dx()) * (sigma / grid.dx()) + 1e-9;
    std::vector<std::pair<int, int>> offsets;
    for (int dj = -reach; dj <= reach; ++dj)
        for (int di = -reach; di <= reach; ++di)
            if (di * di + dj * dj <= lim)
                offsets.emplace_back(di, dj);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double best = field[grid.index(i, j)];
            for (const auto& [di, dj] : offsets) {
                const int a = i + di;
                const int b = j + dj;
                if (a >= 0 && a < nx && b >= 0 && b < ny)
                    best = std::max(best, field[grid.index(a, b)]);
            }
            out[grid.index(i, j)] = best;
        }
    return out;
}

} // namespace stiffhs
