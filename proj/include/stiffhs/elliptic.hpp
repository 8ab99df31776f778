#pragma once

#include "stiffhs/grid.hpp"
#include "stiffhs/model.hpp"

#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace stiffhs {

/// Node-based solution of -(p'' + (n-1)/r p') = G(p) on [r_inner, r_outer].
/// An absent inner condition means symmetry p'(0) = 0 (only at r_inner = 0).
struct RadialProfile {
    int n = 2;
    double r_inner = 0.0;
    double r_outer = 1.0;
    std::optional<double> bc_inner;
    double bc_outer = 0.0;
    std::vector<double> samples;
    double residual = 0.0;
    int iterations = 0;

    double spacing() const { return (r_outer - r_inner) / static_cast<double>(samples.size() - 1); }
    double node(std::size_t j) const { return r_inner + static_cast<double>(j) * spacing(); }
    /// Piecewise linear interpolation; zero outside [r_inner, r_outer].
    double at(double r) const;
    double max_value() const;
};

struct NewtonOptions {
    int max_iterations = 50;
    double tolerance = 1e-10;
};

RadialProfile solve_radial(int n, double r_inner, double r_outer, std::optional<double> bc_inner,
                           double bc_outer, const GrowthLaw& law, int grid_points,
                           const NewtonOptions& options = {});

enum class Side { inner, outer };

/// |p_r| at one end from the one-sided second-order difference.
double boundary_gradient(const RadialProfile& profile, Side side);

void write_csv(std::ostream& os, const RadialProfile& profile);

/// Cell subset of a grid on which the pressure problem is posed. Cells
/// outside carry Dirichlet values (zero unless given).
struct DomainMask {
    std::vector<char> inside;
    std::vector<double> boundary_values;
    int components = 0;

    DomainMask() = default;
    DomainMask(const Grid& grid, std::vector<char> cells, std::vector<double> values = {});

    bool empty() const;
};

/// Connected components of a cell mask (face adjacency).
int count_components(const Grid& grid, std::span<const char> mask);

/// Solves -Lap_h p = G(p) on the masked cells with the grid's own conservative
/// Laplacian and direct substitution of the Dirichlet values at cut cells.
/// `ghost` imposes a Dirichlet value beyond the outer wall of a 1D grid.
std::vector<double> solve_masked(const Grid& grid, const DomainMask& mask, const GrowthLaw& law,
                                 std::optional<double> ghost = {}, double tolerance = 1e-9,
                                 int max_iterations = 50);

/// Box2d specialisation: an empty mask returns the zero field.
std::vector<double> solve_cartesian_2d(const Grid& grid, const DomainMask& mask, const GrowthLaw& law);

} // namespace stiffhs
