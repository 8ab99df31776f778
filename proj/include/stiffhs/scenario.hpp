#pragma once

#include "stiffhs/grid.hpp"
#include "stiffhs/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stiffhs {

struct GeometrySpec {
    GeometryKind kind = GeometryKind::radial;
    int dimension = 2;
    double extent = 1.0; // outer radius (radial) or half width (slab, box2d)
    double dx = 0.01;

    Grid make_grid() const;
};

/// Initial positive set Omega_0 (open; a cell belongs to it when its centre does).
struct InitialRegion {
    enum class Kind { empty, ball, annulus, mask };

    Kind kind = Kind::empty;
    Point center{0.0, 0.0};
    double inner_radius = 0.0;
    double outer_radius = 0.0;
    /// box2d masks: one string per row (row 0 at the bottom), '#' marks a cell of Omega_0.
    std::vector<std::string> rows;

    static InitialRegion empty() { return {}; }
    static InitialRegion ball(double radius, Point center = {0.0, 0.0});
    static InitialRegion annulus(double inner, double outer, Point center = {0.0, 0.0});

    bool contains(const Point& x) const;
    std::vector<char> cell_mask(const Grid& grid) const;
    /// Smallest radius about the origin enclosing the set.
    double bounding_radius(const Grid* grid = nullptr) const;
    std::string describe() const;
};

struct OutputSchedule {
    std::vector<double> times; // strictly increasing, includes 0

    static OutputSchedule every(double interval, double horizon);
};

struct SolverSettings {
    double cfl_safety = 0.4;
    double dt_cap = 1e-2;
};

struct FrontSettings {
    double dt = 1e-3;
    int grid_points = 256;
};

struct Scenario {
    GeometrySpec geometry;
    InitialRegion omega0;
    ExteriorProfile rho0_ext;
    GrowthLaw growth;
    std::vector<double> m_list{40.0};
    double horizon = 1.0;
    OutputSchedule output;
    std::optional<double> support_threshold; // default 1e-3 p_max
    std::optional<double> sigma;             // default 4 dx
    SolverSettings solver;
    FrontSettings front;

    ExteriorDensity exterior() const { return {rho0_ext, growth(0.0)}; }
    double epsilon_support() const { return support_threshold.value_or(1e-3 * growth.p_max); }
    double sup_radius() const { return sigma.value_or(4.0 * geometry.dx); }
    Grid make_grid() const { return geometry.make_grid(); }

    /// Smallest R with Omega_0 and {rho^E_0 >= 1/2} inside B_R.
    double containment_radius() const;
    /// Outer extent the domain needs so the superbarrier bound R e^{16 G(0) T / n} fits.
    double truncation_radius() const;
};

/// Every constraint the scenario violates (empty when valid).
std::vector<std::string> validate(const Scenario& s);

/// Expands the outer extent to the truncation radius if needed (dx is kept).
/// Returns a warning when an expansion happened or the bound is inapplicable.
std::optional<std::string> enforce_truncation(Scenario& s);

} // namespace stiffhs
