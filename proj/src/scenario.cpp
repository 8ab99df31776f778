#include "stiffhs/scenario.hpp"

#include "stiffhs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stiffhs {

Grid GeometrySpec::make_grid() const
{
    switch (kind) {
    case GeometryKind::slab:
        return Grid::slab(extent, dx);
    case GeometryKind::radial:
        return Grid::radial(dimension, extent, dx);
    case GeometryKind::box2d:
        return Grid::box(extent, dx);
    }
    throw DomainError("unknown geometry");
}

InitialRegion InitialRegion::ball(double radius, Point center)
{
    InitialRegion r;
    r.kind = Kind::ball;
    r.outer_radius = radius;
    r.center = center;
    return r;
}

InitialRegion InitialRegion::annulus(double inner, double outer, Point center)
{
    InitialRegion r;
    r.kind = Kind::annulus;
    r.inner_radius = inner;
    r.outer_radius = outer;
    r.center = center;
    return r;
}

bool InitialRegion::contains(const Point& x) const
{
    const double d = std::hypot(x[0] - center[0], x[1] - center[1]);
    switch (kind) {
    case Kind::empty: return false;
    case Kind::ball: return d < outer_radius;
    case Kind::annulus: return d > inner_radius && d < outer_radius;
    case Kind::mask: return false; // masks are defined cellwise only
    }
    return false;
}

std::vector<char> InitialRegion::cell_mask(const Grid& grid) const
{
    std::vector<char> mask(grid.size(), 0);
    if (kind == Kind::mask) {
        if (grid.kind() != GeometryKind::box2d)
            throw DomainError("cell masks need a box2d grid");
        if (static_cast<int>(rows.size()) != grid.ny())
            throw DomainError("mask row count does not match the grid");
        for (int j = 0; j < grid.ny(); ++j) {
            if (static_cast<int>(rows[j].size()) != grid.nx())
                throw DomainError("mask row length does not match the grid");
            for (int i = 0; i < grid.nx(); ++i)
                mask[grid.index(i, j)] = rows[j][i] == '#';
        }
        return mask;
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
        Point x = grid.position(k);
        if (grid.kind() == GeometryKind::radial)
            x = {x[0], 0.0}; // radial sets are measured from the origin
        mask[k] = contains(x);
    }
    return mask;
}

double InitialRegion::bounding_radius(const Grid* grid) const
{
    switch (kind) {
    case Kind::empty: return 0.0;
    case Kind::ball:
    case Kind::annulus: return norm(center) + outer_radius;
    case Kind::mask: {
        if (!grid)
            return std::numeric_limits<double>::infinity();
        double r = 0.0;
        const auto m = cell_mask(*grid);
        for (std::size_t k = 0; k < m.size(); ++k)
            if (m[k])
                r = std::max(r, grid->radius(k) + grid->dx());
        return r;
    }
    }
    return 0.0;
}

std::string InitialRegion::describe() const
{
    std::ostringstream os;
    switch (kind) {
    case Kind::empty: os << "empty"; break;
    case Kind::ball: os << "ball(R=" << outer_radius << ")"; break;
    case Kind::annulus: os << "annulus(" << inner_radius << ", " << outer_radius << ")"; break;
    case Kind::mask: os << "mask(" << rows.size() << " rows)"; break;
    }
    return os.str();
}

OutputSchedule OutputSchedule::every(double interval, double horizon)
{
    if (!(interval > 0.0) || !(horizon >= 0.0))
        throw DomainError("output interval must be > 0 and horizon >= 0");
    OutputSchedule s;
    const auto count = static_cast<long>(std::floor(horizon / interval + 1e-9));
    for (long k = 0; k <= count; ++k)
        s.times.push_back(std::min(k * interval, horizon));
    if (s.times.back() < horizon - 1e-12 * std::max(1.0, horizon))
        s.times.push_back(horizon);
    return s;
}

double Scenario::containment_radius() const
{
    Grid grid = make_grid();
    const double omega = omega0.bounding_radius(&grid);
    return std::max(omega, rho0_ext.level_radius(0.5));
}

double Scenario::truncation_radius() const
{
    const int n = geometry.kind == GeometryKind::radial ? geometry.dimension
                                                        : (geometry.kind == GeometryKind::slab ? 1 : 2);
    return containment_radius() * std::exp(16.0 * growth(0.0) * horizon / n);
}

std::vector<std::string> validate(const Scenario& s)
{
    std::vector<std::string> f;
    const auto& g = s.geometry;
    if (!(g.dx > 0.0))
        f.push_back("geometry.dx must be > 0");
    if (!(g.extent > 0.0))
        f.push_back("geometry extent must be > 0");
    if (g.kind == GeometryKind::radial && g.dimension < 1)
        f.push_back("radial geometry needs dimension >= 1");
    if (g.kind == GeometryKind::slab && g.dimension != 1)
        f.push_back("slab geometry has dimension 1");
    if (g.kind == GeometryKind::box2d && g.dimension != 2)
        f.push_back("box2d geometry has dimension 2");
    if (g.dx > 0.0 && g.extent > 0.0 && g.extent / g.dx < 3.0)
        f.push_back("geometry must span at least 3 cells");

    if (s.growth.form == GrowthLaw::Form::linear && !(s.growth.g0 > 0.0))
        f.push_back("growth.g0 must be > 0 for the linear law");
    if (s.growth.form == GrowthLaw::Form::constant_test && !(s.growth.g0 >= 0.0))
        f.push_back("growth.g0 must be >= 0");
    if (!(s.growth.p_max > 0.0))
        f.push_back("growth.p_max must be > 0");

    const double emax = s.rho0_ext.max_value();
    if (!(emax >= 0.0) || !(emax < 1.0))
        f.push_back("rho0_ext must satisfy 0 <= rho^E_0 < 1 (max is " + std::to_string(emax) + ")");
    if (s.rho0_ext.kind == ExteriorProfile::Kind::plateau ||
        s.rho0_ext.kind == ExteriorProfile::Kind::band) {
        if (!(s.rho0_ext.r2 > s.rho0_ext.r1))
            f.push_back("rho0_ext radii must be increasing");
    }

    if (s.m_list.empty())
        f.push_back("m_list must not be empty");
    for (std::size_t i = 0; i < s.m_list.size(); ++i) {
        const double m = s.m_list[i];
        if (!(m > 1.0) || !std::isfinite(m))
            f.push_back("m_list entries must be finite and > 1 (got " + std::to_string(m) + ")");
        if (i > 0 && !(m > s.m_list[i - 1]))
            f.push_back("m_list must be strictly increasing");
    }
    if (!(s.horizon >= 0.0))
        f.push_back("horizon must be >= 0");
    if (s.output.times.empty() || s.output.times.front() != 0.0)
        f.push_back("output schedule must start at t = 0");
    for (std::size_t i = 1; i < s.output.times.size(); ++i)
        if (!(s.output.times[i] > s.output.times[i - 1]))
            f.push_back("output times must be strictly increasing");
    if (!s.output.times.empty() && s.output.times.back() > s.horizon + 1e-12)
        f.push_back("output times must not exceed the horizon");

    if (s.support_threshold && !(*s.support_threshold > 0.0))
        f.push_back("support_threshold must be > 0");
    if (s.sigma && !(*s.sigma >= 0.0))
        f.push_back("sigma must be >= 0");
    if (!(s.solver.cfl_safety > 0.0 && s.solver.cfl_safety <= 1.0))
        f.push_back("solver.cfl_safety must lie in (0, 1]");
    if (!(s.solver.dt_cap > 0.0))
        f.push_back("solver.dt_cap must be > 0");
    if (!(s.front.dt > 0.0))
        f.push_back("front.dt must be > 0");
    if (s.front.grid_points < 16)
        f.push_back("front.grid_points must be >= 16");

    if (s.omega0.kind == InitialRegion::Kind::ball && !(s.omega0.outer_radius > 0.0))
        f.push_back("omega0 ball radius must be > 0");
    if (s.omega0.kind == InitialRegion::Kind::annulus &&
        !(s.omega0.outer_radius > s.omega0.inner_radius && s.omega0.inner_radius >= 0.0))
        f.push_back("omega0 annulus radii must satisfy 0 <= inner < outer");
    if (s.omega0.kind == InitialRegion::Kind::mask && s.geometry.kind != GeometryKind::box2d)
        f.push_back("omega0 masks need box2d geometry");
    if (g.kind == GeometryKind::radial && norm(s.omega0.center) != 0.0)
        f.push_back("radial geometry needs omega0 centred at the origin");
    if (f.empty() && s.omega0.kind != InitialRegion::Kind::mask &&
        s.omega0.bounding_radius() > g.extent)
        f.push_back("omega0 does not fit inside the domain");
    return f;
}

std::optional<std::string> enforce_truncation(Scenario& s)
{
    const double r = s.containment_radius();
    if (!std::isfinite(r))
        return "truncation bound not applicable: {rho^E_0 >= 1/2} is unbounded";
    double need = s.truncation_radius();
    // The box is square, so its half width must cover the radius.
    if (need <= s.geometry.extent)
        return std::nullopt;
    std::ostringstream os;
    os << "outer extent " << s.geometry.extent << " is below the truncation bound " << need
       << "; expanded (dx kept at " << s.geometry.dx << ")";
    s.geometry.extent = std::ceil(need / s.geometry.dx) * s.geometry.dx;
    return os.str();
}

} // namespace stiffhs
