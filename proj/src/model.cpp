#include "stiffhs/model.hpp"

#include "stiffhs/errors.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

namespace stiffhs {

ConfigError::ConfigError(std::vector<std::string> failures)
    : std::invalid_argument([&] {
          std::string msg = "invalid configuration:";
          for (const auto& f : failures)
              msg += "\n  - " + f;
          return msg;
      }()),
      failures_(std::move(failures))
{
}

GrowthLaw GrowthLaw::linear(double g0, double p_max)
{
    if (!(g0 > 0.0) || !(p_max > 0.0) || !std::isfinite(g0) || !std::isfinite(p_max))
        throw DomainError("linear growth law needs g0 > 0 and p_max > 0");
    return {g0, p_max, Form::linear};
}

GrowthLaw GrowthLaw::constant(double g0, double p_max)
{
    if (!(g0 >= 0.0) || !(p_max > 0.0) || !std::isfinite(g0))
        throw DomainError("constant growth law needs g0 >= 0 and p_max > 0");
    return {g0, p_max, Form::constant_test};
}

std::string GrowthLaw::describe() const
{
    std::ostringstream os;
    if (form == Form::linear)
        os << "linear(g0=" << g0 << ", p_max=" << p_max << ")";
    else
        os << "constant-test(g0=" << g0 << ") [G' = 0, verification only]";
    return os.str();
}

double growth_rate(const GrowthLaw& law, double p) { return law(p); }

StiffnessParam::StiffnessParam(double m) : m_(m)
{
    if (!(m > 1.0) || !std::isfinite(m))
        throw DomainError("stiffness exponent m must be finite and > 1");
}

double pressure_from_density(double rho, StiffnessParam m)
{
    if (!(rho >= 0.0))
        throw DomainError("density must be nonnegative");
    const double mm = m.value();
    return mm / (mm - 1.0) * std::pow(rho, mm - 1.0);
}

double density_from_pressure(double p, StiffnessParam m)
{
    if (!(p >= 0.0))
        throw DomainError("pressure must be nonnegative");
    const double mm = m.value();
    return std::pow((mm - 1.0) / mm * p, 1.0 / (mm - 1.0));
}

ExteriorProfile ExteriorProfile::constant(double value)
{
    ExteriorProfile e;
    e.kind = Kind::constant;
    e.value = value;
    return e;
}

ExteriorProfile ExteriorProfile::plateau(double value, double flat, double zero_radius)
{
    if (!(zero_radius > flat) || flat < 0.0)
        throw DomainError("plateau profile needs 0 <= flat < zero_radius");
    ExteriorProfile e;
    e.kind = Kind::plateau;
    e.value = value;
    e.r1 = flat;
    e.r2 = zero_radius;
    return e;
}

ExteriorProfile ExteriorProfile::band(double value, double inner, double outer)
{
    if (!(outer > inner) || inner < 0.0)
        throw DomainError("band profile needs 0 <= inner < outer");
    ExteriorProfile e;
    e.kind = Kind::band;
    e.value = value;
    e.r1 = inner;
    e.r2 = outer;
    return e;
}

ExteriorProfile ExteriorProfile::gaussian(double amplitude, double ring, double width)
{
    if (!(width > 0.0) || ring < 0.0)
        throw DomainError("gaussian profile needs width > 0 and ring >= 0");
    ExteriorProfile e;
    e.kind = Kind::gaussian;
    e.value = amplitude;
    e.r1 = ring;
    e.r2 = width;
    return e;
}

double ExteriorProfile::at_radius(double r) const
{
    switch (kind) {
    case Kind::zero:
        return 0.0;
    case Kind::constant:
        return value;
    case Kind::plateau:
        if (r <= r1)
            return value;
        if (r >= r2)
            return 0.0;
        return value * 0.5 * (1.0 + std::cos(std::numbers::pi * (r - r1) / (r2 - r1)));
    case Kind::band:
        return (r >= r1 && r <= r2) ? value : 0.0;
    case Kind::gaussian: {
        const double s = (r - r1) / r2;
        return value * std::exp(-s * s);
    }
    }
    return 0.0;
}

double ExteriorProfile::max_value() const { return kind == Kind::zero ? 0.0 : value; }

double ExteriorProfile::level_radius(double level) const
{
    const double inf = std::numeric_limits<double>::infinity();
    if (max_value() < level)
        return 0.0;
    const double c = norm(center);
    switch (kind) {
    case Kind::zero:
        return 0.0;
    case Kind::constant:
        return inf;
    case Kind::plateau: {
        // cosine taper: value * (1 + cos(pi s))/2 >= level  <=>  s <= acos(2 level/value - 1)/pi
        const double s = std::acos(std::clamp(2.0 * level / value - 1.0, -1.0, 1.0)) / std::numbers::pi;
        return c + r1 + s * (r2 - r1);
    }
    case Kind::band:
        return c + r2;
    case Kind::gaussian:
        return c + r1 + r2 * std::sqrt(std::log(value / level));
    }
    return inf;
}

double ExteriorProfile::support_radius() const
{
    const double c = norm(center);
    switch (kind) {
    case Kind::zero:
        return 0.0;
    case Kind::plateau:
    case Kind::band:
        return c + r2;
    default:
        return std::numeric_limits<double>::infinity();
    }
}

std::string ExteriorProfile::describe() const
{
    std::ostringstream os;
    switch (kind) {
    case Kind::zero: os << "zero"; break;
    case Kind::constant: os << "constant(" << value << ")"; break;
    case Kind::plateau: os << "plateau(" << value << ", flat=" << r1 << ", zero=" << r2 << ")"; break;
    case Kind::band: os << "band(" << value << ", [" << r1 << ", " << r2 << "])"; break;
    case Kind::gaussian: os << "gaussian(" << value << ", ring=" << r1 << ", width=" << r2 << ")"; break;
    }
    return os.str();
}

ExteriorDensity ExteriorDensity::frozen_profile(ExteriorProfile profile)
{
    ExteriorDensity e(profile, 0.0);
    e.frozen = true;
    return e;
}

double ExteriorDensity::at_radius(double r, double t) const
{
    if (!(t >= 0.0))
        throw DomainError("exterior density is defined for t >= 0 only");
    return rho0_ext.at_radius(r) * std::exp(rate() * t);
}

double exterior_density_at(const ExteriorDensity& ext, const Point& x, double t)
{
    return ext.at_radius(ext.rho0_ext.distance(x), t);
}

VelocityCoefficient velocity_coefficient_from_density(double rho_ext)
{
    if (rho_ext >= 1.0)
        return VelocityCoefficient::infinite();
    return VelocityCoefficient::finite(1.0 / (1.0 - std::max(rho_ext, 0.0)));
}

VelocityCoefficient velocity_coefficient(const ExteriorDensity& ext, const Point& x, double t)
{
    return velocity_coefficient_from_density(exterior_density_at(ext, x, t));
}

double unit_sphere_area(int n)
{
    if (n < 1)
        throw DomainError("dimension must be >= 1");
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

} // namespace stiffhs
