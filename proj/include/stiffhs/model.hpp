#pragma once

#include <array>
#include <cmath>
#include <string>

namespace stiffhs {

using Point = std::array<double, 2>;

inline double norm(const Point& x) { return std::hypot(x[0], x[1]); }

/// Growth law G(p). The linear form G(p) = g0 (1 - p/p_max) is strictly
/// decreasing with G(p_max) = 0. The constant form G == g0 exists only for
/// verification runs with closed-form answers (g0 = 0 switches growth off).
struct GrowthLaw {
    enum class Form { linear, constant_test };

    double g0 = 1.0;
    double p_max = 1.0;
    Form form = Form::linear;

    static GrowthLaw linear(double g0, double p_max);
    static GrowthLaw constant(double g0, double p_max = 1.0);
    static GrowthLaw off() { return constant(0.0); }

    double operator()(double p) const
    {
        return form == Form::linear ? g0 * (1.0 - p / p_max) : g0;
    }

    double derivative(double /*p*/) const { return form == Form::linear ? -g0 / p_max : 0.0; }

    /// True when the law satisfies G' < 0; the constant form is flagged in reports.
    bool strictly_decreasing() const { return form == Form::linear; }

    std::string describe() const;
};

double growth_rate(const GrowthLaw& law, double p);

/// Pressure exponent m of the power law p = m/(m-1) rho^(m-1).
class StiffnessParam {
public:
    explicit StiffnessParam(double m);

    double value() const noexcept { return m_; }
    operator double() const noexcept { return m_; }

private:
    double m_;
};

double pressure_from_density(double rho, StiffnessParam m);
double density_from_pressure(double p, StiffnessParam m);

/// Radially symmetric exterior density profile rho^E_0 about `center`.
struct ExteriorProfile {
    enum class Kind { zero, constant, plateau, band, gaussian };

    Kind kind = Kind::zero;
    double value = 0.0;  // plateau/band/constant level, gaussian amplitude
    double r1 = 0.0;     // plateau flat radius, band inner radius, gaussian center radius
    double r2 = 0.0;     // plateau zero radius, band outer radius, gaussian width
    Point center{0.0, 0.0};

    static ExteriorProfile zero() { return {}; }
    static ExteriorProfile constant(double value);
    /// value on |x| <= flat, cosine taper to 0 at |x| = zero_radius.
    static ExteriorProfile plateau(double value, double flat, double zero_radius);
    /// value * indicator of inner <= |x| <= outer (discontinuous; nucleation tests).
    static ExteriorProfile band(double value, double inner, double outer);
    /// amplitude * exp(-(|x| - ring)^2 / width^2).
    static ExteriorProfile gaussian(double amplitude, double ring, double width);

    double at_radius(double r) const;
    double operator()(const Point& x) const { return at_radius(distance(x)); }
    double distance(const Point& x) const { return std::hypot(x[0] - center[0], x[1] - center[1]); }

    double max_value() const;
    bool continuous() const { return kind != Kind::band; }
    /// Smallest radius (about the origin) containing {rho^E_0 >= level}; infinity if unbounded.
    double level_radius(double level) const;
    /// Radius beyond which the profile vanishes identically; infinity if it never does.
    double support_radius() const;
    std::string describe() const;
};

/// Velocity coefficient g = 1/(1 - min[1, rho^E]); saturation is a distinct state.
struct VelocityCoefficient {
    enum class Kind { finite, infinite };

    Kind kind = Kind::finite;
    double value = 1.0;

    static VelocityCoefficient finite(double v) { return {Kind::finite, v}; }
    static VelocityCoefficient infinite() { return {Kind::infinite, 0.0}; }
    bool is_infinite() const { return kind == Kind::infinite; }
};

/// rho^E(x,t) = rho^E_0(x) e^{G(0) t}. A frozen exterior (test mode) does not grow.
struct ExteriorDensity {
    ExteriorProfile rho0_ext;
    double g0 = 0.0;
    bool frozen = false;

    ExteriorDensity() = default;
    ExteriorDensity(ExteriorProfile profile, double growth_at_zero)
        : rho0_ext(profile), g0(growth_at_zero) {}

    static ExteriorDensity frozen_profile(ExteriorProfile profile);

    double rate() const { return frozen ? 0.0 : g0; }
    double at_radius(double r, double t) const;
};

double exterior_density_at(const ExteriorDensity& ext, const Point& x, double t);
VelocityCoefficient velocity_coefficient(const ExteriorDensity& ext, const Point& x, double t);
VelocityCoefficient velocity_coefficient_from_density(double rho_ext);

/// Surface area of the unit sphere in R^n (2 for n = 1, 2 pi for n = 2).
double unit_sphere_area(int n);

} // namespace stiffhs
