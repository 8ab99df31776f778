#include "stiffhs/errors.hpp"
#include "stiffhs/front.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace stiffhs;

namespace {

Scenario radial(double R0, double T, double every)
{
    Scenario s;
    s.geometry = {GeometryKind::radial, 2, 5.0, 0.02};
    s.omega0 = InitialRegion::ball(R0);
    s.growth = GrowthLaw::constant(1.0);
    s.horizon = T;
    s.output = OutputSchedule::every(every, T);
    s.front.dt = 1e-3;
    return s;
}

} // namespace

TEST_CASE("constant G, no exterior density: R(t) = R0 exp(g0 t / n)")
{
    for (int n : {1, 2, 3}) {
        auto s = radial(1.0, 1.0, 0.25);
        s.geometry.dimension = n;
        s.geometry.extent = 30.0;
        const auto tr = run_front(s);
        for (const auto& snap : tr.snapshots) {
            const double exact = std::exp(snap.t / n);
            CHECK(snap.outer_radius() == doctest::Approx(exact).epsilon(5e-3));
        }
        CHECK(tr.snapshots.back().outer_radius() == doctest::Approx(std::exp(1.0 / n)).epsilon(1e-4));
    }
}

TEST_CASE("constant exterior density accelerates the front by 1/(1 - rho^E)")
{
    // dR/dt = (R/n) / (1 - a e^t)  =>  ln(R/R0) = (t - ln(1 - a e^t) + ln(1 - a)) / n
    const double a = 0.5, n = 2.0, T = 0.3;
    auto s = radial(1.0, T, 0.1);
    s.rho0_ext = ExteriorProfile::constant(a);
    const auto tr = run_front(s);
    for (const auto& snap : tr.snapshots) {
        const double t = snap.t;
        const double exact = std::exp((t - std::log(1.0 - a * std::exp(t)) + std::log(1.0 - a)) / n);
        CHECK(snap.outer_radius() == doctest::Approx(exact).epsilon(2e-3));
    }
    // g = 1/(1 - a e^t) is reported at the outer endpoint
    const auto& last = tr.series.back();
    CHECK(last.g == doctest::Approx(1.0 / (1.0 - a * std::exp(last.t))).epsilon(1e-3));
}

TEST_CASE("absorption time")
{
    ExteriorDensity e(ExteriorProfile::constant(0.95), 1.0);
    CHECK(absorption_time(e, 0.3) == doctest::Approx(std::log(1.0 / 0.95)));
    ExteriorDensity z(ExteriorProfile::zero(), 1.0);
    CHECK(std::isinf(absorption_time(z, 0.3)));
}

TEST_CASE("nucleation saturates the domain within one step of t*")
{
    Scenario s = radial(1.0, 0.1, 0.01);
    s.rho0_ext = ExteriorProfile::constant(0.95);
    s.growth = GrowthLaw::linear(1.0, 1.0);
    const auto tr = run_front(s);
    const double tstar = std::log(1.0 / 0.95);
    REQUIRE(tr.saturated);
    CHECK(tr.saturation_time >= tstar - 1e-12);
    CHECK(tr.saturation_time <= tstar + s.front.dt + 1e-12);
    for (const auto& snap : tr.snapshots)
        CHECK(exterior_invariant_holds(snap, s.exterior()));
    // the velocity coefficient grows without bound as t* approaches
    double g_prev = 0.0;
    for (const auto& f : tr.series)
        if (f.t < tstar - 2e-3) {
            CHECK(f.g >= g_prev);
            g_prev = f.g;
        }
    CHECK(g_prev > 10.0);
}

TEST_CASE("a band reaching one nucleates a new component")
{
    Scenario s = radial(1.0, 0.2, 0.05);
    s.rho0_ext = ExteriorProfile::band(0.9, 2.0, 3.0);
    s.growth = GrowthLaw::linear(1.0, 1.0);
    const auto tr = run_front(s);
    bool seen = false;
    for (const auto& e : tr.events)
        if (e.kind == FrontEvent::Kind::nucleate) {
            seen = true;
            CHECK(e.t == doctest::Approx(std::log(1.0 / 0.9)).epsilon(1e-6));
            CHECK(e.a == doctest::Approx(2.0).epsilon(1e-6));
            CHECK(e.b == doctest::Approx(3.0).epsilon(1e-6));
        }
    CHECK(seen);
    CHECK(tr.snapshots.back().components.size() == 2u);
    for (const auto& snap : tr.snapshots)
        CHECK(exterior_invariant_holds(snap, s.exterior()));
}

TEST_CASE("components that meet are merged")
{
    Scenario s = radial(1.0, 0.3, 0.05);
    s.rho0_ext = ExteriorProfile::band(0.9, 1.1, 1.6);
    s.growth = GrowthLaw::linear(1.0, 1.0);
    const auto tr = run_front(s);
    bool merged = false;
    for (const auto& e : tr.events)
        merged = merged || e.kind == FrontEvent::Kind::merge;
    CHECK(merged);
    CHECK(tr.snapshots.back().components.size() == 1u);
}

TEST_CASE("the positive set never shrinks (property)")
{
    for (double a : {0.0, 0.3, 0.6}) {
        Scenario s = radial(0.8, 0.3, 0.05);
        s.rho0_ext = ExteriorProfile::plateau(a, 1.5, 2.5);
        s.growth = GrowthLaw::linear(1.0, 1.0);
        const auto tr = run_front(s);
        for (std::size_t k = 1; k < tr.snapshots.size(); ++k)
            CHECK(tr.snapshots[k].volume() >= tr.snapshots[k - 1].volume());
        for (std::size_t k = 1; k < tr.series.size(); ++k)
            CHECK(tr.series[k].radius >= tr.series[k - 1].radius);
    }
}

TEST_CASE("advance refuses an infinite velocity coefficient")
{
    Scenario s = radial(1.0, 0.1, 0.1);
    s.rho0_ext = ExteriorProfile::constant(0.95);
    auto st = initial_front(s);
    st.t = 0.06; // past t* = ln(1/0.95)
    solve_profiles(st, s.growth, s.exterior());
    CHECK_THROWS_AS(advance(st, 1e-3, s.growth, s.exterior()), std::logic_error);
}

TEST_CASE("initial front checks")
{
    Scenario s = radial(1.0, 0.1, 0.1);
    s.geometry.kind = GeometryKind::box2d;
    CHECK_THROWS_AS(initial_front(s), DomainError);
    s = radial(1.0, 0.1, 0.1);
    s.omega0 = InitialRegion::ball(1.0, {0.5, 0.0});
    CHECK_THROWS_AS(initial_front(s), DomainError);
    s.omega0 = InitialRegion::annulus(0.5, 1.0);
    const auto st = initial_front(s);
    REQUIRE(st.components.size() == 1u);
    CHECK(st.components[0].left == EndpointKind::free);
    s.omega0 = InitialRegion::empty();
    CHECK(initial_front(s).components.empty());
}

TEST_CASE("fixed boundary, exterior mode (n = 1, G off): (R - 1)^2 = (R0 - 1)^2 + 2 b t")
{
    const double b = 1.0, R0 = 1.5, T = 0.5;
    const auto tr = fixed_boundary_radial_solution(1, 1.0, [&](double) { return b; }, R0,
                                                   ExteriorDensity(ExteriorProfile::zero(), 0.0), T,
                                                   GrowthLaw::off(), 1e-3);
    const double exact = 1.0 + std::sqrt((R0 - 1.0) * (R0 - 1.0) + 2.0 * b * T);
    CHECK(tr.radius_at(T) == doctest::Approx(exact).epsilon(2e-3));
}

TEST_CASE("fixed boundary, interior mode (n = 1, G off): the front moves inward")
{
    const double b = 0.5, R0 = 0.5, T = 0.1;
    const auto tr = fixed_boundary_radial_solution(1, 1.0, [&](double) { return b; }, R0,
                                                   ExteriorDensity(ExteriorProfile::zero(), 0.0), T,
                                                   GrowthLaw::off(), 1e-4);
    REQUIRE_FALSE(tr.snapshots.empty());
    const auto& c = tr.snapshots.back().components.at(0);
    const double exact = 1.0 - std::sqrt((1.0 - R0) * (1.0 - R0) + 2.0 * b * T);
    CHECK(c.a == doctest::Approx(exact).epsilon(2e-3));
    CHECK(c.right == EndpointKind::pinned);
    CHECK_THROWS_AS(fixed_boundary_radial_solution(1, 1.0, [](double) { return -1.0; }, 0.5,
                                                   ExteriorDensity(), 0.1, GrowthLaw::off(), 1e-3),
                    DomainError);
}

TEST_CASE("front CSV layout")
{
    const auto tr = run_front(radial(1.0, 0.1, 0.05));
    std::ostringstream os;
    write_front_csv(os, tr);
    CHECK(os.str().rfind("t,component,left,right,grad_left,grad_right,g_left,g_right,event\n", 0) == 0);
}
