#include "stiffhs/errors.hpp"
#include "stiffhs/scenario.hpp"

#include <doctest.h>

#include <cmath>

using namespace stiffhs;

namespace {

Scenario basic()
{
    Scenario s;
    s.geometry = {GeometryKind::radial, 2, 5.0, 0.02};
    s.omega0 = InitialRegion::ball(1.0);
    s.growth = GrowthLaw::linear(1.0, 1.0);
    s.horizon = 0.5;
    s.output = OutputSchedule::every(0.05, 0.5);
    return s;
}

} // namespace

TEST_CASE("output schedule")
{
    const auto s = OutputSchedule::every(0.1, 0.35);
    REQUIRE(s.times.size() == 5u);
    CHECK(s.times.front() == 0.0);
    CHECK(s.times[3] == doctest::Approx(0.3));
    CHECK(s.times.back() == doctest::Approx(0.35));
    CHECK(OutputSchedule::every(0.05, 0.5).times.size() == 11u);
    CHECK_THROWS_AS(OutputSchedule::every(0.0, 1.0), DomainError);
}

TEST_CASE("initial regions")
{
    const auto b = InitialRegion::ball(1.0);
    CHECK(b.contains({0.5, 0.5}));
    CHECK_FALSE(b.contains({0.8, 0.8}));
    const auto a = InitialRegion::annulus(0.5, 1.0);
    CHECK_FALSE(a.contains({0.1, 0.0}));
    CHECK(a.contains({0.7, 0.0}));
    CHECK(a.bounding_radius() == doctest::Approx(1.0));
    const auto shifted = InitialRegion::ball(0.5, {1.0, 0.0});
    CHECK(shifted.bounding_radius() == doctest::Approx(1.5));

    const auto g = Grid::box(1.0, 0.5); // 4x4
    InitialRegion m;
    m.kind = InitialRegion::Kind::mask;
    m.rows = {"#...", "....", "..##", "...."};
    const auto cells = m.cell_mask(g);
    CHECK(cells[g.index(0, 0)] == 1);
    CHECK(cells[g.index(2, 2)] == 1);
    CHECK(cells[g.index(3, 2)] == 1);
    CHECK(cells[g.index(1, 0)] == 0);
    m.rows = {"#..", "..."};
    CHECK_THROWS_AS(m.cell_mask(g), DomainError);
}

TEST_CASE("validate accepts a standard scenario")
{
    CHECK(validate(basic()).empty());
}

TEST_CASE("validate lists every failure")
{
    auto s = basic();
    s.geometry.dx = -1.0;
    s.m_list = {0.5, 40.0};
    s.solver.cfl_safety = 2.0;
    const auto f = validate(s);
    CHECK(f.size() >= 3u);
}

TEST_CASE("exterior density at or above one is rejected")
{
    auto s = basic();
    s.rho0_ext = ExteriorProfile::constant(1.0);
    const auto f = validate(s);
    REQUIRE(f.size() == 1u);
    CHECK(f[0].find("rho^E_0") != std::string::npos);
    s.rho0_ext = ExteriorProfile::constant(0.999);
    CHECK(validate(s).empty());
}

TEST_CASE("m values must be increasing and above one")
{
    auto s = basic();
    s.m_list = {40.0, 20.0};
    CHECK_FALSE(validate(s).empty());
    s.m_list = {1.0};
    CHECK_FALSE(validate(s).empty());
}

TEST_CASE("truncation bound R e^{16 G(0) T / n} and auto-expansion")
{
    auto s = basic();
    s.horizon = 0.5;
    // containment radius 1 (ball), n = 2: bound e^{4}
    CHECK(s.containment_radius() == doctest::Approx(1.0).epsilon(0.02));
    const double need = s.containment_radius() * std::exp(16.0 * 0.5 / 2.0);
    CHECK(s.truncation_radius() == doctest::Approx(need));
    const auto w = enforce_truncation(s);
    REQUIRE(w.has_value());
    CHECK(s.geometry.extent >= need);
    CHECK(s.geometry.dx == 0.02);
    CHECK_FALSE(enforce_truncation(s).has_value());
}

TEST_CASE("truncation bound uses the exterior half-level set")
{
    auto s = basic();
    s.horizon = 0.1;
    s.rho0_ext = ExteriorProfile::plateau(0.6, 2.0, 3.0);
    // {rho^E_0 >= 1/2} reaches into the taper beyond r = 2
    CHECK(s.containment_radius() > 2.0);
    CHECK(s.containment_radius() < 3.0);
    s.rho0_ext = ExteriorProfile::constant(0.6);
    const auto w = enforce_truncation(s);
    REQUIRE(w.has_value());
    CHECK(w->find("not applicable") != std::string::npos);
}

TEST_CASE("support threshold and sigma defaults")
{
    auto s = basic();
    CHECK(s.epsilon_support() == doctest::Approx(1e-3));
    CHECK(s.sup_radius() == doctest::Approx(0.08));
    s.support_threshold = 0.01;
    CHECK(s.epsilon_support() == 0.01);
}
