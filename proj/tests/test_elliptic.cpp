#include "stiffhs/elliptic.hpp"
#include "stiffhs/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace stiffhs;

TEST_CASE("constant G: p = g0 (R^2 - r^2) / (2n) exactly")
{
    for (int n : {1, 2, 3}) {
        const double g0 = 1.7, R = 1.3;
        const auto prof = solve_radial(n, 0.0, R, std::nullopt, 0.0, GrowthLaw::constant(g0), 65);
        for (std::size_t j = 0; j < prof.samples.size(); ++j) {
            const double r = prof.node(j);
            CHECK(prof.samples[j] == doctest::Approx(g0 * (R * R - r * r) / (2.0 * n)).epsilon(1e-10));
        }
        CHECK(boundary_gradient(prof, Side::outer) == doctest::Approx(g0 * R / n).epsilon(1e-10));
        CHECK(boundary_gradient(prof, Side::inner) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("linear G against modified Bessel / cosh closed forms, second order")
{
    const auto law = GrowthLaw::linear(1.0, 1.0);
    const double R = 1.5;
    // n = 2: p = 1 - I0(r)/I0(R); n = 1: p = 1 - cosh(r)/cosh(R)
    auto exact2 = [&](double r) { return 1.0 - std::cyl_bessel_i(0.0, r) / std::cyl_bessel_i(0.0, R); };
    auto exact1 = [&](double r) { return 1.0 - std::cosh(r) / std::cosh(R); };
    double prev2 = 0.0, prev1 = 0.0;
    for (int pts : {33, 65, 129}) {
        const auto p2 = solve_radial(2, 0.0, R, std::nullopt, 0.0, law, pts);
        const auto p1 = solve_radial(1, 0.0, R, std::nullopt, 0.0, law, pts);
        double e2 = 0.0, e1 = 0.0;
        for (std::size_t j = 0; j < p2.samples.size(); ++j) {
            e2 = std::max(e2, std::abs(p2.samples[j] - exact2(p2.node(j))));
            e1 = std::max(e1, std::abs(p1.samples[j] - exact1(p1.node(j))));
        }
        CHECK(e2 < 1e-3);
        if (prev2 > 0.0) {
            CHECK(prev2 / e2 > 3.5);
            CHECK(prev1 / e1 > 3.5);
        }
        prev2 = e2;
        prev1 = e1;
    }
}

TEST_CASE("annulus with Dirichlet data and G off: logarithmic profile")
{
    const double a = 0.5, b = 2.0;
    const auto prof = solve_radial(2, a, b, 1.0, 0.0, GrowthLaw::off(), 257);
    for (std::size_t j = 0; j < prof.samples.size(); j += 16) {
        const double r = prof.node(j);
        CHECK(prof.samples[j] == doctest::Approx(std::log(r / b) / std::log(a / b)).epsilon(1e-4));
    }
    // |p_r(b)| = 1 / (b ln(b/a))
    CHECK(boundary_gradient(prof, Side::outer) == doctest::Approx(1.0 / (b * std::log(b / a))).epsilon(1e-4));
}

TEST_CASE("radial profile interpolation and errors")
{
    const auto prof = solve_radial(2, 0.0, 1.0, std::nullopt, 0.0, GrowthLaw::constant(4.0), 33);
    CHECK(prof.at(0.0) == doctest::Approx(1.0));
    CHECK(prof.at(1.5) == 0.0);
    CHECK(prof.max_value() == doctest::Approx(1.0));
    CHECK_THROWS_AS(solve_radial(2, 0.5, 0.2, 0.0, 0.0, GrowthLaw::off(), 33), DomainError);
    CHECK_THROWS_AS(solve_radial(2, 0.1, 1.0, std::nullopt, 0.0, GrowthLaw::off(), 33), DomainError);
    CHECK_THROWS_AS(solve_radial(2, 0.0, 1.0, std::nullopt, 0.0, GrowthLaw::off(), 4), DomainError);
    CHECK_THROWS_AS(solve_radial(0, 0.0, 1.0, std::nullopt, 0.0, GrowthLaw::off(), 33), DomainError);
    std::ostringstream os;
    write_csv(os, prof);
    CHECK(os.str().find('\n') != std::string::npos);
}

TEST_CASE("Newton cap raises SolverError")
{
    NewtonOptions opt;
    opt.max_iterations = 0;
    CHECK_THROWS_AS(solve_radial(2, 0.0, 1.0, std::nullopt, 0.0, GrowthLaw::linear(1.0, 1.0), 33, opt), SolverError);
}

TEST_CASE("masked solve on a 2D disc approaches the closed form")
{
    const double R = 1.0, g0 = 2.0;
    double prev = 1e9;
    for (double dx : {0.1, 0.05}) {
        const auto g = Grid::box(1.5, dx);
        std::vector<char> cells(g.size());
        for (std::size_t k = 0; k < g.size(); ++k)
            cells[k] = g.radius(k) < R;
        DomainMask mask(g, cells);
        CHECK(mask.components == 1);
        const auto p = solve_cartesian_2d(g, mask, GrowthLaw::constant(g0));
        double err = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double exact = cells[k] ? g0 * (R * R - g.radius(k) * g.radius(k)) / 4.0 : 0.0;
            err = std::max(err, std::abs(p[k] - exact));
            if (!cells[k])
                CHECK(p[k] == 0.0);
        }
        CHECK(err < 0.6 * dx + 1e-12);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("masked solve on a radial grid agrees with the node solver")
{
    const auto g = Grid::radial(2, 2.0, 0.01);
    std::vector<char> cells(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        cells[k] = g.radius(k) < 1.0;
    const auto law = GrowthLaw::linear(1.0, 1.0);
    const auto p = solve_masked(g, DomainMask(g, cells), law);
    const auto prof = solve_radial(2, 0.0, 1.0, std::nullopt, 0.0, law, 257);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (cells[k])
            CHECK(std::abs(p[k] - prof.at(g.radius(k))) < 0.02);
}

TEST_CASE("masks: components and the empty mask")
{
    const auto g = Grid::box(1.0, 0.25); // 8x8
    std::vector<char> cells(g.size(), 0);
    cells[g.index(1, 1)] = cells[g.index(1, 2)] = 1;
    cells[g.index(5, 5)] = 1;
    CHECK(count_components(g, cells) == 2);
    cells[g.index(2, 2)] = 1; // diagonal contact is not adjacency
    CHECK(count_components(g, cells) == 2);

    DomainMask empty(g, std::vector<char>(g.size(), 0));
    CHECK(empty.empty());
    const auto z = solve_cartesian_2d(g, empty, GrowthLaw::constant(1.0));
    for (double v : z)
        CHECK(v == 0.0);
    CHECK_THROWS_AS(solve_cartesian_2d(Grid::slab(1.0, 0.1), empty, GrowthLaw::constant(1.0)), DomainError);
}

TEST_CASE("masked solve respects Dirichlet values and a ghost wall")
{
    // slab [-1,1] with G off and ghost value 1 at the right wall: linear ramp
    const auto g = Grid::slab(1.0, 0.05);
    std::vector<char> cells(g.size(), 1);
    const auto p = solve_masked(g, DomainMask(g, cells), GrowthLaw::off(), 1.0);
    for (double v : p)
        CHECK(v == doctest::Approx(1.0).epsilon(1e-8));
}
