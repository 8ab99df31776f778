#include "stiffhs/errors.hpp"
#include "stiffhs/grid.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace stiffhs;

namespace {

std::vector<double> random_field(std::size_t n, unsigned seed)
{
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> f(n);
    for (auto& v : f)
        v = u(gen);
    return f;
}

// Brute-force sup over all cells whose centres are within sigma.
std::vector<double> brute_sup(const Grid& g, const std::vector<double>& f, double sigma)
{
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        double best = f[i];
        const auto xi = g.position(i);
        for (std::size_t j = 0; j < f.size(); ++j) {
            const auto xj = g.position(j);
            double d;
            if (g.kind() == GeometryKind::radial)
                d = std::abs(xi[0] - xj[0]);
            else
                d = std::hypot(xi[0] - xj[0], xi[1] - xj[1]);
            if (d <= sigma + 1e-9 * g.dx())
                best = std::max(best, f[j]);
        }
        out[i] = best;
    }
    return out;
}

} // namespace

TEST_CASE("grid construction")
{
    const auto s = Grid::slab(1.0, 0.1);
    CHECK(s.nx() == 20);
    CHECK(s.is_1d());
    CHECK(s.position(0)[0] == doctest::Approx(-0.95));
    const auto r = Grid::radial(3, 2.0, 0.1);
    CHECK(r.nx() == 20);
    CHECK(r.dimension() == 3);
    CHECK(r.radius(0) == doctest::Approx(0.05));
    const auto b = Grid::box(1.0, 0.25);
    CHECK(b.size() == 64u);
    CHECK(b.volume(0) == doctest::Approx(0.0625));
    CHECK_THROWS_AS(Grid::slab(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(Grid::radial(0, 1.0, 0.1), DomainError);
}

TEST_CASE("radial cell volumes sum to the ball volume")
{
    for (int n : {1, 2, 3}) {
        const auto g = Grid::radial(n, 2.0, 0.05);
        double total = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k)
            total += g.volume(k);
        CHECK(total == doctest::Approx(unit_sphere_area(n) * std::pow(2.0, n) / n).epsilon(1e-12));
    }
}

TEST_CASE("zero-flux Laplacian conserves mass (property)")
{
    std::vector<Grid> grids{Grid::slab(1.0, 0.05), Grid::radial(1, 1.0, 0.05), Grid::radial(2, 1.0, 0.05),
                            Grid::radial(3, 1.0, 0.05), Grid::box(1.0, 0.1)};
    unsigned seed = 1;
    for (const auto& g : grids)
        for (int trial = 0; trial < 5; ++trial) {
            const auto u = random_field(g.size(), seed++);
            const auto lap = g.laplacian(u);
            double s = 0.0, scale = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                s += g.volume(k) * lap[k];
                scale += g.volume(k) * std::abs(lap[k]);
            }
            CHECK(std::abs(s) <= 1e-12 * scale);
        }
}

TEST_CASE("stencil weights are nonnegative and bounded by 2n/dx^2")
{
    for (int n : {1, 2, 3}) {
        const auto g = Grid::radial(n, 1.0, 0.02);
        for (int i = 0; i < g.nx(); ++i) {
            CHECK(g.weight_left(i) >= 0.0);
            CHECK(g.weight_right(i) >= 0.0);
            CHECK(g.weight_left(i) + g.weight_right(i) <= 2.0 * n / (0.02 * 0.02) * (1.0 + 1e-12));
        }
        CHECK(g.max_stencil_sum() <= 2.0 * n / (0.02 * 0.02) * (1.0 + 1e-12));
    }
}

TEST_CASE("Laplacian of quadratics")
{
    // slab and box: exact on interior cells
    const auto s = Grid::slab(1.0, 0.05);
    std::vector<double> u(s.size());
    for (std::size_t k = 0; k < u.size(); ++k)
        u[k] = s.position(k)[0] * s.position(k)[0];
    const auto ls = s.laplacian(u);
    for (int i = 1; i + 1 < s.nx(); ++i)
        CHECK(ls[i] == doctest::Approx(2.0).epsilon(1e-10));

    const auto b = Grid::box(1.0, 0.1);
    std::vector<double> v(b.size());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const auto x = b.position(k);
        v[k] = x[0] * x[0] + x[1] * x[1];
    }
    const auto lb = b.laplacian(v);
    for (int j = 1; j + 1 < b.ny(); ++j)
        for (int i = 1; i + 1 < b.nx(); ++i)
            CHECK(lb[b.index(i, j)] == doctest::Approx(4.0).epsilon(1e-10));

    // radial: Lap |x|^2 = 2n holds exactly for the shell-volume stencil, origin cell included
    for (int n : {1, 2, 3, 4}) {
        const auto g = Grid::radial(n, 1.0, 0.02);
        std::vector<double> w(g.size());
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] = g.radius(k) * g.radius(k);
        const auto lr = g.laplacian(w);
        for (int i = 0; i + 1 < g.nx(); ++i)
            CHECK(lr[i] == doctest::Approx(2.0 * n).epsilon(1e-9));
    }
}

TEST_CASE("ghost value turns the outer wall into a Dirichlet condition")
{
    const auto g = Grid::slab(1.0, 0.1);
    std::vector<double> u(g.size(), 1.0);
    const auto l0 = g.laplacian(u);
    const auto l1 = g.laplacian(u, 0.0);
    CHECK(l0.back() == doctest::Approx(0.0));
    CHECK(l1.back() == doctest::Approx(-g.ghost_weight()));
    CHECK(g.ghost_weight() > 0.0);
}

TEST_CASE("integrate matches volume-weighted sums")
{
    const auto g = Grid::radial(2, 1.0, 0.01);
    std::vector<double> one(g.size(), 1.0);
    double v = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        v += g.volume(k);
    CHECK(g.integrate(one) == doctest::Approx(v));
}

TEST_CASE("sup_convolution: zero radius is the identity")
{
    const auto g = Grid::slab(1.0, 0.0625);
    const auto f = random_field(g.size(), 7);
    CHECK(sup_convolution(g, f, 0.0) == f);
    CHECK_THROWS_AS(sup_convolution(g, f, -0.1), DomainError);
}

TEST_CASE("sup_convolution dilates a ball indicator by sigma")
{
    const auto g = Grid::box(2.0, 0.05);
    const double a = 0.7, sigma = 0.3;
    std::vector<double> f(g.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        f[k] = g.radius(k) <= a ? 1.0 : 0.0;
    const auto s = sup_convolution(g, f, sigma);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double r = g.radius(k);
        if (r <= a + sigma - 2.0 * g.dx())
            CHECK(s[k] == 1.0);
        if (r > a + sigma + 2.0 * g.dx())
            CHECK(s[k] == 0.0);
    }
}

TEST_CASE("sup_convolution matches a brute-force oracle and composes (property)")
{
    std::vector<Grid> grids{Grid::slab(1.0, 1.0 / 16), Grid::radial(2, 1.0, 1.0 / 32), Grid::box(0.5, 0.125)};
    unsigned seed = 11;
    for (const auto& g : grids)
        for (double sigma : {0.0625, 0.125, 0.2}) {
            const auto f = random_field(g.size(), seed++);
            const auto s = sup_convolution(g, f, sigma);
            CHECK(s == brute_sup(g, f, sigma));
            // extensive
            for (std::size_t k = 0; k < f.size(); ++k)
                CHECK(s[k] >= f[k]);
            if (g.is_1d()) {
                // in 1D the discrete balls compose exactly
                CHECK(sup_convolution(g, s, sigma) == sup_convolution(g, f, 2.0 * sigma));
            }
            // monotone and commutes with cellwise max
            const auto h = random_field(g.size(), seed++);
            std::vector<double> mx(f.size()), big(f.size());
            for (std::size_t k = 0; k < f.size(); ++k) {
                mx[k] = std::max(f[k], h[k]);
                big[k] = f[k] + 0.1;
            }
            const auto sh = sup_convolution(g, h, sigma);
            const auto smx = sup_convolution(g, mx, sigma);
            const auto sbig = sup_convolution(g, big, sigma);
            for (std::size_t k = 0; k < f.size(); ++k) {
                CHECK(smx[k] == std::max(s[k], sh[k]));
                CHECK(sbig[k] >= s[k]);
            }
        }
}
