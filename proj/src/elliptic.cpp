#include "stiffhs/elliptic.hpp"

#include "stiffhs/errors.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

namespace stiffhs {

double RadialProfile::at(double r) const
{
    if (samples.empty() || r < r_inner || r > r_outer)
        return 0.0;
    const double s = (r - r_inner) / spacing();
    const auto j = std::min<std::size_t>(static_cast<std::size_t>(s), samples.size() - 2);
    const double w = s - static_cast<double>(j);
    return (1.0 - w) * samples[j] + w * samples[j + 1];
}

double RadialProfile::max_value() const
{
    return samples.empty() ? 0.0 : *std::max_element(samples.begin(), samples.end());
}

namespace {

// Thomas algorithm; a = sub, b = diag, c = super, d = rhs (overwritten with the solution).
void solve_tridiagonal(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
                       std::vector<double>& d)
{
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

} // namespace

RadialProfile solve_radial(int n, double r_inner, double r_outer, std::optional<double> bc_inner,
                           double bc_outer, const GrowthLaw& law, int grid_points,
                           const NewtonOptions& options)
{
    if (n < 1)
        throw DomainError("radial dimension must be >= 1");
    if (!(r_outer > r_inner) || r_inner < 0.0)
        throw DomainError("radial solve needs 0 <= r_inner < r_outer");
    if (grid_points < 16)
        throw DomainError("radial solve needs at least 16 grid points");
    if (bc_outer < 0.0 || (bc_inner && *bc_inner < 0.0))
        throw DomainError("boundary data must be nonnegative");
    if (!bc_inner && r_inner != 0.0)
        throw DomainError("symmetry condition is only available at r = 0");

    RadialProfile prof;
    prof.n = n;
    prof.r_inner = r_inner;
    prof.r_outer = r_outer;
    prof.bc_inner = bc_inner;
    prof.bc_outer = bc_outer;
    const std::size_t N = static_cast<std::size_t>(grid_points);
    prof.samples.assign(N, 0.0);
    auto& p = prof.samples;
    p[N - 1] = bc_outer;
    if (bc_inner)
        p[0] = *bc_inner;

    const double h = (r_outer - r_inner) / static_cast<double>(N - 1);
    const double h2 = h * h;
    const std::size_t first = bc_inner ? 1 : 0;
    const std::size_t m = N - 1 - first; // unknown count

    auto residual = [&](const std::vector<double>& q, std::vector<double>& res) {
        res.assign(m, 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t j = k + first;
            double lap;
            if (j == 0) {
                lap = 2.0 * n * (q[1] - q[0]) / h2;
            } else {
                const double r = r_inner + static_cast<double>(j) * h;
                lap = (q[j + 1] - 2.0 * q[j] + q[j - 1]) / h2 + (n - 1) / r * (q[j + 1] - q[j - 1]) / (2.0 * h);
            }
            res[k] = -lap - law(q[j]);
        }
    };

    std::vector<double> res, trial_res, sub(m), diag(m), sup(m), rhs(m), trial;
    residual(p, res);
    double norm_res = max_abs(res);
    int it = 0;
    while (norm_res > options.tolerance && it < options.max_iterations) {
        ++it;
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t j = k + first;
            if (j == 0) {
                sub[k] = 0.0;
                diag[k] = 2.0 * n / h2 - law.derivative(p[j]);
                sup[k] = -2.0 * n / h2;
            } else {
                const double r = r_inner + static_cast<double>(j) * h;
                const double adv = (n - 1) / (2.0 * r * h);
                sub[k] = -(1.0 / h2 - adv);
                diag[k] = 2.0 / h2 - law.derivative(p[j]);
                sup[k] = -(1.0 / h2 + adv);
            }
            rhs[k] = -res[k];
        }
        solve_tridiagonal(sub, diag, sup, rhs);
        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 30; ++halving) {
            trial = p;
            for (std::size_t k = 0; k < m; ++k)
                trial[k + first] += lambda * rhs[k];
            residual(trial, trial_res);
            const double nt = max_abs(trial_res);
            if (nt < norm_res || nt <= options.tolerance) {
                p.swap(trial);
                res.swap(trial_res);
                norm_res = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            break; // round-off floor reached
        if (lambda == 1.0 && max_abs(rhs) <= 1e-15 * (1.0 + prof.max_value()))
            break;
    }
    prof.residual = norm_res;
    prof.iterations = it;
    // Round-off floor of the FD residual grows like eps * |p| / h^2.
    const double floor = 64.0 * 2.2e-16 * (1.0 + prof.max_value()) / h2;
    if (norm_res > std::max(options.tolerance, floor))
        throw SolverError("radial Newton iteration did not converge", norm_res);
    return prof;
}

double boundary_gradient(const RadialProfile& profile, Side side)
{
    const auto& p = profile.samples;
    if (p.size() < 3)
        throw DomainError("boundary gradient needs at least 3 samples");
    const double h = profile.spacing();
    const std::size_t N = p.size();
    if (side == Side::outer)
        return std::abs((3.0 * p[N - 1] - 4.0 * p[N - 2] + p[N - 3]) / (2.0 * h));
    return std::abs((-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h));
}

void write_csv(std::ostream& os, const RadialProfile& profile)
{
    char buf[64];
    os << "r,p\n";
    for (std::size_t j = 0; j < profile.samples.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", profile.node(j), profile.samples[j]);
        os << buf;
    }
}

int count_components(const Grid& grid, std::span<const char> mask)
{
    std::vector<int> label(grid.size(), -1);
    int comps = 0;
    std::queue<std::size_t> q;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!mask[k] || label[k] >= 0)
            continue;
        label[k] = comps;
        q.push(k);
        while (!q.empty()) {
            const auto c = q.front();
            q.pop();
            grid.for_each_neighbor(c, [&](std::size_t j, double) {
                if (mask[j] && label[j] < 0) {
                    label[j] = comps;
                    q.push(j);
                }
            });
        }
        ++comps;
    }
    return comps;
}

DomainMask::DomainMask(const Grid& grid, std::vector<char> cells, std::vector<double> values)
    : inside(std::move(cells)), boundary_values(std::move(values))
{
    if (inside.size() != grid.size())
        throw DomainError("mask does not match grid");
    if (boundary_values.empty())
        boundary_values.assign(grid.size(), 0.0);
    if (boundary_values.size() != grid.size())
        throw DomainError("boundary values do not match grid");
    for (double v : boundary_values)
        if (v < 0.0)
            throw DomainError("boundary values must be nonnegative");
    components = count_components(grid, inside);
}

bool DomainMask::empty() const
{
    return std::none_of(inside.begin(), inside.end(), [](char c) { return c != 0; });
}

std::vector<double> solve_masked(const Grid& grid, const DomainMask& mask, const GrowthLaw& law,
                                 std::optional<double> ghost, double tolerance, int max_iterations)
{
    if (mask.inside.size() != grid.size())
        throw DomainError("mask does not match grid");
    std::vector<double> p(grid.size(), 0.0);
    std::vector<long> unknown(grid.size(), -1);
    long m = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (mask.inside[k])
            unknown[k] = m++;
        else
            p[k] = mask.boundary_values[k];
    }
    if (m == 0)
        return p;
    std::vector<std::size_t> cell_of(static_cast<std::size_t>(m));
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (unknown[k] >= 0)
            cell_of[static_cast<std::size_t>(unknown[k])] = k;

    const auto last = static_cast<std::size_t>(grid.nx() - 1);
    auto residual = [&](const std::vector<double>& q, Eigen::VectorXd& res) {
        res.resize(m);
        for (long u = 0; u < m; ++u) {
            const auto k = cell_of[static_cast<std::size_t>(u)];
            res[u] = -grid.laplacian_at(q, k, ghost) - law(q[k]);
        }
    };

    Eigen::VectorXd res;
    residual(p, res);
    double norm_res = res.lpNorm<Eigen::Infinity>();
    int it = 0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool analysed = false;
    while (norm_res > tolerance && it < max_iterations) {
        ++it;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(m) * 5);
        for (long u = 0; u < m; ++u) {
            const auto k = cell_of[static_cast<std::size_t>(u)];
            double diag = -law.derivative(p[k]);
            grid.for_each_neighbor(k, [&](std::size_t j, double w) {
                diag += w;
                if (unknown[j] >= 0)
                    trip.emplace_back(u, unknown[j], -w);
            });
            if (ghost && grid.is_1d() && k == last)
                diag += grid.ghost_weight();
            trip.emplace_back(u, u, diag);
        }
        Eigen::SparseMatrix<double> J(m, m);
        J.setFromTriplets(trip.begin(), trip.end());
        if (!analysed) {
            lu.analyzePattern(J);
            analysed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success)
            throw SolverError("sparse factorisation failed", norm_res);
        const Eigen::VectorXd delta = lu.solve(-res);
        double lambda = 1.0;
        bool accepted = false;
        std::vector<double> trial;
        Eigen::VectorXd trial_res;
        for (int halving = 0; halving < 30; ++halving) {
            trial = p;
            for (long u = 0; u < m; ++u)
                trial[cell_of[static_cast<std::size_t>(u)]] += lambda * delta[u];
            residual(trial, trial_res);
            const double nt = trial_res.lpNorm<Eigen::Infinity>();
            if (nt < norm_res || nt <= tolerance) {
                p.swap(trial);
                res = trial_res;
                norm_res = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            break;
    }
    if (norm_res > tolerance)
        throw SolverError("masked Newton iteration did not converge", norm_res);
    return p;
}

std::vector<double> solve_cartesian_2d(const Grid& grid, const DomainMask& mask, const GrowthLaw& law)
{
    if (grid.kind() != GeometryKind::box2d)
        throw DomainError("solve_cartesian_2d needs a box2d grid");
    if (mask.empty())
        return std::vector<double>(grid.size(), 0.0);
    return solve_masked(grid, mask, law);
}

} // namespace stiffhs
