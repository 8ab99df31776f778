#include "stiffhs/pme.hpp"

#include "stiffhs/barriers.hpp"
#include "stiffhs/elliptic.hpp"
#include "stiffhs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace stiffhs {

SolverConfig SolverConfig::from(const SolverSettings& s)
{
    SolverConfig c;
    c.cfl_safety = s.cfl_safety;
    c.dt_cap = s.dt_cap;
    return c;
}

PmeState::PmeState(std::shared_ptr<const Grid> g, std::vector<double> density, double time, StiffnessParam mm,
                   GrowthLaw l, ExteriorDensity e)
    : grid(std::move(g)), rho(std::move(density)), t(time), m(mm.value()), law(l), ext(e)
{
    if (!grid)
        throw DomainError("PME state needs a grid");
    if (rho.size() != grid->size())
        throw DomainError("density does not match grid");
    for (double r : rho)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw DomainError("density must be finite and nonnegative");
    refresh_window();
}

std::vector<double> PmeState::pressure() const
{
    std::vector<double> p(rho.size(), 0.0);
    const double c = m / (m - 1.0);
    for (std::size_t k = 0; k < rho.size(); ++k)
        if (rho[k] > 0.0)
            p[k] = c * std::pow(rho[k], m - 1.0);
    return p;
}

double PmeState::max_density() const { return rho_max; }

void PmeState::refresh_window()
{
    Window w{grid->nx(), -1, grid->ny(), -1};
    rho_max = 0.0;
    for (int j = 0; j < grid->ny(); ++j)
        for (int i = 0; i < grid->nx(); ++i)
            if (rho[grid->index(i, j)] > 0.0) {
                rho_max = std::max(rho_max, rho[grid->index(i, j)]);
                w.i0 = std::min(w.i0, i);
                w.i1 = std::max(w.i1, i);
                w.j0 = std::min(w.j0, j);
                w.j1 = std::max(w.j1, j);
            }
    window = w;
}

namespace {

int space_dimension(const Grid& g)
{
    return g.kind() == GeometryKind::box2d ? 2 : g.dimension();
}

double boundary_density(const PmeState& s, const SolverConfig& c, double t)
{
    if (c.boundary.kind != BoundaryCondition::Kind::dirichlet)
        return 0.0;
    if (!c.boundary.pressure)
        throw ConfigError({"Dirichlet boundary needs a pressure function"});
    const double p = c.boundary.pressure(t);
    if (!(p >= 0.0) || !std::isfinite(p))
        throw DomainError("Dirichlet boundary pressure must be finite and >= 0");
    return density_from_pressure(p, StiffnessParam(s.m));
}

// max |d/drho (rho G(P_m(rho)))| over rho in [0, rmax]; equals max |G(P) + (m-1) P G'(P)|.
double source_lipschitz(const GrowthLaw& law, double m, double rmax)
{
    const double P = rmax > 0.0 ? m / (m - 1.0) * std::pow(rmax, m - 1.0) : 0.0;
    const double at0 = std::abs(law(0.0));
    const double atP = std::abs(law(P) + (m - 1.0) * P * law.derivative(P));
    return std::max(at0, atP); // the derivative is affine in P for both growth forms
}

std::string dump_state(const PmeState& s, double dt, std::size_t k, double value)
{
    std::ostringstream os;
    os.precision(17);
    os << "t=" << s.t << " dt=" << dt << " m=" << s.m << " cell=" << k << " new_rho=" << value
       << " old_rho=" << s.rho[k] << " steps=" << s.steps << " grid=" << to_string(s.grid->kind())
       << " nx=" << s.grid->nx() << " dx=" << s.grid->dx();
    return os.str();
}

thread_local std::vector<double> tl_u;
thread_local std::vector<double> tl_q;

} // namespace

double stable_dt(const PmeState& state, const SolverConfig& config)
{
    if (!(config.cfl_safety > 0.0 && config.cfl_safety <= 1.0))
        throw ConfigError({"cfl_safety must lie in (0, 1]"});
    if (!(config.dt_cap > 0.0))
        throw ConfigError({"dt_cap must be > 0"});
    const Grid& g = *state.grid;
    double rmax = state.max_density();
    if (config.boundary.kind == BoundaryCondition::Kind::dirichlet)
        rmax = std::max(rmax, boundary_density(state, config, state.t));
    const double n = space_dimension(g);
    const double diff = state.m * std::pow(rmax, state.m - 1.0);
    double limit = config.dt_cap / config.cfl_safety;
    if (diff > 0.0)
        limit = std::min(limit, g.dx() * g.dx() / (2.0 * n * diff));
    const double lip = source_lipschitz(state.law, state.m, rmax);
    if (lip > 0.0)
        limit = std::min(limit, 1.0 / (2.0 * lip));
    return std::min(config.cfl_safety * limit, config.dt_cap);
}

double common_stable_dt(const std::vector<const PmeState*>& states, const SolverConfig& config)
{
    double dt = config.dt_cap;
    for (const auto* s : states)
        dt = std::min(dt, stable_dt(*s, config));
    return dt;
}

void step(PmeState& state, const SolverConfig& config)
{
    step(state, config, stable_dt(state, config));
}

void step(PmeState& s, const SolverConfig& config, double dt)
{
    if (config.stepping == SolverConfig::Stepping::semi_implicit)
        throw ConfigError({"semi-implicit stepping is not implemented"});
    const double limit = stable_dt(s, config);
    if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
        throw ConfigError({"time step " + std::to_string(dt) + " violates the stability rule (limit " +
                           std::to_string(limit) + ")"});

    const Grid& g = *s.grid;
    const bool dirichlet = config.boundary.kind == BoundaryCondition::Kind::dirichlet;
    if (dirichlet && !g.is_1d())
        throw ConfigError({"Dirichlet pressure boundary is only available on 1D grids"});
    const int nx = g.nx();
    const int ny = g.ny();
    const double m = s.m;
    const double pc = m / (m - 1.0);

    PmeState::Window w = s.window;
    if (dirichlet) {
        if (w.empty())
            w = {nx - 1, nx - 1, 0, 0};
        w.i1 = nx - 1;
    }
    if (w.empty()) {
        s.t += dt;
        ++s.steps;
        return;
    }
    // Cells that can change: the nonzero box grown by one ring.
    const int a0 = std::max(0, w.i0 - 1), a1 = std::min(nx - 1, w.i1 + 1);
    const int b0 = std::max(0, w.j0 - 1), b1 = std::min(ny - 1, w.j1 + 1);

    auto& u = tl_u;
    auto& q = tl_q;
    if (u.size() != g.size()) {
        u.assign(g.size(), 0.0);
        q.assign(g.size(), 0.0);
    }
    // u = rho^m on the update box plus one more ring (zero there by construction).
    const int c0 = std::max(0, a0 - 1), c1 = std::min(nx - 1, a1 + 1);
    const int d0 = std::max(0, b0 - 1), d1 = std::min(ny - 1, b1 + 1);
    for (int j = d0; j <= d1; ++j)
        for (int i = c0; i <= c1; ++i) {
            const auto k = g.index(i, j);
            const double r = s.rho[k];
            if (r > 0.0) {
                q[k] = std::pow(r, m - 1.0);
                u[k] = q[k] * r;
            } else {
                q[k] = 0.0;
                u[k] = 0.0;
            }
        }

    double ub = 0.0;
    if (dirichlet)
        ub = std::pow(boundary_density(s, config, s.t), m);

    double source = 0.0;
    auto finish_cell = [&](std::size_t k, double lap) {
        const double r = s.rho[k];
        const double src = r > 0.0 ? r * s.law(pc * q[k]) : 0.0;
        source += g.volume(k) * src;
        const double next = r + dt * (lap + src);
        if (!(next >= 0.0)) {
            if (next >= -1e-12) {
                s.rho[k] = 0.0;
                ++s.clamped;
                return;
            }
            throw NumericalFailure("explicit PME step produced a negative or non-finite density",
                                   dump_state(s, dt, k, next));
        }
        s.rho[k] = next;
    };

    if (g.is_1d()) {
        for (int i = a0; i <= a1; ++i) {
            const auto k = static_cast<std::size_t>(i);
            double lap = 0.0;
            if (i > 0)
                lap += g.weight_left(i) * (u[k - 1] - u[k]);
            if (i + 1 < nx)
                lap += g.weight_right(i) * (u[k + 1] - u[k]);
            if (dirichlet && i == nx - 1) {
                const double flux = g.ghost_weight() * (ub - u[k]);
                lap += flux;
                s.boundary_flux += dt * g.volume(k) * flux;
            }
            finish_cell(k, lap);
        }
    } else {
        const double wgt = 1.0 / (g.dx() * g.dx());
        for (int j = b0; j <= b1; ++j)
            for (int i = a0; i <= a1; ++i) {
                const auto k = g.index(i, j);
                const double uk = u[k];
                double lap = 0.0;
                if (i > 0) lap += u[k - 1] - uk;
                if (i + 1 < nx) lap += u[k + 1] - uk;
                if (j > 0) lap += u[k - nx] - uk;
                if (j + 1 < ny) lap += u[k + nx] - uk;
                finish_cell(k, wgt * lap);
            }
    }

    s.source_integral += dt * source;
    s.t += dt;
    ++s.steps;

    PmeState::Window nw{nx, -1, ny, -1};
    double mx = 0.0;
    for (int j = b0; j <= b1; ++j)
        for (int i = a0; i <= a1; ++i)
            if (s.rho[g.index(i, j)] > 0.0) {
                mx = std::max(mx, s.rho[g.index(i, j)]);
                nw.i0 = std::min(nw.i0, i);
                nw.i1 = std::max(nw.i1, i);
                nw.j0 = std::min(nw.j0, j);
                nw.j1 = std::max(nw.j1, j);
            }
    s.window = nw;
    s.rho_max = mx;
}

std::vector<double> sample_exterior(const Grid& grid, const ExteriorProfile& profile)
{
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        out[k] = profile(grid.position(k));
    return out;
}

std::vector<double> mollified_exterior(const Grid& grid, const ExteriorProfile& profile, double radius)
{
    std::vector<double> s = sample_exterior(grid, profile);
    if (!(radius >= 0.0))
        throw DomainError("mollifier radius must be >= 0");
    const double dx = grid.dx();
    const int reach = static_cast<int>(std::ceil(radius / dx)) - 1;
    if (reach <= 0 || profile.kind == ExteriorProfile::Kind::zero ||
        profile.kind == ExteriorProfile::Kind::constant)
        return s;
    auto bump = [&](double d) {
        const double z = d / radius;
        return z < 1.0 ? std::exp(-1.0 / (1.0 - z * z)) : 0.0;
    };
    std::vector<double> out(s.size(), 0.0);
    if (grid.is_1d()) {
        const int n = grid.nx();
        const bool radial = grid.kind() == GeometryKind::radial;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0, wsum = 0.0;
            for (int o = -reach; o <= reach; ++o) {
                int j = i + o;
                if (j < 0 && radial)
                    j = -1 - j; // reflection through the centre
                if (j < 0 || j >= n)
                    continue;
                const double w = bump(std::abs(o) * dx);
                acc += w * s[j];
                wsum += w;
            }
            out[i] = acc / wsum;
        }
        return out;
    }
    const int nx = grid.nx(), ny = grid.ny();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double acc = 0.0, wsum = 0.0;
            for (int oj = -reach; oj <= reach; ++oj)
                for (int oi = -reach; oi <= reach; ++oi) {
                    const int a = i + oi, b = j + oj;
                    if (a < 0 || a >= nx || b < 0 || b >= ny)
                        continue;
                    const double w = bump(std::hypot(oi, oj) * dx);
                    acc += w * s[grid.index(a, b)];
                    wsum += w;
                }
            out[grid.index(i, j)] = acc / wsum;
        }
    return out;
}

double initial_condition_product(const Grid& grid, const std::vector<double>& rho_ext_m, double m)
{
    double mx = 0.0;
    for (double v : rho_ext_m)
        mx = std::max(mx, v);
    if (mx == 0.0)
        return 0.0;
    const auto lap = grid.laplacian(rho_ext_m);
    double d2 = 0.0;
    for (double v : lap)
        d2 = std::max(d2, std::abs(v));
    return m * std::pow(mx, m) * d2;
}

std::vector<double> matched_initial_density(double m, const InitialRegion& omega0, const ExteriorProfile& rho0_ext,
                                            const GrowthLaw& law, const Grid& grid)
{
    StiffnessParam mm(m);
    if (omega0.kind != InitialRegion::Kind::mask && omega0.kind != InitialRegion::Kind::empty) {
        const double reach = grid.kind() == GeometryKind::radial
                                 ? omega0.outer_radius
                                 : std::max(std::abs(omega0.center[0]), std::abs(omega0.center[1])) +
                                       omega0.outer_radius;
        if (reach > grid.extent() * (1.0 + 1e-12))
            throw DomainError("omega0 does not lie inside the grid");
    }
    if (rho0_ext.max_value() >= 1.0)
        throw DomainError("matched data needs rho^E_0 < 1");
    const auto mask = omega0.cell_mask(grid);
    std::vector<double> p0(grid.size(), 0.0);
    if (std::any_of(mask.begin(), mask.end(), [](char c) { return c != 0; }))
        p0 = solve_masked(grid, DomainMask(grid, mask), law);
    const auto ext = mollified_exterior(grid, rho0_ext, 1.0 / m);
    std::vector<double> rho(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k)
        rho[k] = std::max(density_from_pressure(std::max(p0[k], 0.0), mm), ext[k]);
    return rho;
}

double support_radius(const Grid& grid, const std::vector<double>& p, double eps)
{
    const int nx = grid.nx();
    const double dx = grid.dx();
    if (grid.is_1d()) {
        double best = 0.0;
        int hi = -1;
        for (int i = nx - 1; i >= 0; --i)
            if (p[i] > eps) {
                hi = i;
                break;
            }
        if (hi < 0)
            return 0.0;
        auto interp_right = [&](int i) {
            const double x = grid.position(i)[0];
            if (i + 1 >= nx)
                return x + 0.5 * dx;
            const double f = (p[i] - eps) / (p[i] - p[i + 1]);
            return x + std::min(f, 1.0) * dx;
        };
        best = std::abs(interp_right(hi));
        if (grid.kind() == GeometryKind::slab) {
            int lo = 0;
            while (lo < nx && !(p[lo] > eps))
                ++lo;
            const double x = grid.position(lo)[0];
            double xl = x - 0.5 * dx;
            if (lo > 0)
                xl = x - std::min((p[lo] - eps) / (p[lo] - p[lo - 1]), 1.0) * dx;
            best = std::max(best, std::abs(xl));
        }
        return best;
    }
    double best = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (p[k] > eps)
            best = std::max(best, grid.radius(k));
    return best;
}

Diagnostics diagnostics(const PmeState& s, double eps, double sigma, std::optional<double> ghost_pressure)
{
    const Grid& g = *s.grid;
    Diagnostics d;
    d.t = s.t;
    const auto p = s.pressure();
    d.mass = g.integrate(s.rho);
    for (double v : p)
        d.max_p = std::max(d.max_p, v);
    d.support_radius = support_radius(g, p, eps);

    const auto lap = g.laplacian(p, ghost_pressure);
    std::vector<double> positive(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (p[k] > eps) {
            positive[k] = 1.0;
            d.ab_min = std::min(d.ab_min, lap[k] + s.law(p[k]));
        }
        d.source_rate += g.volume(k) * s.rho[k] * s.law(p[k]);
    }
    const auto dilated = sup_convolution(g, positive, sigma);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (dilated[k] == 0.0)
            d.exterior_error = std::max(d.exterior_error,
                                        std::abs(s.rho[k] - exterior_density_at(s.ext, g.position(k), s.t)));
    return d;
}

namespace {

Trajectory start_trajectory(const PmeState& s)
{
    Trajectory tr;
    tr.grid = s.grid;
    tr.m = s.m;
    tr.law = s.law;
    tr.ext = s.ext;
    return tr;
}

std::optional<double> ghost_at(const SolverConfig& c, double t)
{
    if (c.boundary.kind == BoundaryCondition::Kind::dirichlet)
        return c.boundary.pressure(t);
    return std::nullopt;
}

struct CapCheck {
    BarrierSpec cap;
    bool active = false;
    bool warned = false;

    CapCheck(const PmeState& s, double horizon)
    {
        double M = 0.0;
        for (double v : s.pressure())
            M = std::max(M, v);
        if (M > 0.0) {
            cap = make_decay_supersolution(s.m, M, s.law, std::max(horizon, 1e-12));
            active = true;
        }
    }

    void check(const Snapshot& snap, double t0, std::vector<std::string>& warnings)
    {
        if (!active || warned)
            return;
        const double bound = cap.value({0.0, 0.0, 0.0}, snap.t - t0) + 1e-3;
        if (snap.diag.max_p > bound) {
            std::ostringstream os;
            os.precision(10);
            os << "max pressure " << snap.diag.max_p << " exceeds the decay cap " << bound << " at t=" << snap.t;
            warnings.push_back(os.str());
            warned = true;
        }
    }
};

void check_schedule(const std::vector<double>& times, double t0)
{
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0 - 1e-12)
            throw DomainError("output time precedes the state time");
        if (i > 0 && !(times[i] > times[i - 1]))
            throw DomainError("output times must be strictly increasing");
    }
}

} // namespace

std::vector<Trajectory> run_lockstep(std::vector<PmeState> states, const std::vector<double>& times,
                                     const SolverConfig& config, const RunOptions& options)
{
    if (states.empty())
        return {};
    const double t0 = states.front().t;
    for (const auto& s : states)
        if (s.t != t0)
            throw DomainError("lockstep states must share their start time");
    check_schedule(times, t0);
    const double horizon = times.empty() ? 0.0 : times.back() - t0;

    std::vector<Trajectory> out;
    std::vector<CapCheck> caps;
    for (const auto& s : states) {
        out.push_back(start_trajectory(s));
        caps.emplace_back(s, horizon);
    }
    std::vector<const PmeState*> ptrs;
    for (const auto& s : states)
        ptrs.push_back(&s);

    double t = t0;
    for (const double target : times) {
        while (t < target) {
            double dt = common_stable_dt(ptrs, config);
            const double remaining = target - t;
            bool last = false;
            if (dt >= remaining * (1.0 - 1e-12)) {
                dt = remaining;
                last = true;
            }
            for (std::size_t i = 0; i < states.size(); ++i) {
                step(states[i], config, dt);
                if (!last) {
                    out[i].min_dt = std::min(out[i].min_dt, dt);
                    out[i].max_dt = std::max(out[i].max_dt, dt);
                }
            }
            t = last ? target : t + dt;
            for (auto& s : states)
                s.t = t;
        }
        for (std::size_t i = 0; i < states.size(); ++i) {
            Snapshot snap;
            snap.t = target;
            snap.rho = states[i].rho;
            snap.diag = diagnostics(states[i], options.eps_support, options.sigma, ghost_at(config, target));
            caps[i].check(snap, t0, out[i].warnings);
            out[i].snapshots.push_back(std::move(snap));
        }
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        out[i].steps = states[i].steps;
        out[i].clamped = states[i].clamped;
        out[i].source_integral = states[i].source_integral;
        out[i].boundary_flux = states[i].boundary_flux;
        if (states[i].clamped > 0)
            out[i].warnings.push_back(std::to_string(states[i].clamped) +
                                      " undershoots above -1e-12 were clamped to zero");
    }
    return out;
}

Trajectory run_from(PmeState state, const std::vector<double>& times, const SolverConfig& config,
                    const RunOptions& options)
{
    std::vector<PmeState> one;
    one.push_back(std::move(state));
    return std::move(run_lockstep(std::move(one), times, config, options).front());
}

PmeState initial_state(const Scenario& scenario, double m, std::shared_ptr<const Grid> grid)
{
    if (!grid)
        grid = std::make_shared<const Grid>(scenario.make_grid());
    auto rho = matched_initial_density(m, scenario.omega0, scenario.rho0_ext, scenario.growth, *grid);
    return PmeState(grid, std::move(rho), 0.0, StiffnessParam(m), scenario.growth, scenario.exterior());
}

Trajectory run(const Scenario& scenario, double m, const SolverConfig& config)
{
    auto state = initial_state(scenario, m);
    RunOptions opt{scenario.epsilon_support(), scenario.sup_radius()};
    std::vector<double> times = scenario.output.times;
    if (times.empty())
        times.push_back(0.0);
    auto tr = run_from(std::move(state), times, config, opt);
    tr.initial_product = initial_condition_product(*tr.grid, mollified_exterior(*tr.grid, scenario.rho0_ext, 1.0 / m), m);
    return tr;
}

Trajectory run(const Scenario& scenario, double m) { return run(scenario, m, SolverConfig::from(scenario.solver)); }

namespace {

struct BarenblattParams {
    double alpha, beta, k, C, gamma;
};

BarenblattParams barenblatt_params(double m, double total_mass, int n)
{
    StiffnessParam checked(m);
    if (n < 1)
        throw DomainError("dimension must be >= 1");
    if (!(total_mass > 0.0))
        throw DomainError("Barenblatt mass must be > 0");
    BarenblattParams b;
    b.alpha = n / (n * (m - 1.0) + 2.0);
    b.beta = b.alpha / n;
    b.k = b.alpha * (m - 1.0) / (2.0 * m * n);
    b.gamma = 1.0 / (m - 1.0);
    // mass = |S^{n-1}| (C/k)^{n/2} C^gamma B(n/2, gamma+1)/2
    const double shape = unit_sphere_area(n) * std::pow(b.k, -0.5 * n) * 0.5 * std::beta(0.5 * n, b.gamma + 1.0);
    b.C = std::pow(total_mass / shape, 1.0 / (0.5 * n + b.gamma));
    return b;
}

} // namespace

double barenblatt_exact(double x, double t, double m, double total_mass, int n)
{
    if (!(t > 0.0))
        throw DomainError("Barenblatt solution needs t > 0");
    const auto b = barenblatt_params(m, total_mass, n);
    const double inner = b.C - b.k * x * x * std::pow(t, -2.0 * b.beta);
    if (inner <= 0.0)
        return 0.0;
    return std::pow(t, -b.alpha) * std::pow(inner, b.gamma);
}

double barenblatt_radius(double t, double m, double total_mass, int n)
{
    if (!(t > 0.0))
        throw DomainError("Barenblatt solution needs t > 0");
    const auto b = barenblatt_params(m, total_mass, n);
    return std::sqrt(b.C / b.k) * std::pow(t, b.beta);
}

void write_snapshot_csv(std::ostream& os, const Trajectory& traj)
{
    const Grid& g = *traj.grid;
    const double c = traj.m / (traj.m - 1.0);
    char buf[160];
    os << "t,index,r,rho,p\n";
    for (const auto& snap : traj.snapshots)
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double r = snap.rho[k];
            if (!g.is_1d() && r == 0.0)
                continue; // 2D tables list the occupied cells only
            const double x = g.is_1d() ? g.position(k)[0] : g.radius(k);
            std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g\n", snap.t, k, x, r,
                          r > 0.0 ? c * std::pow(r, traj.m - 1.0) : 0.0);
            os << buf;
        }
}

void write_diagnostics_csv(std::ostream& os, const Trajectory& traj)
{
    char buf[256];
    os << "t,mass,max_p,support_radius,ab_min,exterior_error\n";
    for (const auto& snap : traj.snapshots) {
        const auto& d = snap.diag;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.t, d.mass, d.max_p,
                      d.support_radius, d.ab_min, d.exterior_error);
        os << buf;
    }
}

} // namespace stiffhs
