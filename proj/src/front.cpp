#include "stiffhs/front.hpp"

#include "stiffhs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace stiffhs {

const char* to_string(EndpointKind kind)
{
    switch (kind) {
    case EndpointKind::free: return "free";
    case EndpointKind::symmetry: return "symmetry";
    case EndpointKind::pinned: return "pinned";
    case EndpointKind::domain_edge: return "domain_edge";
    }
    return "?";
}

const char* to_string(FrontEvent::Kind kind)
{
    switch (kind) {
    case FrontEvent::Kind::move: return "move";
    case FrontEvent::Kind::nucleate: return "nucleate";
    case FrontEvent::Kind::merge: return "merge";
    case FrontEvent::Kind::saturate: return "saturate";
    }
    return "?";
}

double FrontState::outer_radius() const
{
    double r = 0.0;
    for (const auto& c : components)
        r = std::max(r, c.b);
    return r;
}

bool FrontState::contains(double r) const
{
    for (const auto& c : components)
        if (r >= c.a && r <= c.b)
            return true;
    return false;
}

double FrontState::volume() const
{
    double v = 0.0;
    for (const auto& c : components)
        v += unit_sphere_area(n) / n * (std::pow(c.b, n) - std::pow(c.a, n));
    return v;
}

namespace {

constexpr double kTouch = 1e-12;

// rho^E just outside an endpoint: the exterior side is what the law sees
// (the absorbed side of a nucleated interval may already sit at rho^E >= 1).
double exterior_side(const ExteriorDensity& ext, double r, double dir, double t)
{
    return ext.at_radius(std::max(r + dir * 1e-9 * std::max(1.0, r), 0.0), t);
}

void log_event(std::vector<FrontEvent>* events, double t, FrontEvent::Kind kind, int comp, double a, double b)
{
    if (events)
        events->push_back({t, kind, comp, a, b});
}

std::optional<double> left_bc(const FrontComponent& c, const FrontState& s)
{
    switch (c.left) {
    case EndpointKind::symmetry: return std::nullopt;
    case EndpointKind::pinned: return s.pinned_value(s.t);
    default: return 0.0;
    }
}

double right_bc(const FrontComponent& c, const FrontState& s)
{
    return c.right == EndpointKind::pinned ? s.pinned_value(s.t) : 0.0;
}

// Sorts, unions overlapping components and updates endpoint kinds at the walls.
void normalize(FrontState& s, std::vector<FrontEvent>* events)
{
    auto& cs = s.components;
    std::sort(cs.begin(), cs.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    std::vector<FrontComponent> out;
    for (auto& c : cs) {
        if (c.left == EndpointKind::free && c.a <= kTouch) {
            c.a = 0.0;
            c.left = EndpointKind::symmetry;
            log_event(events, s.t, FrontEvent::Kind::merge, static_cast<int>(out.size()), c.a, c.b);
        }
        if (c.right == EndpointKind::free && c.b >= s.domain_radius - kTouch) {
            c.b = s.domain_radius;
            c.right = EndpointKind::domain_edge;
        }
        if (!out.empty() && c.a <= out.back().b + kTouch) {
            auto& prev = out.back();
            if (c.b > prev.b) {
                prev.b = c.b;
                prev.right = c.right;
            }
            log_event(events, s.t, FrontEvent::Kind::merge, static_cast<int>(out.size() - 1), prev.a, prev.b);
            continue;
        }
        out.push_back(c);
    }
    cs = std::move(out);
    if (!s.saturated && cs.size() == 1 && cs[0].a == 0.0 && cs[0].left == EndpointKind::symmetry &&
        cs[0].right == EndpointKind::domain_edge) {
        s.saturated = true;
        log_event(events, s.t, FrontEvent::Kind::saturate, 0, 0.0, s.domain_radius);
    }
}

// Moves from r in direction dir until int (1 - min(1, rho^E(s, t))) ds = target.
double march(double r, double dir, double target, const ExteriorDensity& ext, double t, double L)
{
    if (!(target > 0.0))
        return r;
    auto f = [&](double x) { return 1.0 - std::min(1.0, exterior_side(ext, x, dir, t)); };
    if (ext.rho0_ext.kind == ExteriorProfile::Kind::zero || ext.rho0_ext.kind == ExteriorProfile::Kind::constant) {
        const double fv = f(r);
        const double x = fv > 0.0 ? r + dir * target / fv : (dir > 0 ? L : 0.0);
        return std::clamp(x, 0.0, L);
    }
    const double ds = L / 16384.0;
    double acc = 0.0;
    double s = r;
    double fs = f(s);
    for (;;) {
        double s2 = s + dir * ds;
        bool edge = false;
        if (dir > 0 && s2 >= L) {
            s2 = L;
            edge = true;
        }
        if (dir < 0 && s2 <= 0.0) {
            s2 = 0.0;
            edge = true;
        }
        const double len = std::abs(s2 - s);
        const double f2 = f(s2);
        const double inc = 0.5 * (fs + f2) * len;
        if (acc + inc >= target && inc > 0.0) {
            // f linear on the sub-interval: fs x + (f2 - fs) x^2 / (2 len) = target - acc
            const double need = target - acc;
            const double qa = (f2 - fs) / (2.0 * len);
            double x;
            if (std::abs(qa) * len < 1e-12 * std::max(fs, 1e-300))
                x = need / fs;
            else
                x = (-fs + std::sqrt(std::max(fs * fs + 4.0 * qa * need, 0.0))) / (2.0 * qa);
            return s + dir * std::clamp(x, 0.0, len);
        }
        acc += inc;
        s = s2;
        fs = f2;
        if (edge)
            return s;
    }
}

struct Fluxes {
    std::vector<double> left, right;
};

Fluxes current_fluxes(const FrontState& s)
{
    Fluxes f;
    for (const auto& c : s.components) {
        f.left.push_back(c.left == EndpointKind::free ? c.grad_left : 0.0);
        f.right.push_back(c.right == EndpointKind::free ? c.grad_right : 0.0);
    }
    return f;
}

void move_endpoints(FrontState& s, const FrontState& from, const Fluxes& flux, double dt, const ExteriorDensity& ext,
                    double t_mid)
{
    for (std::size_t i = 0; i < from.components.size(); ++i) {
        const auto& c = from.components[i];
        auto& d = s.components[i];
        if (c.right == EndpointKind::free)
            d.b = march(c.b, 1.0, dt * flux.right[i], ext, t_mid, s.domain_radius);
        if (c.left == EndpointKind::free)
            d.a = march(c.a, -1.0, dt * flux.left[i], ext, t_mid, s.domain_radius);
    }
}

} // namespace

void solve_profiles(FrontState& s, const GrowthLaw& law, const ExteriorDensity& ext)
{
    for (auto& c : s.components) {
        if (c.right == EndpointKind::pinned || c.left == EndpointKind::pinned)
            if (!s.pinned_value)
                throw DomainError("pinned endpoint without boundary data");
        if (!(c.b > c.a)) {
            c.profile = RadialProfile{};
            c.grad_left = c.grad_right = 0.0;
            continue;
        }
        c.profile = solve_radial(s.n, c.a, c.b, left_bc(c, s), right_bc(c, s), law, s.grid_points);
        c.grad_right = boundary_gradient(c.profile, Side::outer);
        c.grad_left = c.left == EndpointKind::symmetry ? 0.0 : boundary_gradient(c.profile, Side::inner);
        c.g_left = velocity_coefficient_from_density(exterior_side(ext, c.a, -1.0, s.t));
        c.g_right = velocity_coefficient_from_density(exterior_side(ext, c.b, 1.0, s.t));
    }
}

void advance(FrontState& s, double dt, const GrowthLaw& law, const ExteriorDensity& ext,
             std::vector<FrontEvent>* events)
{
    if (!(dt > 0.0))
        throw DomainError("front step needs dt > 0");
    if (s.saturated || s.components.empty()) {
        s.t += dt;
        return;
    }
    const double t_mid = s.t + 0.5 * dt;
    for (const auto& c : s.components) {
        if ((c.right == EndpointKind::free && exterior_side(ext, c.b, 1.0, t_mid) >= 1.0) ||
            (c.left == EndpointKind::free && exterior_side(ext, c.a, -1.0, t_mid) >= 1.0))
            throw std::logic_error("velocity coefficient is infinite at a moving endpoint; run nucleation_scan first");
    }
    const Fluxes f0 = current_fluxes(s);

    FrontState pred = s;
    move_endpoints(pred, s, f0, dt, ext, t_mid);
    pred.t = s.t + dt;
    const std::size_t count = pred.components.size();
    normalize(pred, nullptr);
    Fluxes avg = f0;
    if (pred.components.size() == count && !pred.saturated) {
        solve_profiles(pred, law, ext);
        const Fluxes f1 = current_fluxes(pred);
        for (std::size_t i = 0; i < count; ++i) {
            avg.left[i] = 0.5 * (f0.left[i] + f1.left[i]);
            avg.right[i] = 0.5 * (f0.right[i] + f1.right[i]);
        }
    }

    const FrontState before = s;
    move_endpoints(s, before, avg, dt, ext, t_mid);
    s.t += dt;
    normalize(s, events);
    if (!s.saturated)
        solve_profiles(s, law, ext);
    // Components only grow.
    for (const auto& c : before.components)
        if (!s.contains(c.a) || !s.contains(c.b))
            throw std::logic_error("front step shrank the positive set");
}

double absorption_time(const ExteriorDensity& ext, double r)
{
    const double v = ext.rho0_ext.at_radius(r);
    if (v >= 1.0)
        return 0.0;
    if (v <= 0.0 || ext.rate() <= 0.0)
        return std::numeric_limits<double>::infinity();
    return std::log(1.0 / v) / ext.rate();
}

void nucleation_scan(FrontState& s, const ExteriorDensity& ext, double t_next, const GrowthLaw& law,
                     std::vector<FrontEvent>* events)
{
    if (t_next < s.t)
        throw DomainError("nucleation scan needs t_next >= t");
    if (s.saturated || ext.rho0_ext.max_value() <= 0.0)
        return;
    const double level = std::exp(-ext.rate() * t_next);
    if (ext.rho0_ext.max_value() < level)
        return;
    const double L = s.domain_radius;
    auto inside = [&](double r) { return ext.rho0_ext.at_radius(r) >= level; };
    auto refine = [&](double out, double in) {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (out + in);
            (inside(mid) ? in : out) = mid;
        }
        return in;
    };
    const int N = 8192;
    std::vector<std::pair<double, double>> runs;
    int start = -1;
    for (int i = 0; i <= N; ++i) {
        const double r = L * i / N;
        const bool in = i <= N && inside(r);
        if (in && start < 0)
            start = i;
        if ((!in || i == N) && start >= 0) {
            const int last = in ? i : i - 1;
            const double lo = start == 0 ? 0.0 : refine(L * (start - 1) / N, L * start / N);
            const double hi = last == N ? L : refine(L * (last + 1) / N, L * last / N);
            runs.emplace_back(lo, hi);
            start = -1;
        }
    }
    bool changed = false;
    for (const auto& [lo, hi] : runs) {
        bool covered = false;
        for (const auto& c : s.components)
            if (c.a <= lo + kTouch && c.b >= hi - kTouch)
                covered = true;
        if (covered)
            continue;
        double peak = 0.0;
        for (int i = 0; i <= 64; ++i)
            peak = std::max(peak, ext.rho0_ext.at_radius(lo + (hi - lo) * i / 64.0));
        const double when = peak >= 1.0 || ext.rate() <= 0.0 ? s.t
                                                               : std::max(s.t, std::log(1.0 / peak) / ext.rate());
        FrontComponent c;
        c.a = lo;
        c.b = hi;
        c.left = lo <= 0.0 ? EndpointKind::symmetry : EndpointKind::free;
        c.right = hi >= L ? EndpointKind::domain_edge : EndpointKind::free;
        s.components.push_back(c);
        s.nucleated.push_back({lo, hi, when});
        log_event(events, when, FrontEvent::Kind::nucleate, static_cast<int>(s.components.size() - 1), lo, hi);
        changed = true;
    }
    if (changed) {
        normalize(s, events);
        if (!s.saturated)
            solve_profiles(s, law, ext);
    }
}

bool exterior_invariant_holds(const FrontState& s, const ExteriorDensity& ext)
{
    if (s.saturated)
        return true;
    const int N = 4096;
    for (int i = 0; i <= N; ++i) {
        const double r = s.domain_radius * i / N;
        if (ext.at_radius(r, s.t) >= 1.0) {
            bool in = false;
            for (const auto& c : s.components)
                if (r >= c.a - 1e-9 && r <= c.b + 1e-9)
                    in = true;
            if (!in)
                return false;
        }
    }
    return true;
}

double FrontTrajectory::radius_at(double t) const
{
    if (series.empty())
        return 0.0;
    if (t <= series.front().t)
        return series.front().radius;
    for (std::size_t i = 1; i < series.size(); ++i)
        if (t <= series[i].t) {
            const double w = (t - series[i - 1].t) / (series[i].t - series[i - 1].t);
            return (1.0 - w) * series[i - 1].radius + w * series[i].radius;
        }
    return series.back().radius;
}

FrontState initial_front(const Scenario& sc)
{
    if (sc.geometry.kind != GeometryKind::radial)
        throw DomainError("the front solver supports radial geometry only");
    FrontState s;
    s.n = sc.geometry.dimension;
    s.domain_radius = sc.geometry.extent;
    s.grid_points = sc.front.grid_points;
    const auto& o = sc.omega0;
    if (norm(o.center) != 0.0)
        throw DomainError("radial front needs omega0 centred at the origin");
    FrontComponent c;
    switch (o.kind) {
    case InitialRegion::Kind::empty: return s;
    case InitialRegion::Kind::mask: throw DomainError("mask regions are not radial");
    case InitialRegion::Kind::ball:
        c.a = 0.0;
        c.b = o.outer_radius;
        c.left = EndpointKind::symmetry;
        break;
    case InitialRegion::Kind::annulus:
        c.a = o.inner_radius;
        c.b = o.outer_radius;
        c.left = o.inner_radius > 0.0 ? EndpointKind::free : EndpointKind::symmetry;
        break;
    }
    c.right = EndpointKind::free;
    if (c.b > s.domain_radius)
        throw DomainError("omega0 does not fit inside the domain");
    s.components.push_back(c);
    return s;
}

namespace {

FrontSample sample_of(const FrontState& s)
{
    FrontSample f;
    f.t = s.t;
    f.radius = s.outer_radius();
    for (const auto& c : s.components)
        if (c.b == f.radius) {
            f.gradient = c.grad_right;
            f.g = c.g_right.is_infinite() ? std::numeric_limits<double>::infinity() : c.g_right.value;
        }
    return f;
}

} // namespace

FrontTrajectory run_front(FrontState s, const GrowthLaw& law, const ExteriorDensity& ext,
                          const std::vector<double>& times, double dt)
{
    if (!(dt > 0.0))
        throw DomainError("front dt must be > 0");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (times[i] < s.t - 1e-12 || (i > 0 && !(times[i] > times[i - 1])))
            throw DomainError("front output times must be increasing and not precede the state");
    FrontTrajectory tr;
    normalize(s, &tr.events);
    nucleation_scan(s, ext, s.t, law, &tr.events);
    if (!s.saturated)
        solve_profiles(s, law, ext);
    tr.series.push_back(sample_of(s));
    for (const double target : times) {
        while (!s.saturated && s.t < target - 1e-12 * std::max(1.0, target)) {
            double h = std::min(dt, target - s.t);
            if (target - (s.t + h) < 1e-9 * dt)
                h = target - s.t;
            nucleation_scan(s, ext, s.t + h, law, &tr.events);
            if (s.saturated) {
                s.t += h;
                tr.saturated = true;
                tr.saturation_time = s.t;
                break;
            }
            advance(s, h, law, ext, &tr.events);
            if (s.saturated) {
                tr.saturated = true;
                tr.saturation_time = s.t;
            }
            tr.series.push_back(sample_of(s));
        }
        if (!s.saturated)
            s.t = target;
        if (!exterior_invariant_holds(s, ext))
            throw std::logic_error("nucleation invariant violated: {rho^E >= 1} outside the positive set");
        tr.snapshots.push_back(s);
        if (s.saturated)
            break;
    }
    return tr;
}

FrontTrajectory run_front(const Scenario& sc)
{
    std::vector<double> times = sc.output.times;
    if (times.empty())
        times.push_back(0.0);
    return run_front(initial_front(sc), sc.growth, sc.exterior(), times, sc.front.dt);
}

FrontTrajectory fixed_boundary_radial_solution(int n, double R_fixed, std::function<double(double)> boundary_value,
                                               double init_front, const ExteriorDensity& ext, double T,
                                               const GrowthLaw& law, double dt, int grid_points, double domain_radius)
{
    if (n < 1 || !(R_fixed > 0.0) || !(init_front > 0.0) || init_front == R_fixed)
        throw DomainError("fixed-boundary solution needs n >= 1, R_fixed > 0, init_front > 0, init_front != R_fixed");
    if (!(T >= 0.0))
        throw DomainError("horizon must be >= 0");
    if (!boundary_value)
        throw DomainError("boundary data missing");
    for (int i = 0; i <= 1000; ++i) {
        const double t = T * i / 1000.0;
        const double v = boundary_value(t);
        if (!(v > 0.0))
            throw DomainError("boundary data must stay positive on [0, T]");
    }
    const bool exterior = init_front > R_fixed;
    const double L = domain_radius > 0.0 ? domain_radius : 10.0 * std::max(R_fixed, init_front);
    // rho^E must stay below 1 outside the positive set up to T.
    const double lo = exterior ? init_front : 0.0;
    const double hi = exterior ? L : init_front;
    for (int i = 0; i <= 4096; ++i) {
        const double r = lo + (hi - lo) * i / 4096.0;
        if (ext.at_radius(r, T) >= 1.0)
            throw DomainError("exterior density reaches 1 outside the positive set");
    }
    FrontState s;
    s.n = n;
    s.domain_radius = L;
    s.grid_points = grid_points;
    s.pinned_value = std::move(boundary_value);
    FrontComponent c;
    if (exterior) {
        c.a = R_fixed;
        c.left = EndpointKind::pinned;
        c.b = init_front;
        c.right = EndpointKind::free;
    } else {
        c.a = init_front;
        c.left = EndpointKind::free;
        c.b = R_fixed;
        c.right = EndpointKind::pinned;
    }
    s.components.push_back(c);
    std::vector<double> times{0.0};
    if (T > 0.0)
        times = OutputSchedule::every(T / 10.0, T).times;
    return run_front(std::move(s), law, ext, times, dt);
}

void write_front_csv(std::ostream& os, const FrontTrajectory& traj)
{
    char buf[320];
    auto gv = [](const VelocityCoefficient& g) { return g.is_infinite() ? std::numeric_limits<double>::infinity() : g.value; };
    os << "t,component,left,right,grad_left,grad_right,g_left,g_right,event\n";
    for (const auto& s : traj.snapshots)
        for (std::size_t i = 0; i < s.components.size(); ++i) {
            const auto& c = s.components[i];
            std::snprintf(buf, sizeof buf, "%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,move\n", s.t, i, c.a, c.b,
                          c.grad_left, c.grad_right, gv(c.g_left), gv(c.g_right));
            os << buf;
        }
    for (const auto& e : traj.events) {
        if (e.kind == FrontEvent::Kind::move)
            continue;
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,0,0,0,0,%s\n", e.t, e.component, e.a, e.b,
                      to_string(e.kind));
        os << buf;
    }
}

} // namespace stiffhs
