#include "stiffhs/harness.hpp"

#include "stiffhs/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <semaphore>
#include <thread>

namespace stiffhs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rel_or_abs(double err, double scale) { return scale > 0.0 ? err / scale : err; }

// Slope of the least-squares line through (x_i, y_i).
double ls_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    if (n < 2)
        return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

const FrontState* front_at(const FrontTrajectory& ft, double t)
{
    for (const auto& s : ft.snapshots)
        if (std::abs(s.t - t) <= 1e-9 * std::max(1.0, std::abs(t)))
            return &s;
    // saturated runs stop early; the final state persists
    if (ft.saturated && !ft.snapshots.empty() && t >= ft.snapshots.back().t)
        return &ft.snapshots.back();
    return nullptr;
}

struct Membership {
    bool inner = false;
    bool outer = false;
    const FrontComponent* comp = nullptr;
};

Membership classify(const FrontState& fs, double r, double w)
{
    Membership out;
    if (fs.saturated) {
        out.inner = true;
        return out;
    }
    bool near = false;
    for (const auto& c : fs.components) {
        const double lo = c.left == EndpointKind::free ? c.a - w : c.a;
        const double hi = c.right == EndpointKind::free ? c.b + w : c.b;
        if (r >= lo && r <= hi)
            near = true;
        const double ilo = c.left == EndpointKind::free ? c.a + w : c.a;
        const double ihi = c.right == EndpointKind::free ? c.b - w : c.b;
        if (r >= ilo && r <= ihi) {
            out.inner = true;
            out.comp = &c;
        }
    }
    out.outer = !near;
    return out;
}

struct MResult {
    Trajectory traj;
    std::optional<ContractionSeries> contraction;
};

MResult run_one(const Scenario& sc, double m, bool contraction)
{
    MResult res;
    const SolverConfig cfg = SolverConfig::from(sc.solver);
    res.traj = run(sc, m, cfg);
    if (contraction) {
        auto a = initial_state(sc, m, res.traj.grid);
        auto b = a;
        for (auto& v : b.rho)
            v *= 0.99;
        b.refresh_window();
        RunOptions opt{sc.epsilon_support(), sc.sup_radius()};
        auto runs = run_lockstep({a, b}, sc.output.times, cfg, opt);
        res.contraction = l1_contraction_check(runs[0], runs[1]);
    }
    return res;
}

} // namespace

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

SweepReport m_sweep(const Scenario& sc, const SweepOptions& options)
{
    if (sc.geometry.kind != GeometryKind::radial)
        throw Unsupported("m_sweep needs a radial scenario (the front reference is radial)");
    if (sc.m_list.size() < 3)
        throw DomainError("m_sweep needs at least three m values");
    for (std::size_t i = 0; i < sc.m_list.size(); ++i) {
        StiffnessParam check(sc.m_list[i]);
        if (i > 0 && !(sc.m_list[i] > sc.m_list[i - 1]))
            throw DomainError("m values must be strictly increasing");
    }
    if (auto bad = validate(sc); !bad.empty())
        throw ConfigError(bad);

    SweepReport rep;
    rep.scenario_hash = options.scenario_hash;
    rep.dx = sc.geometry.dx;
    rep.margin = options.margin.value_or(4.0 * sc.geometry.dx);
    if (rep.margin < 0.0)
        throw DomainError("margin must be >= 0");
    rep.eps_support = sc.epsilon_support();
    rep.m_list = sc.m_list;
    rep.growth_flagged = !sc.growth.strictly_decreasing();
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, "radial n=%d extent=%.17g dx=%.17g cells=%d", sc.geometry.dimension,
                      sc.geometry.extent, sc.geometry.dx, sc.make_grid().nx());
        rep.grid = buf;
    }
    const auto& times = sc.output.times;
    rep.eval_time = options.eval_time.value_or(times.empty() ? 0.0 : times.back());

    const FrontTrajectory ref = run_front(sc);

    // per-m runs are independent; at most `threads` in flight
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const int limit = options.threads > 0 ? options.threads : static_cast<int>(std::min<std::size_t>(hw, sc.m_list.size()));
    std::counting_semaphore<64> slots(std::clamp(limit, 1, 64));
    std::vector<std::future<MResult>> futures;
    for (const double m : sc.m_list)
        futures.push_back(std::async(std::launch::async, [&, m] {
            slots.acquire();
            struct Release {
                std::counting_semaphore<64>& s;
                ~Release() { s.release(); }
            } guard{slots};
            return run_one(sc, m, options.contraction);
        }));
    std::vector<MResult> results;
    for (auto& f : futures)
        results.push_back(f.get());

    const double w = rep.margin;
    for (std::size_t im = 0; im < results.size(); ++im) {
        const auto& tr = results[im].traj;
        const Grid& grid = *tr.grid;
        const double m = sc.m_list[im];
        SweepSummary sum;
        sum.m = m;
        sum.monotone_min = time_monotonicity(tr);
        sum.initial_product = tr.initial_product;
        sum.steps = tr.steps;
        sum.min_dt = tr.min_dt;
        sum.warnings = tr.warnings;
        sum.ab_min = kInf;
        if (results[im].contraction)
            sum.contraction_max = results[im].contraction->max_ratio;
        double best_gap = kInf;
        for (const auto& snap : tr.snapshots) {
            const FrontState* fs = front_at(ref, snap.t);
            if (!fs)
                continue;
            SweepRow row;
            row.m = m;
            row.t = snap.t;
            row.reference_radius = fs->saturated ? grid.extent() : fs->outer_radius();
            row.pme_radius = snap.diag.support_radius;
            row.radius_error = rel_or_abs(std::abs(row.pme_radius - row.reference_radius), row.reference_radius);
            row.ab_min = snap.diag.ab_min;
            const double pref = 1.0; // saturated interior density
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double r = grid.radius(k);
                const auto mem = classify(*fs, r, w);
                const double rho = snap.rho[k];
                if (mem.inner) {
                    ++row.inner_cells;
                    row.inner_error = std::max(row.inner_error, std::abs(rho - pref));
                    const double p = pressure_from_density(rho, StiffnessParam(m));
                    const double p_ref = mem.comp ? mem.comp->profile.at(r) : 0.0;
                    row.pressure_error = std::max(row.pressure_error, std::abs(p - p_ref));
                }
                if (mem.outer) {
                    ++row.outer_cells;
                    row.outer_error = std::max(row.outer_error, std::abs(rho - tr.ext.at_radius(r, snap.t)));
                }
            }
            if (snap.t >= 0.1 - 1e-12)
                sum.ab_min = std::min(sum.ab_min, row.ab_min);
            const double gap = std::abs(snap.t - rep.eval_time);
            if (gap < best_gap) {
                best_gap = gap;
                sum.radius_error = row.radius_error;
                sum.inner_error = row.inner_error;
                sum.outer_error = row.outer_error;
                sum.pressure_error = row.pressure_error;
            }
            rep.rows.push_back(row);
        }
        if (!(best_gap < kInf))
            rep.notes.push_back("no snapshot matched a reference front time");
        if (!rep.smallest_monotone_m && sum.monotone_min >= -1e-10)
            rep.smallest_monotone_m = m;
        rep.summary.push_back(std::move(sum));
    }

    auto trend = [&](auto field) {
        const std::size_t n = rep.summary.size();
        if (n < 3)
            return false;
        const double e0 = field(rep.summary[n - 3]), e1 = field(rep.summary[n - 2]), e2 = field(rep.summary[n - 1]);
        return e0 >= e1 && e1 >= e2;
    };
    rep.radius_trend_ok = trend([](const SweepSummary& s) { return s.radius_error; });
    rep.inner_trend_ok = trend([](const SweepSummary& s) { return s.inner_error; });
    rep.outer_trend_ok = trend([](const SweepSummary& s) { return s.outer_error; });
    if (!(rep.radius_trend_ok && rep.inner_trend_ok && rep.outer_trend_ok))
        rep.notes.push_back("error trend not monotone in m: grid under-resolved for the largest m");
    if (rep.growth_flagged)
        rep.notes.push_back("growth law is a constant test mode (G' < 0 does not hold)");
    if (ref.saturated)
        rep.notes.push_back("reference front saturated the domain");
    return rep;
}

std::string SweepReport::to_json() const
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["scenario_hash"] = scenario_hash;
    j["grid"] = grid;
    j["dx"] = dx;
    j["margin"] = margin;
    j["eval_time"] = eval_time;
    j["eps_support"] = eps_support;
    j["growth_flagged"] = growth_flagged;
    j["m_list"] = m_list;
    j["smallest_monotone_m"] = smallest_monotone_m ? ordered_json(*smallest_monotone_m) : ordered_json(nullptr);
    j["trend"] = {{"radius", radius_trend_ok}, {"inner", inner_trend_ok}, {"outer", outer_trend_ok}};
    ordered_json s = ordered_json::array();
    for (const auto& x : summary) {
        ordered_json e;
        e["m"] = x.m;
        e["radius_error"] = x.radius_error;
        e["inner_density_error"] = x.inner_error;
        e["outer_density_error"] = x.outer_error;
        e["pressure_error"] = x.pressure_error;
        e["monotone_min"] = x.monotone_min;
        e["ab_min"] = std::isfinite(x.ab_min) ? ordered_json(x.ab_min) : ordered_json(nullptr);
        e["contraction_max"] = x.contraction_max ? ordered_json(*x.contraction_max) : ordered_json(nullptr);
        e["initial_product"] = x.initial_product;
        e["steps"] = x.steps;
        e["min_dt"] = x.min_dt;
        e["warnings"] = x.warnings;
        s.push_back(std::move(e));
    }
    j["summary"] = std::move(s);
    j["notes"] = notes;
    return j.dump(2);
}

void SweepReport::write_csv(std::ostream& os) const
{
    os << "m,t,reference_radius,pme_radius,radius_error,inner_density_error,outer_density_error,pressure_error,"
          "ab_min,inner_cells,outer_cells\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%ld\n", r.m, r.t,
                      r.reference_radius, r.pme_radius, r.radius_error, r.inner_error, r.outer_error,
                      r.pressure_error, r.ab_min, r.inner_cells, r.outer_cells);
        os << buf;
    }
}

double time_monotonicity(const Trajectory& traj)
{
    double best = kInf;
    for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
        const auto& a = traj.snapshots[k - 1].rho;
        const auto& b = traj.snapshots[k].rho;
        for (std::size_t i = 0; i < a.size(); ++i)
            best = std::min(best, b[i] - a[i]);
    }
    return best;
}

namespace {

void require_matching(const Trajectory& a, const Trajectory& b)
{
    if (!a.grid || !b.grid || !a.grid->same_layout(*b.grid))
        throw DomainError("trajectories live on different grids");
    if (a.snapshots.size() != b.snapshots.size())
        throw DomainError("trajectories have different snapshot counts");
    for (std::size_t k = 0; k < a.snapshots.size(); ++k)
        if (std::abs(a.snapshots[k].t - b.snapshots[k].t) > 1e-12 * std::max(1.0, std::abs(a.snapshots[k].t)))
            throw DomainError("trajectories have different snapshot times");
    if (a.snapshots.empty())
        throw DomainError("trajectories are empty");
}

double l1_distance(const Grid& g, const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        s += g.volume(k) * std::abs(a[k] - b[k]);
    return s;
}

} // namespace

ContractionSeries l1_contraction_check(const Trajectory& a, const Trajectory& b)
{
    require_matching(a, b);
    const Grid& g = *a.grid;
    const double g0 = a.law(0.0);
    const double t0 = a.snapshots.front().t;
    const double d0 = l1_distance(g, a.snapshots.front().rho, b.snapshots.front().rho);
    ContractionSeries out;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const double t = a.snapshots[k].t;
        const double d = l1_distance(g, a.snapshots[k].rho, b.snapshots[k].rho);
        const double den = std::exp(g0 * (t - t0)) * d0;
        double ratio;
        if (den > 0.0)
            ratio = d / den;
        else
            ratio = d > 0.0 ? kInf : 0.0; // 0/0 counts as no growth
        out.t.push_back(t);
        out.ratio.push_back(ratio);
        out.max_ratio = std::max(out.max_ratio, ratio);
    }
    out.flagged = out.max_ratio > 1.0 + 1e-2;
    return out;
}

ComparisonResult comparison_check(const Trajectory& a, const Trajectory& b, ComparisonMode mode)
{
    require_matching(a, b);
    ComparisonResult res;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        const auto& ra = a.snapshots[k].rho;
        const auto& rb = b.snapshots[k].rho;
        double worst = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i)
            worst = std::max(worst, ra[i] - rb[i]);
        if (k == 0 && mode == ComparisonMode::strict && worst > 0.0)
            throw DomainError("comparison precondition violated: rho_a(0) > rho_b(0) somewhere");
        res.worst_violation = std::max(res.worst_violation, worst);
    }
    res.holds = res.worst_violation <= 1e-12;
    return res;
}

double contour_length(const Grid& grid, const std::vector<double>& f, double level)
{
    if (grid.kind() != GeometryKind::box2d)
        throw DomainError("contour_length needs a box grid");
    const int nx = grid.nx(), ny = grid.ny();
    const double h = grid.dx();
    double total = 0.0;
    // corners: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1); edges: 0 bottom, 1 right, 2 top, 3 left
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const double v[4] = {f[grid.index(i, j)] - level, f[grid.index(i + 1, j)] - level,
                                 f[grid.index(i + 1, j + 1)] - level, f[grid.index(i, j + 1)] - level};
            int mask = 0;
            for (int c = 0; c < 4; ++c)
                if (v[c] > 0.0)
                    mask |= 1 << c;
            if (mask == 0 || mask == 15)
                continue;
            const double cx[4] = {0.0, h, h, 0.0};
            const double cy[4] = {0.0, 0.0, h, h};
            auto crossing = [&](int e, double& x, double& y) {
                const int c0 = e, c1 = (e + 1) % 4;
                const double s = v[c0] / (v[c0] - v[c1]);
                x = cx[c0] + s * (cx[c1] - cx[c0]);
                y = cy[c0] + s * (cy[c1] - cy[c0]);
            };
            auto seg = [&](int e0, int e1) {
                double x0, y0, x1, y1;
                crossing(e0, x0, y0);
                crossing(e1, x1, y1);
                total += std::hypot(x1 - x0, y1 - y0);
            };
            std::vector<int> cut;
            for (int e = 0; e < 4; ++e)
                if (((mask >> e) & 1) != ((mask >> ((e + 1) % 4)) & 1))
                    cut.push_back(e);
            if (cut.size() == 2) {
                seg(cut[0], cut[1]);
            } else {
                // saddle: the centre value decides which corners connect
                const bool centre_in = 0.25 * (v[0] + v[1] + v[2] + v[3]) > 0.0;
                const bool c0_in = (mask & 1) != 0;
                if (centre_in == c0_in) {
                    seg(0, 1);
                    seg(2, 3);
                } else {
                    seg(3, 0);
                    seg(1, 2);
                }
            }
        }
    return total;
}

PerimeterSeries perimeter_series(const Trajectory& traj, double eps)
{
    if (!traj.grid)
        throw DomainError("trajectory has no grid");
    const Grid& g = *traj.grid;
    const int n = g.dimension();
    PerimeterSeries out;
    for (const auto& snap : traj.snapshots) {
        std::vector<double> p(snap.rho.size());
        for (std::size_t k = 0; k < p.size(); ++k)
            p[k] = pressure_from_density(snap.rho[k], StiffnessParam(traj.m));
        double per = 0.0;
        if (g.kind() == GeometryKind::box2d) {
            per = contour_length(g, p, eps);
        } else {
            const int nx = g.nx();
            const double dx = g.dx();
            auto area = [&](double x) {
                return g.kind() == GeometryKind::radial ? unit_sphere_area(n) * std::pow(std::abs(x), n - 1) : 1.0;
            };
            for (int i = 0; i + 1 < nx; ++i) {
                const bool in0 = p[i] > eps, in1 = p[i + 1] > eps;
                if (in0 == in1)
                    continue;
                double x;
                if (in0)
                    x = g.position(i)[0] + std::min((p[i] - eps) / (p[i] - p[i + 1]), 1.0) * dx;
                else
                    x = g.position(i + 1)[0] - std::min((p[i + 1] - eps) / (p[i + 1] - p[i]), 1.0) * dx;
                per += area(x);
            }
        }
        double band = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k)
            if (p[k] > 0.5 * eps && p[k] < 2.0 * eps)
                band += g.volume(k);
        out.t.push_back(snap.t);
        out.perimeter.push_back(per);
        out.band_area.push_back(band);
    }
    for (std::size_t k = 1; k < out.t.size(); ++k)
        out.band_measure += 0.5 * (out.t[k] - out.t[k - 1]) * (out.band_area[k] + out.band_area[k - 1]);
    return out;
}

VelocityLawReport velocity_law_error(const Trajectory& pme, const FrontTrajectory& front)
{
    const std::size_t ns = pme.snapshots.size();
    if (ns < 3)
        throw DomainError("velocity law needs at least three snapshots");
    if (!pme.grid || pme.grid->kind() != GeometryKind::radial)
        throw DomainError("velocity law needs a radial trajectory");
    std::vector<double> t(ns), R(ns);
    for (std::size_t k = 0; k < ns; ++k) {
        t[k] = pme.snapshots[k].t;
        R[k] = pme.snapshots[k].diag.support_radius;
    }
    const std::size_t win = std::min<std::size_t>(5, ns);
    VelocityLawReport rep;
    std::vector<double> errs;
    for (std::size_t k = 0; k < ns; ++k) {
        std::size_t lo = k >= win / 2 ? k - win / 2 : 0;
        lo = std::min(lo, ns - win);
        std::vector<double> xs(t.begin() + lo, t.begin() + lo + win), ys(R.begin() + lo, R.begin() + lo + win);
        VelocitySample s;
        s.t = t[k];
        s.radius = R[k];
        s.measured = ls_slope(xs, ys);
        // g |p_r| of the reference where its front passes the same radius
        const auto& ser = front.series;
        double v = 0.0;
        if (!ser.empty() && s.radius > 0.0) {
            auto speed = [](const FrontSample& f) { return std::isfinite(f.g) ? f.g * std::abs(f.gradient) : kInf; };
            if (s.radius <= ser.front().radius)
                v = speed(ser.front());
            else if (s.radius >= ser.back().radius)
                v = speed(ser.back());
            else
                for (std::size_t i = 1; i < ser.size(); ++i)
                    if (ser[i].radius >= s.radius) {
                        const double span = ser[i].radius - ser[i - 1].radius;
                        const double wgt = span > 0.0 ? (s.radius - ser[i - 1].radius) / span : 1.0;
                        v = (1.0 - wgt) * speed(ser[i - 1]) + wgt * speed(ser[i]);
                        break;
                    }
        }
        s.reference = v;
        if (v == 0.0)
            s.rel_error = s.measured == 0.0 ? 0.0 : kInf;
        else
            s.rel_error = std::abs(s.measured - v) / std::abs(v);
        errs.push_back(s.rel_error);
        rep.samples.push_back(s);
    }
    rep.median_error = median(errs);
    return rep;
}

double early_front_speed(const Trajectory& traj, int count)
{
    const std::size_t n = std::min<std::size_t>(std::max(count, 2), traj.snapshots.size());
    if (n < 2)
        throw DomainError("front speed needs at least two snapshots");
    std::vector<double> t, R;
    for (std::size_t k = 0; k < n; ++k) {
        t.push_back(traj.snapshots[k].t);
        R.push_back(traj.snapshots[k].diag.support_radius);
    }
    return ls_slope(t, R);
}

} // namespace stiffhs
