// Acceptance checks: one PASS/FAIL line per criterion; exit status is the failure count.

#include "stiffhs/barriers.hpp"
#include "stiffhs/cli_io.hpp"
#include "stiffhs/errors.hpp"
#include "stiffhs/front.hpp"
#include "stiffhs/harness.hpp"
#include "stiffhs/pme.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace stiffhs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body)
{
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass)
        ++failures;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

fs::path config(const char* name) { return fs::path(STIFFHS_CONFIG_DIR) / name; }

Scenario standard_radial() { return parse_scenario(config("standard_radial.json")).scenario; }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs of the standard radial scenario shared by the mass, monotonicity and AB checks.
struct StandardRuns {
    Trajectory m40, m80;
    double seconds40 = 0.0, seconds80 = 0.0;
};

const StandardRuns& standard_runs()
{
    static const StandardRuns runs = [] {
        StandardRuns r;
        const auto s = standard_radial();
        auto t0 = std::chrono::steady_clock::now();
        r.m40 = run(s, 40.0);
        r.seconds40 = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        r.m80 = run(s, 80.0);
        r.seconds80 = seconds_since(t0);
        return r;
    }();
    return runs;
}

// Trapezoid in time of the snapshot source rates int rho G(p) dx.
double source_quadrature(const Trajectory& tr)
{
    double s = 0.0;
    for (std::size_t k = 1; k < tr.snapshots.size(); ++k)
        s += 0.5 * (tr.snapshots[k].t - tr.snapshots[k - 1].t) *
             (tr.snapshots[k].diag.source_rate + tr.snapshots[k - 1].diag.source_rate);
    return s;
}

} // namespace

int main()
{
    std::setvbuf(stdout, nullptr, _IOLBF, 0);

    report(1, "Barenblatt oracle (1D, m=2, G off, 400 cells, t in [0.5, 1])", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const double m = 2.0, M = 1.0;
        auto grid = std::make_shared<const Grid>(Grid::slab(2.5, 5.0 / 400));
        std::vector<double> rho(grid->size());
        for (std::size_t k = 0; k < rho.size(); ++k)
            rho[k] = barenblatt_exact(grid->position(k)[0], 0.5, m, M, 1);
        PmeState st(grid, rho, 0.5, StiffnessParam(m), GrowthLaw::off(), {});
        std::vector<double> times;
        for (int k = 0; k <= 10; ++k)
            times.push_back(0.5 + 0.05 * k);
        const auto tr = run_from(st, times, SolverConfig{}, {1e-6, 0.0});
        double worst = 0.0;
        for (const auto& snap : tr.snapshots) {
            double num = 0.0, den = 0.0;
            for (std::size_t k = 0; k < rho.size(); ++k) {
                const double ex = barenblatt_exact(grid->position(k)[0], snap.t, m, M, 1);
                num += std::abs(snap.rho[k] - ex);
                den += ex;
            }
            worst = std::max(worst, num / den);
        }
        const double secs = seconds_since(t0);
        return Outcome{worst < 1e-2 && secs < 10.0,
                       fmt("max relative L1 error %.3g (< 1e-2), runtime %.2f s (< 10 s)", worst, secs)};
    });

    report(2, "Mass balance with source (standard radial scenario)", [] {
        const auto& r = standard_runs();
        double worst_q = 0.0, worst_ledger = 0.0;
        for (const Trajectory* tr : {&r.m40, &r.m80}) {
            const double m0 = tr->snapshots.front().diag.mass, m1 = tr->snapshots.back().diag.mass;
            worst_q = std::max(worst_q, std::abs(m1 - m0 - source_quadrature(*tr)) / m0);
            worst_ledger = std::max(worst_ledger, std::abs(m1 - m0 - tr->source_integral) / m0);
        }
        const double secs = std::max(r.seconds40, r.seconds80);
        return Outcome{worst_q < 1e-3 && worst_ledger < 1e-3 && secs < 30.0,
                       fmt("snapshot-quadrature defect %.3g, per-step ledger defect %.3g (< 1e-3), "
                           "runtime %.2f s per run (< 30 s)",
                           worst_q, worst_ledger, secs)};
    });

    report(3, "Monotonicity with matched data (m = 40, 80)", [] {
        const auto& r = standard_runs();
        const double a = time_monotonicity(r.m40), b = time_monotonicity(r.m80);
        return Outcome{a >= -1e-10 && b >= -1e-10, fmt("min rho(t+) - rho(t): m=40 %.3g, m=80 %.3g (>= -1e-10)", a, b)};
    });

    report(4, "L1 contraction (m = 40, two perturbed data)", [] {
        const auto s = standard_radial();
        const auto a = initial_state(s, 40.0);
        Scenario other = s;
        other.omega0 = InitialRegion::ball(0.9);
        other.rho0_ext = ExteriorProfile::plateau(0.25, 2.2, 3.0);
        const auto b = initial_state(other, 40.0, a.grid);
        const auto runs = run_lockstep({a, b}, s.output.times, SolverConfig::from(s.solver),
                                       {s.epsilon_support(), s.sup_radius()});
        const auto c = l1_contraction_check(runs[0], runs[1]);
        return Outcome{c.max_ratio <= 1.01, fmt("max ratio %.6f (<= 1.01)", c.max_ratio)};
    });

    report(5, "Aronson-Benilan lower bound for t >= 0.1 (m = 40, 80)", [] {
        const auto& r = standard_runs();
        const double g0 = standard_radial().growth(0.0);
        double worst = 1e300;
        double at_m = 0.0, at_t = 0.0;
        for (const Trajectory* tr : {&r.m40, &r.m80})
            for (const auto& snap : tr->snapshots) {
                if (snap.t < 0.1 - 1e-12)
                    continue;
                const double slack = snap.diag.ab_min + 1.0 / ((tr->m - 1.0) * snap.t) + 0.1 * g0;
                if (slack < worst) {
                    worst = slack;
                    at_m = tr->m;
                    at_t = snap.t;
                }
            }
        return Outcome{worst >= 0.0, fmt("min of Lap_h p + G(p) + 1/((m-1)t) + 0.1 g0 = %.3g at m=%g t=%g (>= 0)",
                                         worst, at_m, at_t)};
    });

    report(6, "Front closed form R0 exp(g0 t / n) (n=2, dt=1e-3)", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto p = parse_scenario(config("front_closed_form.json"));
        const auto tr = run_front(p.scenario);
        const double R = tr.snapshots.back().outer_radius();
        const double exact = std::exp(p.scenario.growth(0.0) * 1.0 / 2.0);
        const double rel = std::abs(R / exact - 1.0);
        const double secs = seconds_since(t0);
        return Outcome{rel < 5e-3 && secs < 5.0 && tr.snapshots.back().t == 1.0,
                       fmt("R(1) = %.9f vs %.9f, rel error %.3g (< 5e-3), runtime %.2f s (< 5 s)", R, exact, rel,
                           secs)};
    });

    report(7, "Stiff-limit convergence sweep m = 10, 20, 40, 80", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto p = parse_scenario(config("sweep_constant.json"));
        SweepOptions o;
        o.margin = p.params.sweep_margin;
        o.scenario_hash = p.hash;
        const auto rep = m_sweep(p.scenario, o);
        const auto& last = rep.summary.back();
        const double secs = seconds_since(t0);
        const bool ok = rep.radius_trend_ok && last.m == 80.0 && last.radius_error < 0.05 && last.inner_error < 0.02 &&
                        last.outer_error < 0.05 && rep.eval_time == 0.5 && secs < 300.0;
        std::string trend;
        for (const auto& s : rep.summary)
            trend += fmt("%s%.3g", trend.empty() ? "" : " > ", s.radius_error);
        return Outcome{ok, fmt("radius errors %s (trend %s), at m=80 t=0.5: radius %.3g (< 0.05), "
                               "inner |rho-1| %.3g (< 0.02), outer |rho-rho^E| %.3g (< 0.05); runtime %.1f s (< 300 s)",
                               trend.c_str(), rep.radius_trend_ok ? "nonincreasing" : "NOT monotone",
                               last.radius_error, last.inner_error, last.outer_error, secs)};
    });

    report(8, "Velocity acceleration: rho^E_0 = 0.5 vs 0 at m = 80", [] {
        const auto half = parse_scenario(config("velocity_half.json")).scenario;
        const auto zero = parse_scenario(config("velocity_zero.json")).scenario;
        const double vh = early_front_speed(run(half, 80.0));
        const double vz = early_front_speed(run(zero, 80.0));
        const double ratio = vh / vz;
        return Outcome{ratio >= 1.8 && ratio <= 2.2,
                       fmt("early speeds %.4f / %.4f, ratio %.4f (in [1.8, 2.2])", vh, vz, ratio)};
    });

    report(9, "Nucleation at t* = ln(1/0.95), g = infinity regime", [] {
        const auto p = parse_scenario(config("nucleation.json"));
        const auto& s = p.scenario;
        const auto tr = run_front(s);
        const double tstar = std::log(1.0 / 0.95) / s.growth(0.0);
        bool invariant = true;
        for (const auto& snap : tr.snapshots)
            invariant = invariant && exterior_invariant_holds(snap, s.exterior());
        const bool in_step = tr.saturated && tr.saturation_time >= tstar - 1e-12 &&
                             tr.saturation_time <= tstar + s.front.dt + 1e-12;
        return Outcome{in_step && invariant,
                       fmt("saturated at t = %.6f, t* = %.6f, step %.0e; invariant at every output: %s",
                           tr.saturation_time, tstar, s.front.dt, invariant ? "yes" : "no")};
    });

    report(10, "Barrier identities and verification", [] {
        const auto p = parse_scenario(config("barriers.json"));
        const auto& cp = p.params;
        const auto& law = p.scenario.growth;
        const auto wt = make_WT(cp.wt_radius, cp.wt_horizon, 2, law(0.0));
        const auto id = check_WT_identities(wt, 10000);
        const auto sub = verify_barrier(make_expanding_subbarrier(cp.sub_radius, {0.0, 0.0, 0.0}, law, 2),
                                        BarrierRole::sub, 10000);
        const auto dec = verify_barrier(make_decay_supersolution(cp.decay_m.value_or(40.0), cp.decay_M, law, 1.0),
                                        BarrierRole::super, 10000);
        const auto neg = verify_barrier(wt, BarrierRole::sub, 10000);
        const bool ok = id.samples == 10000 && id.laplacian_error <= 1e-9 && id.ratio_error <= 1e-9 && sub.pass &&
                        sub.interior_margin > 0 && sub.boundary_margin > 0 && dec.pass && dec.interior_margin > 0 &&
                        !neg.pass;
        return Outcome{ok, fmt("W_T |Lap+2g0| %.2g, |ratio-4| %.2g (<= 1e-9, %ld pts); subbarrier margins %.3g/%.3g; "
                               "decay margin %.3g; W_T as sub %s",
                               id.laplacian_error, id.ratio_error, id.samples, sub.interior_margin,
                               sub.boundary_margin, dec.interior_margin, neg.pass ? "PASSED (bad)" : "rejected")};
    });

    report(11, "Discrete comparison, nested data (m = 40)", [] {
        const auto s = standard_radial();
        const auto big = initial_state(s, 40.0);
        Scenario small = s;
        small.omega0 = InitialRegion::ball(0.8);
        const auto little = initial_state(small, 40.0, big.grid);
        const auto runs = run_lockstep({little, big}, s.output.times, SolverConfig::from(s.solver),
                                       {s.epsilon_support(), s.sup_radius()});
        const auto c = comparison_check(runs[0], runs[1]);
        return Outcome{c.holds, fmt("worst violation %.3g (<= 1e-12) over %zu snapshots", c.worst_violation,
                                    runs[0].snapshots.size())};
    });

    report(12, "Perimeter diagnostic on a 2D expanding disc", [] {
        auto p = parse_scenario(config("perimeter_disc.json"));
        auto coarse = p.scenario;
        auto fine = coarse;
        fine.geometry.dx = 0.5 * coarse.geometry.dx;
        const double eps = p.params.perimeter_eps.value_or(coarse.epsilon_support());
        const double m = coarse.m_list.front();
        const double g0 = coarse.growth(0.0);
        const auto pc = perimeter_series(run(coarse, m), eps);
        const auto pf = perimeter_series(run(fine, m), 0.5 * eps);
        double worst = 0.0;
        for (const auto* ps : {&pc, &pf})
            for (std::size_t k = 0; k < ps->t.size(); ++k) {
                const double R = coarse.omega0.outer_radius * std::exp(g0 * ps->t[k] / 2.0);
                worst = std::max(worst, std::abs(ps->perimeter[k] / (2.0 * std::numbers::pi * R) - 1.0));
            }
        const double shrink = pc.band_measure / pf.band_measure;
        return Outcome{worst < 0.1 && shrink >= 1.5,
                       fmt("max |perimeter / 2 pi R - 1| %.3g (< 0.1); band measure %.3g -> %.3g, factor %.2f (>= 1.5)",
                           worst, pc.band_measure, pf.band_measure, shrink)};
    });

    report(13, "Determinism: byte-identical CSV across two CLI runs", [] {
        const fs::path root = fs::temp_directory_path() / "stiffhs_acceptance_determinism";
        fs::remove_all(root);
        const std::string cfg = config("standard_radial.json").string();
        int codes = 0;
        for (const char* sub : {"a", "b"}) {
            const std::string cmd = std::string(STIFFHS_CLI) + " pme-run --config " + cfg + " --out " +
                                    (root / sub).string() + " --m-list 40 > /dev/null 2>&1";
            codes += std::system(cmd.c_str()) != 0;
        }
        int compared = 0, differing = 0;
        if (codes == 0)
            for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
                if (e.path().extension() != ".csv")
                    continue;
                const fs::path twin = root / "b" / fs::relative(e.path(), root / "a");
                ++compared;
                differing += !fs::exists(twin) || slurp(e.path()) != slurp(twin);
            }
        fs::remove_all(root);
        return Outcome{codes == 0 && compared >= 2 && differing == 0,
                       fmt("%d CSV files compared, %d differ (exit failures: %d)", compared, differing, codes)};
    });

    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
