#include "stiffhs/barriers.hpp"

#include "stiffhs/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stiffhs {

namespace {

double sq_dist(const Coord& x, const Coord& y, int n)
{
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        s += (x[i] - y[i]) * (x[i] - y[i]);
    return s;
}

double bisect(auto&& f, double lo, double hi)
{
    // f(lo) > 0 > f(hi)
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Coord direction(long i, int n)
{
    const double u = halton(i, 5);
    const double v = halton(i, 7);
    if (n == 1)
        return {u < 0.5 ? -1.0 : 1.0, 0.0, 0.0};
    if (n == 2)
        return {std::cos(2.0 * std::numbers::pi * u), std::sin(2.0 * std::numbers::pi * u), 0.0};
    const double z = 2.0 * u - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(2.0 * std::numbers::pi * v), s * std::sin(2.0 * std::numbers::pi * v), z};
}

struct Derivs {
    double value = 0.0;
    double lap = 0.0;
    double grad2 = 0.0;
    double dt = 0.0;
};

// Central differences of the evaluator; hx large enough that round-off stays small
// (all barriers are quadratic in x, so the spatial stencils are exact).
Derivs differentiate(const BarrierSpec& s, const Coord& x, double t, double hx, double ht)
{
    Derivs d;
    d.value = s.value(x, t);
    for (int i = 0; i < s.n; ++i) {
        Coord a = x, b = x;
        a[i] += hx;
        b[i] -= hx;
        const double fa = s.value(a, t);
        const double fb = s.value(b, t);
        d.lap += (fa - 2.0 * d.value + fb) / (hx * hx);
        const double g = (fa - fb) / (2.0 * hx);
        d.grad2 += g * g;
    }
    auto central = [&](double h) { return (s.value(x, t + h) - s.value(x, t - h)) / (2.0 * h); };
    d.dt = (4.0 * central(0.5 * ht) - central(ht)) / 3.0;
    return d;
}

} // namespace

double halton(long index, int base)
{
    double f = 1.0;
    double r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

double BarrierSpec::value(const Coord& x, double t) const
{
    switch (kind) {
    case Kind::superbarrier_WT: {
        const double g0 = law(0.0);
        return g0 / n * (R * R * std::exp(16.0 * g0 * t / n) - sq_dist(x, {0.0, 0.0, 0.0}, n));
    }
    case Kind::subbarrier_expanding: {
        const double a = c * t + r;
        return alpha * (a * a - sq_dist(x, x0, n));
    }
    case Kind::decay_supersolution: {
        const double pm = law.p_max;
        const double cc = decay_constant(law, M);
        return pm + std::max(M - pm, 0.0) * std::exp(-cc * (m - 1.0) * t / M);
    }
    }
    return 0.0;
}

double BarrierSpec::zero_radius(double t) const
{
    switch (kind) {
    case Kind::superbarrier_WT: return R * std::exp(8.0 * law(0.0) * t / n);
    case Kind::subbarrier_expanding: return c * t + r;
    case Kind::decay_supersolution: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

std::string BarrierSpec::name() const
{
    switch (kind) {
    case Kind::superbarrier_WT: return "superbarrier_WT";
    case Kind::subbarrier_expanding: return "subbarrier_expanding";
    case Kind::decay_supersolution: return "decay_supersolution";
    }
    return "?";
}

BarrierSpec make_WT(double R, double T, int n, double g0)
{
    if (!(R > 0.0) || !(T > 0.0))
        throw DomainError("W_T needs R > 0 and T > 0");
    if (n < 1 || n > 3)
        throw DomainError("barriers are sampled in dimension 1..3");
    BarrierSpec s;
    s.kind = BarrierSpec::Kind::superbarrier_WT;
    s.n = n;
    s.law = GrowthLaw::constant(g0);
    s.R = R;
    s.T = T;
    s.t_min = 0.0;
    s.t_max = T;
    return s;
}

BarrierSpec make_expanding_subbarrier(double r, const Coord& x0, const GrowthLaw& law, int n)
{
    if (!(r > 0.0 && r < 1.0))
        throw DomainError("expanding subbarrier needs 0 < r < 1");
    if (n < 1 || n > 3)
        throw DomainError("barriers are sampled in dimension 1..3");
    if (!(law(0.0) > 0.0))
        throw DomainError("no admissible alpha: G(0) <= 0");

    auto fa = [&](double a) { return law(4.0 * a) - 2.0 * n * a; };
    double hi = 1.0;
    while (fa(hi) > 0.0 && hi < 1e12)
        hi *= 2.0;
    const double alpha = 0.5 * bisect(fa, 0.0, hi);
    if (!(fa(alpha) >= 1e-6))
        throw DomainError("no admissible alpha with margin 1e-6");

    auto fc = [&](double c) { return 2.0 * alpha * r * r - c * (c + r); };
    const double c = 0.5 * bisect(fc, 0.0, 1.0 + r);
    if (!(1.0 - c * (c + r) / (2.0 * alpha * r * r) >= 1e-6) || !(c > 0.0))
        throw DomainError("no admissible c with margin 1e-6");

    BarrierSpec s;
    s.kind = BarrierSpec::Kind::subbarrier_expanding;
    s.n = n;
    s.law = law;
    s.alpha = alpha;
    s.c = c;
    s.r = r;
    s.x0 = x0;
    s.g_upper = 1.0;
    s.t_min = 0.0;
    s.t_max = 1.0;
    return s;
}

double decay_constant(const GrowthLaw& law, double /*M*/)
{
    // Both forms have constant G'.
    return -law.derivative(0.0);
}

BarrierSpec make_decay_supersolution(double m, double M, const GrowthLaw& law, double horizon)
{
    StiffnessParam checked(m);
    if (!(M > 0.0))
        throw DomainError("decay supersolution needs M > 0");
    if (!(horizon > 0.0))
        throw DomainError("decay supersolution needs a positive horizon");
    BarrierSpec s;
    s.kind = BarrierSpec::Kind::decay_supersolution;
    s.n = 1;
    s.law = law;
    s.m = checked.value();
    s.M = M;
    s.c = decay_constant(law, M);
    s.t_min = 0.0;
    s.t_max = horizon;
    return s;
}

BarrierReport verify_barrier(const BarrierSpec& spec, BarrierRole role, int sample_count)
{
    if (sample_count < 1)
        throw DomainError("sample_count must be >= 1");
    if (!(spec.t_max > spec.t_min))
        throw DomainError("empty validity window");

    BarrierReport rep;
    rep.kind = spec.name();
    rep.role = role == BarrierRole::sub ? "sub" : "super";
    const double sign = role == BarrierRole::sub ? 1.0 : -1.0;
    const int n = spec.n;
    rep.interior_margin = std::numeric_limits<double>::infinity();
    rep.boundary_margin = std::numeric_limits<double>::infinity();

    switch (spec.kind) {
    case BarrierSpec::Kind::superbarrier_WT:
        rep.params = {{"R", spec.R}, {"T", spec.T}, {"n", n}, {"g0", spec.law(0.0)}, {"g_upper", spec.g_upper}};
        break;
    case BarrierSpec::Kind::subbarrier_expanding:
        rep.params = {{"alpha", spec.alpha}, {"c", spec.c}, {"r", spec.r}, {"n", n},
                      {"x0_0", spec.x0[0]}, {"x0_1", spec.x0[1]}, {"x0_2", spec.x0[2]}};
        break;
    case BarrierSpec::Kind::decay_supersolution:
        rep.params = {{"m", spec.m}, {"M", spec.M}, {"p_max", spec.law.p_max}, {"c", spec.c}};
        break;
    }

    const double span = spec.t_max - spec.t_min;
    const double ht = 1e-3 * std::max(span, 1e-3);
    for (long i = 1; i <= sample_count; ++i) {
        const double t = spec.t_min + halton(i, 2) * span;
        if (spec.kind == BarrierSpec::Kind::decay_supersolution) {
            const Coord x{0.0, 0.0, 0.0};
            const Derivs d = differentiate(spec, x, t, 0.1, ht);
            // Pressure equation: phi_t - (m-1) phi (Lap phi + G(phi)) - |D phi|^2.
            const double L = d.dt - (spec.m - 1.0) * d.value * (d.lap + spec.law(d.value)) - d.grad2;
            rep.interior_margin = std::min(rep.interior_margin, -sign * L);
            ++rep.interior_samples;
            continue;
        }
        const double Z = spec.zero_radius(t);
        const double hx = 0.1 * std::max(Z, 1e-3);
        const Coord dir = direction(i, n);
        const double s = std::pow(halton(i, 3), 1.0 / n);
        Coord xi{}, xb{};
        for (int k = 0; k < 3; ++k) {
            xi[k] = spec.x0[k] + (k < n ? Z * s * dir[k] : 0.0);
            xb[k] = spec.x0[k] + (k < n ? Z * dir[k] : 0.0);
        }
        const Derivs di = differentiate(spec, xi, t, hx, ht);
        if (di.value > 0.0) {
            rep.interior_margin = std::min(rep.interior_margin, sign * (di.lap + spec.law(di.value)));
            ++rep.interior_samples;
        }
        const Derivs db = differentiate(spec, xb, t, hx, ht);
        const double g = role == BarrierRole::sub ? 1.0 : spec.g_upper;
        rep.boundary_margin = std::min(rep.boundary_margin, -sign * (db.dt - g * db.grad2));
        ++rep.boundary_samples;
    }
    rep.pass = rep.interior_samples > 0 && rep.interior_margin > 0.0 && rep.boundary_margin > 0.0;
    return rep;
}

IdentityCheck check_WT_identities(const BarrierSpec& spec, int sample_count)
{
    if (spec.kind != BarrierSpec::Kind::superbarrier_WT)
        throw DomainError("identity check applies to W_T only");
    IdentityCheck out;
    const double g0 = spec.law(0.0);
    const double span = spec.t_max - spec.t_min;
    for (long i = 1; i <= sample_count; ++i) {
        const double t = spec.t_min + halton(i, 2) * span;
        const double Z = spec.zero_radius(t);
        const Coord dir = direction(i, spec.n);
        const double s = 1.5 * std::pow(halton(i, 3), 1.0 / spec.n);
        Coord xi{}, xb{};
        for (int k = 0; k < spec.n; ++k) {
            xi[k] = Z * s * dir[k];
            xb[k] = Z * dir[k];
        }
        const double hx = 0.1 * Z;
        const Derivs di = differentiate(spec, xi, t, hx, 1e-3);
        out.laplacian_error = std::max(out.laplacian_error, std::abs(-di.lap - 2.0 * g0));
        const Derivs db = differentiate(spec, xb, t, hx, 1e-3);
        out.ratio_error = std::max(out.ratio_error, std::abs(db.dt / db.grad2 - 4.0));
        ++out.samples;
    }
    return out;
}

std::string BarrierReport::to_json() const
{
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["role"] = role;
    nlohmann::ordered_json p = nlohmann::ordered_json::object();
    for (const auto& [k, v] : params)
        p[k] = v;
    j["params"] = p;
    j["interior_margin"] = interior_margin;
    if (std::isfinite(boundary_margin))
        j["boundary_margin"] = boundary_margin;
    else
        j["boundary_margin"] = nullptr;
    j["interior_samples"] = interior_samples;
    j["boundary_samples"] = boundary_samples;
    j["pass"] = pass;
    return j.dump(2);
}

} // namespace stiffhs
