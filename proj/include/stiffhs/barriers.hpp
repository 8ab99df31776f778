#pragma once

#include "stiffhs/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace stiffhs {

/// Point in R^n for n <= 3 (unused trailing coordinates are zero).
using Coord = std::array<double, 3>;

/// Explicit barrier functions from the uniqueness and boundedness arguments.
///  superbarrier_WT:      W_T = (g0/n)(R^2 e^{16 g0 t/n} - |x|^2)
///  subbarrier_expanding: w = alpha((c t + r)^2 - |x - x0|^2)
///  decay_supersolution:  phi = p_M + (M - p_M)_+ e^{-c(m-1)t/M}, spatially constant
struct BarrierSpec {
    enum class Kind { superbarrier_WT, subbarrier_expanding, decay_supersolution };

    Kind kind = Kind::superbarrier_WT;
    int n = 2;
    GrowthLaw law;
    double R = 0.0;
    double T = 0.0;
    double alpha = 0.0;
    double c = 0.0;
    double r = 0.0;
    Coord x0{0.0, 0.0, 0.0};
    double m = 0.0;
    double M = 0.0;
    /// Upper bound on g used for the superbarrier boundary inequality (g <= 2 where rho^E < 1/2).
    double g_upper = 2.0;
    double t_min = 0.0;
    double t_max = 1.0;

    double value(const Coord& x, double t) const;
    /// Radius of the zero level set about x0 at time t (infinite for the decay supersolution).
    double zero_radius(double t) const;
    std::string name() const;
};

BarrierSpec make_WT(double R, double T, int n, double g0);
BarrierSpec make_expanding_subbarrier(double r, const Coord& x0, const GrowthLaw& law, int n = 2);
BarrierSpec make_decay_supersolution(double m, double M, const GrowthLaw& law, double horizon = 1.0);

/// c = -max_{[0, M]} G'.
double decay_constant(const GrowthLaw& law, double M);

enum class BarrierRole { sub, super };

struct BarrierReport {
    std::string kind;
    std::string role;
    std::vector<std::pair<std::string, double>> params;
    double interior_margin = 0.0;
    double boundary_margin = 0.0; // +infinity when the barrier has no zero set
    long interior_samples = 0;
    long boundary_samples = 0;
    bool pass = false;

    /// JSON text of the report (numbers at full precision).
    std::string to_json() const;
};

/// Samples the two defining inequalities on low-discrepancy points of the validity window.
/// Interior: Lap phi + G(phi) > 0 (sub) or < 0 (super) on {phi > 0};
/// boundary: phi_t - g|D phi|^2 < 0 with g = 1 (sub) or > 0 with g = g_upper (super).
/// The decay supersolution is tested against the pressure equation instead.
BarrierReport verify_barrier(const BarrierSpec& spec, BarrierRole role, int sample_count = 10000);

/// Exact identities of W_T: max |-Lap_h W - 2 g0| and max |W_t / |DW|^2 - 4| on the zero set,
/// from finite differences of the evaluator at `sample_count` points.
struct IdentityCheck {
    double laplacian_error = 0.0;
    double ratio_error = 0.0;
    long samples = 0;
};
IdentityCheck check_WT_identities(const BarrierSpec& spec, int sample_count = 10000);

/// i-th point of the Halton sequence in the given prime base.
double halton(long index, int base);

} // namespace stiffhs
