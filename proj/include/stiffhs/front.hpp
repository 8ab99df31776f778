#pragma once

#include "stiffhs/elliptic.hpp"
#include "stiffhs/model.hpp"
#include "stiffhs/scenario.hpp"

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace stiffhs {

enum class EndpointKind {
    free,        // moves with V = g |p_r|
    symmetry,    // r = 0 of a ball component
    pinned,      // fixed radius carrying Dirichlet data b(t)
    domain_edge  // truncated outer wall
};

const char* to_string(EndpointKind kind);

/// One interval component [a, b] of the radial positive set {p > 0}.
struct FrontComponent {
    double a = 0.0;
    double b = 0.0;
    EndpointKind left = EndpointKind::free;
    EndpointKind right = EndpointKind::free;
    RadialProfile profile;
    double grad_left = 0.0;
    double grad_right = 0.0;
    VelocityCoefficient g_left;
    VelocityCoefficient g_right;
};

struct NucleationRecord {
    double a = 0.0;
    double b = 0.0;
    double time = 0.0;
};

struct FrontEvent {
    enum class Kind { move, nucleate, merge, saturate };

    double t = 0.0;
    Kind kind = Kind::move;
    int component = 0;
    double a = 0.0;
    double b = 0.0;
};

const char* to_string(FrontEvent::Kind kind);

/// Radial limit-problem state. Pinned data (for fixed-boundary runs) is carried here.
struct FrontState {
    double t = 0.0;
    int n = 2;
    double domain_radius = 1.0;
    int grid_points = 256;
    std::vector<FrontComponent> components;
    std::vector<NucleationRecord> nucleated;
    bool saturated = false;
    std::function<double(double)> pinned_value;

    /// Outermost free-boundary radius (0 when empty).
    double outer_radius() const;
    bool contains(double r) const;
    /// Positive-set measure in R^n.
    double volume() const;
};

/// Re-solves -Lap p = G(p) on every component and refreshes gradients and g at the endpoints.
void solve_profiles(FrontState& state, const GrowthLaw& law, const ExteriorDensity& ext);

/// Moves the free endpoints over [t, t + dt] by the integrated law
/// int (1 - min(1, rho^E)) dr = dt |p_r| (Heun corrector), merges overlaps, re-solves.
/// Throws std::logic_error if rho^E >= 1 at a moving endpoint (nucleation_scan was skipped).
void advance(FrontState& state, double dt, const GrowthLaw& law, const ExteriorDensity& ext,
             std::vector<FrontEvent>* events = nullptr);

/// Absorbs every radius where rho^E(., s) >= 1 for some s <= t_next; merged intervals are unioned.
void nucleation_scan(FrontState& state, const ExteriorDensity& ext, double t_next, const GrowthLaw& law,
                     std::vector<FrontEvent>* events = nullptr);

/// First time rho^E_0(r) e^{G(0) s} reaches 1 at radius r (infinity if never).
double absorption_time(const ExteriorDensity& ext, double r);

/// Per-step record of the outermost free endpoint.
struct FrontSample {
    double t = 0.0;
    double radius = 0.0;
    double gradient = 0.0;
    double g = 1.0;
};

struct FrontTrajectory {
    std::vector<FrontState> snapshots;
    std::vector<FrontSample> series;
    std::vector<FrontEvent> events;
    bool saturated = false;
    double saturation_time = 0.0;

    /// Outer radius interpolated in time from the per-step series.
    double radius_at(double t) const;
};

/// Checks {rho^E(., t) >= 1} inside the closure of the positive set on a fine radial sample.
bool exterior_invariant_holds(const FrontState& state, const ExteriorDensity& ext);

/// Initial components of a radial scenario's Omega_0.
FrontState initial_front(const Scenario& scenario);

FrontTrajectory run_front(const Scenario& scenario);

/// Run with explicit parameters (the scenario form forwards here).
FrontTrajectory run_front(FrontState state, const GrowthLaw& law, const ExteriorDensity& ext,
                          const std::vector<double>& output_times, double dt);

/// Radial solution with one endpoint pinned at R_fixed carrying boundary_value(t) > 0.
/// init_front > R_fixed: exterior mode (positive set R_fixed < r < R(t));
/// init_front < R_fixed: interior mode (positive set R(t) < r < R_fixed).
FrontTrajectory fixed_boundary_radial_solution(int n, double R_fixed, std::function<double(double)> boundary_value,
                                               double init_front, const ExteriorDensity& ext, double T,
                                               const GrowthLaw& law, double dt, int grid_points = 256,
                                               double domain_radius = 0.0);

void write_front_csv(std::ostream& os, const FrontTrajectory& traj);

} // namespace stiffhs
