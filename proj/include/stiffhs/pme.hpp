#pragma once

#include "stiffhs/grid.hpp"
#include "stiffhs/model.hpp"
#include "stiffhs/scenario.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace stiffhs {

/// Outer boundary of the PME domain. Dirichlet data is a pressure given as a
/// function of time and is only available on 1D grids.
struct BoundaryCondition {
    enum class Kind { zero_flux, dirichlet };

    Kind kind = Kind::zero_flux;
    std::function<double(double)> pressure;

    static BoundaryCondition zero_flux() { return {}; }
    static BoundaryCondition dirichlet(std::function<double(double)> p) { return {Kind::dirichlet, std::move(p)}; }
};

struct SolverConfig {
    enum class Stepping { explicit_euler, semi_implicit };

    double cfl_safety = 0.4;
    double dt_cap = 1e-2;
    BoundaryCondition boundary;
    /// semi_implicit is reserved; selecting it raises ConfigError.
    Stepping stepping = Stepping::explicit_euler;

    static SolverConfig from(const SolverSettings& s);
};

/// Density on a grid plus the model parameters it evolves under.
struct PmeState {
    std::shared_ptr<const Grid> grid;
    std::vector<double> rho;
    double t = 0.0;
    double m = 2.0;
    GrowthLaw law;
    ExteriorDensity ext;

    long steps = 0;
    long clamped = 0;              // undershoots in [-1e-12, 0) set to zero
    double source_integral = 0.0;  // exact sum of dt * int rho G(p) over the steps taken
    double boundary_flux = 0.0;    // mass that entered through a Dirichlet wall

    PmeState() = default;
    PmeState(std::shared_ptr<const Grid> g, std::vector<double> density, double time, StiffnessParam m,
             GrowthLaw law, ExteriorDensity ext);

    std::vector<double> pressure() const;
    double max_density() const;

    /// Index box (inclusive) outside which rho vanishes identically.
    struct Window {
        int i0 = 0, i1 = -1, j0 = 0, j1 = -1;
        bool empty() const { return i1 < i0 || j1 < j0; }
    };
    Window window;
    double rho_max = 0.0;
    /// Recomputes window and rho_max; call after editing rho directly.
    void refresh_window();
};

/// Largest admissible step: cfl * min(dx^2 / (2n m max rho^{m-1}), 1 / (2 max |d(rho G(P(rho)))/drho|)).
double stable_dt(const PmeState& state, const SolverConfig& config);

/// One explicit step with the stable dt (capped by config.dt_cap).
void step(PmeState& state, const SolverConfig& config);
/// One explicit step of the given size; throws ConfigError if dt breaks the rule.
void step(PmeState& state, const SolverConfig& config, double dt);

/// The common stable step for several states advanced together.
double common_stable_dt(const std::vector<const PmeState*>& states, const SolverConfig& config);

/// max(P_m^{-1}(p0), rho^E_0 mollified at radius 1/m), with -Lap_h p0 = G(p0) in Omega_0.
std::vector<double> matched_initial_density(double m, const InitialRegion& omega0,
                                            const ExteriorProfile& rho0_ext, const GrowthLaw& law,
                                            const Grid& grid);

/// Discrete convolution of the sampled exterior profile with a normalised bump of radius `radius`.
std::vector<double> mollified_exterior(const Grid& grid, const ExteriorProfile& profile, double radius);

/// Samples of rho^E_0 at the cell centres.
std::vector<double> sample_exterior(const Grid& grid, const ExteriorProfile& profile);

/// m (1 - max)^m max|Lap_h rho^E_{0,m}|: the quantity the initial-data assumption sends to zero.
double initial_condition_product(const Grid& grid, const std::vector<double>& rho_ext_m, double m);

struct Diagnostics {
    double t = 0.0;
    double mass = 0.0;
    double max_p = 0.0;
    double support_radius = 0.0;
    double ab_min = std::numeric_limits<double>::infinity();
    double exterior_error = 0.0;
    double source_rate = 0.0; // int rho G(p) dx
};

Diagnostics diagnostics(const PmeState& state, double eps_support, double sigma,
                        std::optional<double> ghost_pressure = {});

/// Largest |x| with p > eps; sub-cell linear interpolation on 1D grids.
double support_radius(const Grid& grid, const std::vector<double>& p, double eps);

struct Snapshot {
    double t = 0.0;
    std::vector<double> rho;
    Diagnostics diag;
};

struct Trajectory {
    std::shared_ptr<const Grid> grid;
    double m = 2.0;
    GrowthLaw law;
    ExteriorDensity ext;
    std::vector<Snapshot> snapshots;
    std::vector<std::string> warnings;
    long steps = 0;
    long clamped = 0;
    double source_integral = 0.0;
    double boundary_flux = 0.0;
    double initial_product = 0.0;
    double min_dt = std::numeric_limits<double>::infinity();
    double max_dt = 0.0;
};

struct RunOptions {
    double eps_support = 1e-3;
    double sigma = 0.0;
};

/// Advances `state` through the schedule (times >= state.t), recording a snapshot at each.
Trajectory run_from(PmeState state, const std::vector<double>& times, const SolverConfig& config,
                    const RunOptions& options);

/// Advances several states with one shared dt per step (needed for exact discrete comparison).
std::vector<Trajectory> run_lockstep(std::vector<PmeState> states, const std::vector<double>& times,
                                     const SolverConfig& config, const RunOptions& options);

/// Matched initial data on the scenario grid, then run_from over the output schedule.
Trajectory run(const Scenario& scenario, double m, const SolverConfig& config);
Trajectory run(const Scenario& scenario, double m);

/// Initial state for a scenario at the given m (matched data, t = 0).
PmeState initial_state(const Scenario& scenario, double m, std::shared_ptr<const Grid> grid = nullptr);

/// Self-similar PME solution with G = 0 and the given total mass in R^n.
double barenblatt_exact(double x, double t, double m, double total_mass, int n);
/// Radius of the Barenblatt support at time t.
double barenblatt_radius(double t, double m, double total_mass, int n);

void write_snapshot_csv(std::ostream& os, const Trajectory& traj);
void write_diagnostics_csv(std::ostream& os, const Trajectory& traj);

} // namespace stiffhs
