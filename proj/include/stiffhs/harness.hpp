#pragma once

#include "stiffhs/front.hpp"
#include "stiffhs/grid.hpp"
#include "stiffhs/pme.hpp"
#include "stiffhs/scenario.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace stiffhs {

/// One (m, t) row of the sweep error tables.
struct SweepRow {
    double m = 0.0;
    double t = 0.0;
    double reference_radius = 0.0;
    double pme_radius = 0.0;
    double radius_error = 0.0;   // |R_m - R| / R
    double inner_error = 0.0;    // sup |rho_m - 1| on K_in
    double outer_error = 0.0;    // sup |rho_m - rho^E| on K_out
    double pressure_error = 0.0; // sup |p_m - p| on K_in
    double ab_min = 0.0;
    long inner_cells = 0;
    long outer_cells = 0;
};

struct SweepSummary {
    double m = 0.0;
    double radius_error = 0.0; // at the evaluation time
    double inner_error = 0.0;
    double outer_error = 0.0;
    double pressure_error = 0.0;
    double monotone_min = 0.0; // min over snapshots of rho(t_{k+1}) - rho(t_k)
    double ab_min = 0.0;       // min over snapshots with t >= 0.1
    double initial_product = 0.0;
    std::optional<double> contraction_max; // rho_b(0) = 0.99 rho_a(0)
    long steps = 0;
    double min_dt = 0.0;
    std::vector<std::string> warnings;
};

struct SweepReport {
    std::string scenario_hash;
    std::string grid;
    double dx = 0.0;
    double margin = 0.0;
    double eval_time = 0.0;
    double eps_support = 0.0;
    bool growth_flagged = false; // constant-test law (violates G' < 0)
    std::vector<double> m_list;
    std::vector<SweepRow> rows;
    std::vector<SweepSummary> summary;
    std::optional<double> smallest_monotone_m;
    /// Error columns nonincreasing over the last two m-increments.
    bool radius_trend_ok = false;
    bool inner_trend_ok = false;
    bool outer_trend_ok = false;
    std::vector<std::string> notes;

    std::string to_json() const;
    void write_csv(std::ostream& os) const;
};

struct SweepOptions {
    std::optional<double> margin; // default 4 dx
    std::optional<double> eval_time; // default: last output time
    int threads = 0;                 // 0: one per m
    bool contraction = true;         // also run a perturbed copy per m
    std::string scenario_hash;
};

/// Runs the PME at every m of the scenario and compares with the radial front reference.
SweepReport m_sweep(const Scenario& scenario, const SweepOptions& options = {});

/// Cellwise min of rho(t_{k+1}) - rho(t_k) over consecutive snapshots (+inf for one snapshot).
double time_monotonicity(const Trajectory& traj);

struct ContractionSeries {
    std::vector<double> t;
    std::vector<double> ratio;
    double max_ratio = 0.0;
    bool flagged = false; // some ratio > 1 + 1e-2
};

/// ||rho_a(t) - rho_b(t)||_1 / (e^{G(0)(t - t0)} ||rho_a(t0) - rho_b(t0)||_1).
ContractionSeries l1_contraction_check(const Trajectory& a, const Trajectory& b);

struct ComparisonResult {
    bool holds = false;
    double worst_violation = 0.0; // max (rho_a - rho_b)_+
};

enum class ComparisonMode {
    strict, // initial ordering is a precondition (domain error otherwise)
    audit   // initial snapshot is checked like every other one
};

/// True iff rho_a <= rho_b + 1e-12 at every snapshot.
ComparisonResult comparison_check(const Trajectory& a, const Trajectory& b,
                                  ComparisonMode mode = ComparisonMode::strict);

struct PerimeterSeries {
    std::vector<double> t;
    std::vector<double> perimeter;
    std::vector<double> band_area; // measure of {eps/2 < p < 2 eps}
    double band_measure = 0.0;     // trapezoid in time of band_area
};

/// Radial grids: sum of sphere areas at the interpolated eps-crossings;
/// box2d: marching-squares length of the eps contour through the cell centres.
PerimeterSeries perimeter_series(const Trajectory& traj, double eps);

/// Marching-squares length of {f = level} on a box grid (cell centres as vertices).
double contour_length(const Grid& grid, const std::vector<double>& f, double level);

struct VelocitySample {
    double t = 0.0;
    double radius = 0.0;
    double measured = 0.0;  // least-squares slope of the PME support radius
    double reference = 0.0; // g |p_r| of the reference at equal radius
    double rel_error = 0.0;
};

struct VelocityLawReport {
    std::vector<VelocitySample> samples;
    double median_error = 0.0;
};

/// PME front speed (5-snapshot least-squares window) against g |p_r| at equal radius.
VelocityLawReport velocity_law_error(const Trajectory& pme, const FrontTrajectory& front);

/// Least-squares slope of the support radius over the first `count` snapshots.
double early_front_speed(const Trajectory& traj, int count = 5);

/// Median of a sample (empty: 0).
double median(std::vector<double> v);

} // namespace stiffhs
