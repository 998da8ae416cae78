#pragma once

#include <functional>
#include <stdexcept>

#include "gcflow/curvature.hpp"
#include "gcflow/invariant_field.hpp"
#include "gcflow/metric.hpp"
#include "gcflow/sources.hpp"

namespace gcflow {

struct CflViolation : std::runtime_error {
    double suggested_dt;
    CflViolation(double dt, double limit)
        : std::runtime_error("time step violates the CFL bound"), suggested_dt(dt) {
        (void)limit;
    }
};

struct SolveOptions {
    double cfl = 0.4;              // Courant number cap, must stay <= 0.5
    double dt_cap_scale = 0.05;    // dt <= dt_cap_scale * max(1, t)
    double dt_max_abs = std::numeric_limits<double>::infinity();
    double state_ceiling = 1e6;
    double hyperbolicity_floor = 1e-12;
    bool evolve_tilde = true;
    // Optional extra right-hand side (x, t) -> (into r eq, into s eq); used by
    // manufactured-solution tests to force an exact solution.
    std::function<std::pair<double, double>(double, double)> extra_source;
};

// Advance the field by one two-stage step (midpoint in time, direction-aware
// one-sided differences in x, speeds frozen at the predictor state). The valid
// mask erodes by exactly one cell per side; interior cells can also drop out by
// hyperbolicity or overflow, recorded into `events`. Throws CflViolation when
// dt * max_speed / dx exceeds the Courant cap.
void step_upwind(InvariantField& fld, const CurvatureProfile& prof, const MetricGrid& metric,
                 double dt, const SolveOptions& opt, std::vector<InvalidationEvent>* events);

// Largest characteristic speed |k*s|, |k*r| over valid cells.
double max_speed(const InvariantField& fld, const CurvatureProfile& prof);

// Evolve Cauchy data from fld.t to t_end, landing exactly on each snapshot
// time. The returned evolution holds one snapshot per requested time that was
// reached (plus the final state) and the invalidation log.
Evolution solve_cauchy(InvariantField fld, const CurvatureProfile& prof, const MetricGrid& metric,
                       double t_end, std::vector<double> snapshot_times, const SolveOptions& opt);

// Finite-difference r_tilde = (r-s)*r_x from a snapshot, for cross-checking the
// co-evolved derivative fields. One-sided at mask edges.
void tilde_from_differences(const InvariantField& fld, std::vector<double>& rt,
                            std::vector<double>& st);

enum class TildeMode { finite_difference, integrated };

// Either the co-evolved derivative fields or a fresh finite-difference
// reconstruction from the snapshot itself.
std::pair<std::vector<double>, std::vector<double>> compute_tilde(const InvariantField& fld,
                                                                  TildeMode mode);

} // namespace gcflow
