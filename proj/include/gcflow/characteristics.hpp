#pragma once

#include "gcflow/upwind.hpp"

namespace gcflow {

// Backward characteristic triangle under an apex: left edge follows the faster
// family (speed k*r), right edge the slower one (speed k*s), both integrated
// backward in time through the recorded evolution.
struct CharTriangle {
    double apex_x = 0.0, apex_t = 0.0;
    std::vector<double> taus;        // ascending, taus.front() = t0, back() = apex_t
    std::vector<double> left, right; // left[i] <= right[i]
    double base_lo = 0.0, base_hi = 0.0;
    double H = 0.0;      // sup over the triangle of |a_ij|, |dx lambda_i|, |dx a_ij|
    bool truncated = false; // a curve left the valid region before reaching t0

    double width_at_base() const { return base_hi - base_lo; }
};

// Bilinear sample of (r, s) from the snapshot stack; ok=false outside the
// valid region or the snapshot time range.
bool sample_invariants(const Evolution& ev, double x, double t, double& r, double& s);

CharTriangle characteristic_triangle(const Evolution& ev, const CurvatureProfile& prof,
                                     const MetricGrid& metric, double x_star, double t_star,
                                     double t0, size_t n_levels = 160);

} // namespace gcflow
