#pragma once

#include <functional>
#include <vector>

namespace gcflow {

struct TailIntegral {
    double value = 0.0;           // finite part plus analytic tail where known
    double remainder_bound = 0.0; // bound on the truncated remainder
    bool finite = true;           // false when the tail provably diverges
};

// Adaptive Simpson with absolute tolerance; deterministic recursion order.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, int max_depth = 48);

// Cumulative integral of f along grid nodes, Simpson on each interval
// (midpoint sampled analytically). out[0] = 0.
std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        const std::vector<double>& nodes);

} // namespace gcflow
