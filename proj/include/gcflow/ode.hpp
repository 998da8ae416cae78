#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gcflow/curvature.hpp"
#include "gcflow/metric.hpp"

namespace gcflow {

// B(t), B_t(t) along one x-column, either analytic or grid-interpolated.
struct MetricColumn {
    std::function<double(double)> B, B_t;

    static MetricColumn constant_k(double k0); // cosh/sinh closed form
    static MetricColumn from_grid(const MetricGrid& m, const CurvatureProfile& p, size_t col);
};

// Everything the x-independent invariant ODE needs along one column.
struct OdeSystem {
    std::function<double(double)> k, k_t, B, B_t;

    static OdeSystem constant_k(double k0);
    static OdeSystem from_profile(const CurvatureProfile& p, double x, MetricColumn col);
};

struct OdeOptions {
    double dt = 1e-3;
    double state_ceiling = 1e6;       // |w|+|z| beyond this counts as blown up
    double hyperbolicity_floor = 1e-12; // w-z at or below this counts as degenerate
    bool halfstep_check = true;       // embedded half-step comparison
    double step_tol = 1e-4;           // relative; trips a refinement request
};

struct OdeTrajectory {
    std::vector<double> ts, ws, zs, dws, dzs; // states and their time derivatives
    std::vector<double> ks, Bs, Bts;
    bool stopped_early = false;
    double t_stop = 0.0;
    std::string stop_reason; // "", "state_ceiling", "hyperbolicity_floor"

    void eval(double t, double& w, double& z) const; // cubic Hermite between nodes
    void write_csv(const std::string& path) const;   // t,w,z,w_plus_z,w_minus_z,k,B,B_t
};

struct StepRefinementRequest : std::runtime_error {
    double suggested_dt;
    explicit StepRefinementRequest(double dt)
        : std::runtime_error("ode step too large, refine"), suggested_dt(dt) {}
};

OdeTrajectory integrate_riemann_ode(const OdeSystem& sys, double w0, double z0, double t_end,
                                    const OdeOptions& opt = {});

struct ClosedForm {
    bool valid = false; // radicand positive
    double w = 0.0, z = 0.0;
    double radicand = 0.0;
};

// Special solution of the x-independent system for constant initial data.
ClosedForm closed_form_special_solution(double w0, double z0, double B, double Bp, double k,
                                        double k0);

// Product law for X = wz of the same special solution.
double closed_form_product(double w0, double z0, double B, double Bp, double k, double k0);

struct BlowupReport {
    bool blew_up = false;
    double t_star = 0.0;
    std::string mechanism; // "radicand_root", "state_ceiling", "hyperbolicity_floor", "none"
    double sup_state = 0.0;
};

// Locates loss of the special solution: bisection on the closed-form radicand
// root, cross-checked by direct integration when requested.
BlowupReport detect_blowup(const OdeSystem& sys, double w0, double z0, double t_max,
                           const OdeOptions& opt = {});

enum class ToyModel { full, scalar };

struct ToyReport {
    bool global = false;
    double t_star = 0.0;
    double sup_state = 0.0;
    bool integral_k_finite = false;    // sup_x ∫ k dt
    bool integral_k2t_finite = false;  // ∫ k² t dt
    OdeTrajectory trajectory;
};

ToyReport integrate_toy_model(ToyModel model, const CurvatureProfile& p, const OdeSystem& sys,
                              double w0, double z0, double t_end, const OdeOptions& opt = {});

} // namespace gcflow
