#pragma once

#include "gcflow/characteristics.hpp"
#include "gcflow/curvature.hpp"
#include "gcflow/invariant_field.hpp"
#include "gcflow/metric.hpp"

namespace gcflow {

// Region split by the parabola-like barrier t0(x) = R(1+x^2): omega1 below it
// (the Cauchy region), omega2 above it (covered through the polar chart).
struct OmegaDomain {
    double R = 1.0;
    enum class Side { omega1, omega2 };
    Side side = Side::omega1;

    double t0(double x) const { return R * (1.0 + x * x); }
    double t0_prime(double x) const { return 2.0 * R * x; }
    // |t0'| / (t0 + R), the boundary-slope ratio entering h2; maximal at
    // |x| = sqrt(2) with value sqrt(2)/2, independent of R.
    double slope_ratio(double x) const { return std::fabs(t0_prime(x)) / (t0(x) + R); }
};

std::pair<OmegaDomain, OmegaDomain> build_domains(double R);

// Bilinear sample of the polar metric; false outside the grid or the valid
// rows of the bracketing theta columns.
bool polar_sample(const PolarMetricGrid& g, double theta, double rho, double& G, double& G_rho);

// Chart change (x,t) -> (rho, theta) with slope variable Phi, advanced per
// column by dr/dt = tanh(Phi), dtheta/dt = xi/(G cosh Phi),
// dPhi/dt = (G_rho/G) along the path. Jacobian entries stored alongside:
// rho_t = tanh Phi, theta_t = xi/(G cosh Phi), rho_x = -xi B / cosh Phi,
// theta_x = (B/G) tanh Phi.
struct TransformField {
    std::vector<double> xs, ts;
    Field2<double> rho, theta, Phi;
    Field2<double> rho_t, rho_x, theta_t, theta_x;
    std::vector<double> xi;         // per column, +-1 (0 marks the skipped axis column)
    std::vector<size_t> valid_rows; // per column
    bool sandwich_ok = true;        // t, |x|/2 <= rho <= t+|x| and t+|x| <= 3 rho
    double worst_sandwich_margin = std::numeric_limits<double>::infinity();

    size_t col(double x) const; // exact node lookup
    // Linear interpolation inside one column; false past its valid rows.
    bool sample(size_t i, double t, double& rho_v, double& theta_v, double& Phi_v) const;
    void write_csv(const std::string& path) const;
};

TransformField coordinate_transform(const MetricGrid& metric, const CurvatureProfile& geo,
                                    const PolarMetricGrid& polar);

// One pushforward sample: invariants carried to the polar chart by the
// differential of the transform.
struct PushforwardPoint {
    double x = 0.0, t = 0.0;
    double theta = 0.0, rho = 0.0;
    double rbar = 0.0, sbar = 0.0;
    double sep_identity = 0.0; // (k_geo/k_polar)*B(r-s)/(G*Dr*Ds)
    bool ok = false;
};

struct PushforwardField {
    std::vector<PushforwardPoint> pts;
    double max_route_mismatch = 0.0; // |(rbar-sbar) - sep_identity| over ok points
    size_t excluded = 0;             // near-singular denominators
};

PushforwardPoint pushforward_point(double x, double t, double r, double s, double B,
                                   double rho_v, double theta_v, double rho_t, double rho_x,
                                   double theta_t, double theta_x, double k_geo, double k_polar,
                                   double G);

PushforwardField pushforward_invariants(const InvariantField& fld, const TransformField& tf,
                                        const MetricGrid& metric, const PolarMetricGrid& polar,
                                        const CurvatureProfile& geo, const CurvatureProfile& pol);

// Initial-data envelope construction: h1 dominates the coefficient sups over
// omega1, h2 adds the boundary-slope ratio, and eta is the displayed integral
// of exp(-30(t0+R)h1 - z^2)/(8pi (t0+R) h2). The integrand underflows any
// floating-point range, so eta is carried in log space and exposed through the
// normalized shape eta/eta(0).
struct EtaConstruction {
    double sigma = 0.0, R = 0.0;
    std::vector<double> zetas;
    std::vector<double> h1, h2;
    std::vector<double> log_eta;
    std::vector<double> eta_hat;
    double log_eta0 = 0.0;
    double tail_truncation_log = -std::numeric_limits<double>::infinity();

    double h1_at(double zeta) const;
    double h2_at(double zeta) const;
    double log_integrand(double zeta) const; // ln of the eta integrand
    double eval_hat(double x) const;         // even, normalized shape
};

EtaConstruction construct_initial_eta(double sigma, const OmegaDomain& om1,
                                      const MetricGrid& metric, const CurvatureProfile& prof,
                                      double zeta_max, size_t n_zeta);

// Traces of the pushed-forward invariants along the barrier t = t0(x), with
// magnitude/separation/slope bounds and the space-like inequalities of both
// boundary branches.
struct BoundaryTraceReport {
    std::vector<double> xs, rhos, thetas, rbars, sbars, dth_rbar, dth_sbar;
    double epsilon = 0.0, mu = 0.0;
    bool mag_ok = false, sep_ok = false, slope_ok = false, spacelike_ok = false;
    double worst_mag_margin = std::numeric_limits<double>::infinity();
    double worst_sep_margin = std::numeric_limits<double>::infinity();
    double worst_slope_margin = std::numeric_limits<double>::infinity();
    double worst_spacelike_margin = std::numeric_limits<double>::infinity();
    double min_separation = std::numeric_limits<double>::infinity();
    size_t skipped = 0;

    void write_csv(const std::string& path) const;
};

BoundaryTraceReport boundary_trace_check(const Evolution& ev, const TransformField& tf,
                                         const MetricGrid& metric, const PolarMetricGrid& polar,
                                         const CurvatureProfile& geo, const CurvatureProfile& pol,
                                         const OmegaDomain& om2, double epsilon, double mu,
                                         const std::vector<double>& xs_sample);

} // namespace gcflow
