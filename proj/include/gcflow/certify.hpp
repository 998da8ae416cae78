#pragma once

#include <string>

#include "gcflow/curvature.hpp"
#include "gcflow/grid.hpp"
#include "gcflow/invariant_field.hpp"

namespace gcflow {

// Control functions on a snapshot grid:
//   phi1 = 2e·k(x,t0)t0²/(k(x,t)t²) + e/(k(x,t)t²)·∫_{t0}^t k²s² ds
//   phi2 = e(2 + ∫_{t0}^t k),  phi3 = m·e(2 + ∫ k),  phi4 = e(1 - 3a0·m·∫ k)
struct ControlEnvelope {
    double epsilon = 0.0, mu = 0.0, t0 = 0.0;
    double a0 = 0.0; // 2 + sup_x tail integral of k from t0
    std::vector<double> xs, ts;
    Field2<double> phi1, phi2, phi3, phi4;
    Field2<double> int_k; // ∫_{t0}^{ts[j]} k(x_i, s) ds, reused by reports

    size_t t_index(double t) const; // exact lookup with tolerance, throws if absent
};

ControlEnvelope control_envelope(const CurvatureProfile& prof, const std::vector<double>& xs,
                                 const std::vector<double>& ts, double epsilon, double mu,
                                 double t0);

struct BoundCheck {
    std::string name;
    bool ok = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_x = 0.0, worst_t = 0.0;
    size_t cells = 0;
    void fold(double margin, double x, double t) {
        ++cells;
        if (margin < worst_margin) {
            worst_margin = margin;
            worst_x = x;
            worst_t = t;
        }
        if (margin < 0.0) ok = false;
    }
};

struct CertificateReport {
    bool certified = false;
    bool has_envelope = false;
    double first_violation_time = std::numeric_limits<double>::infinity();
    BoundCheck sum_phi1{"abs(r+s) <= phi1"};
    BoundCheck diff_phi2{"abs(r-s) <= phi2"};
    BoundCheck tilde_phi3{"abs(r~),abs(s~) <= phi3"};
    BoundCheck sep_phi4{"r-s >= phi4"};
    double C_sum_kt = 0.0; // measured sup of |r+s| / (eps·k·t)
    double C_dt = 0.0;     // measured sup of |dr/dt|, |ds/dt| / (eps·(k + t|k_t|))
    std::vector<double> snapshot_ts;
    std::vector<double> m_phi1, m_phi2, m_phi3, m_phi4; // per-snapshot worst margins

    void write_csv(const std::string& path) const;
};

// Pointwise comparison of an evolution against the envelope, one-cell halo
// inside the valid mask. env may be null (no integrable-tail envelope exists,
// e.g. constant curvature): phi comparisons are skipped and the verdict comes
// from the invalidation log alone.
CertificateReport monitor_bounds(const Evolution& ev, const ControlEnvelope* env,
                                 const CurvatureProfile& prof);

// Growth bound init_max·exp(5Ht) for linear hyperbolic systems.
double hong_growth_bound(double H, double t, double init_max);

struct ThresholdPlan {
    double eta0 = 0.0;
    double mu = 0.0;
};

// Largest admissible data size for horizon T at coefficient bound H:
// eta0 = eps·exp(-30·H·T), mu = sqrt(eps).
ThresholdPlan threshold_plan(double T, double H, double epsilon);

// Smallest start time on a power-of-two ladder where the hypothesis report is
// clean, the remaining curvature tail integrates to at most 1, and k·t is at
// most 1. Throws std::domain_error when no rung up to 1024 qualifies.
double choose_t0(const CurvatureProfile& prof, double delta = 0.25);

} // namespace gcflow
