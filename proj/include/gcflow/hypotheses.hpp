#pragma once

#include "gcflow/curvature.hpp"

namespace gcflow {

// Admissibility report for the slowly-decaying curvature regime.
// Clause H1: finite sup_x ∫ k dt, k = o(1/t), and ∂_t ln(k·t^{1+δ}) >= 0
//            beyond some onset T. A profile whose k·t^{1+δ} stays bounded
//            along the tail decays like t^{-(1+δ)} or faster; that is the
//            opposite regime and fails the clause here.
// Clause H2: bounded ∂_x ln k, ∂_x² ln k, t·∂_x∂_t ln k.
// Clause H3: positive inf_x ∫ k² dt on each time side.
struct HypothesisReport {
    double t0 = 0.0, delta = 0.25;

    TailIntegral integral_sup;
    bool integral_ok = false;

    double kt_end = 0.0; // k·t at the probe horizon
    double kt_tolerance = 0.05;
    bool kt_ok = false;

    double monotone_onset = 0.0;
    bool monotone_sampled_ok = false;
    bool fast_decay_regime = false;
    bool monotone_ok = false;

    bool h1_ok = false;

    double sup_dx_lnk = 0.0, sup_dxx_lnk = 0.0, sup_t_dxdt_lnk = 0.0;
    bool h2_ok = false;

    double h3_pos = 0.0, h3_neg = 0.0;
    bool h3_ok = false;
};

HypothesisReport check_hypotheses(const CurvatureProfile& p, double t0, double delta);

} // namespace gcflow
