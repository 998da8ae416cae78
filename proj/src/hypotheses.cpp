#include "gcflow/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gcflow {

namespace {

constexpr double kSlack = 1e-12;

std::vector<double> geometric_probe(double lo, double hi, double ratio = 1.1) {
    std::vector<double> ts;
    for (double t = std::max(lo, 0.25); t <= hi; t *= ratio) ts.push_back(t);
    return ts;
}

// d/dt ln(k t^{1+d}) = k_t/k + (1+d)/t, evaluated on the unmodulated base
// (an x-independent modulation factor cancels in k_t/k).
double monotone_derivative(const CurvatureProfile& p, double t, double d) {
    double kb = p.base(t);
    if (!(kb > 0.0)) return -std::numeric_limits<double>::infinity();
    return p.base_dt(t) / kb + (1.0 + d) / t;
}

} // namespace

HypothesisReport check_hypotheses(const CurvatureProfile& p, double t0, double delta) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("check_hypotheses: delta must lie in (0, 1/2)");
    if (t0 < p.domain().t_min) throw std::invalid_argument("check_hypotheses: t0 below domain");

    HypothesisReport r;
    r.t0 = t0;
    r.delta = delta;

    r.integral_sup = sup_integral_k(p, t0, std::numeric_limits<double>::infinity());
    r.integral_ok = r.integral_sup.finite && std::isfinite(r.integral_sup.value);

    double probe_end = std::min(p.domain().t_max, 1e6);
    std::vector<double> ts = geometric_probe(std::max(t0, 0.25), probe_end);

    r.kt_end = ts.empty() ? 0.0 : p.base(ts.back()) * p.mod_max() * ts.back();
    r.kt_ok = r.kt_end <= r.kt_tolerance;

    // onset of the monotone clause at the requested delta
    size_t onset = ts.size();
    for (size_t i = ts.size(); i-- > 0;) {
        if (monotone_derivative(p, ts[i], delta) >= -kSlack) onset = i;
        else break;
    }
    r.monotone_sampled_ok = onset < ts.size() && ts[onset] <= probe_end / 4.0;
    r.monotone_onset = onset < ts.size() ? ts[onset] : std::numeric_limits<double>::infinity();

    // opposite-regime probe: k·t^{1+delta} bounded along the tail means the
    // profile decays like t^{-(1+delta)} or faster. Measured as log-growth
    // across the last probe span so power-law tails read as flat.
    {
        double te = ts.empty() ? probe_end : ts.back();
        double ta = te / 16.0;
        double ka = p.base(ta), ke = p.base(te);
        if (ka > 0.0 && ke > 0.0) {
            double lg = std::log(ke) - std::log(ka) + (1.0 + delta) * std::log(te / ta);
            r.fast_decay_regime = lg < std::log(1.15);
        } else {
            r.fast_decay_regime = true;
        }
    }
    r.monotone_ok = r.monotone_sampled_ok && !r.fast_decay_regime;

    r.h1_ok = r.integral_ok && r.kt_ok && r.monotone_ok;

    // H2 sups sampled over the modulation scale and the probe times
    std::vector<double> xprobe{0.0};
    if (p.modulation().amplitude != 0.0) {
        double w = p.modulation().width;
        for (double u = -4.0; u <= 4.0; u += 0.25) xprobe.push_back(u * w);
    }
    for (double t : ts) {
        for (double x : xprobe) {
            if (x < p.domain().x_min || x > p.domain().x_max) continue;
            CurvatureSample s = eval_curvature(p, x, t);
            if (!(s.k > 0.0)) continue;
            double dx1 = s.k_x / s.k;
            double dxx = s.k_xx / s.k - dx1 * dx1;
            double dxdt = s.k_xt / s.k - s.k_x * s.k_t / (s.k * s.k);
            r.sup_dx_lnk = std::max(r.sup_dx_lnk, std::fabs(dx1));
            r.sup_dxx_lnk = std::max(r.sup_dxx_lnk, std::fabs(dxx));
            r.sup_t_dxdt_lnk = std::max(r.sup_t_dxdt_lnk, std::fabs(t * dxdt));
        }
    }
    r.h2_ok = std::isfinite(r.sup_dx_lnk) && std::isfinite(r.sup_dxx_lnk)
           && std::isfinite(r.sup_t_dxdt_lnk) && r.sup_dx_lnk < 1e3 && r.sup_dxx_lnk < 1e3
           && r.sup_t_dxdt_lnk < 1e3;

    // profiles are even in t by convention, so both sides share the value
    TailIntegral k2 = integral_base_k2(p, 0.0, std::numeric_limits<double>::infinity());
    double mmin = p.mod_min();
    r.h3_pos = k2.finite ? mmin * mmin * k2.value : std::numeric_limits<double>::infinity();
    r.h3_neg = r.h3_pos;
    r.h3_ok = r.h3_pos > 0.0 && r.h3_neg > 0.0;

    return r;
}

} // namespace gcflow
