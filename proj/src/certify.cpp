#include "gcflow/certify.hpp"

#include <cmath>
#include <limits>

#include "gcflow/csv.hpp"
#include "gcflow/hypotheses.hpp"
#include "gcflow/quadrature.hpp"

namespace gcflow {

size_t ControlEnvelope::t_index(double t) const {
    for (size_t j = 0; j < ts.size(); ++j)
        if (std::fabs(ts[j] - t) <= 1e-9 * std::max(1.0, std::fabs(t))) return j;
    throw std::invalid_argument("envelope grid does not contain the requested time");
}

ControlEnvelope control_envelope(const CurvatureProfile& prof, const std::vector<double>& xs,
                                 const std::vector<double>& ts, double epsilon, double mu,
                                 double t0) {
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(mu > 0.0 && mu < 1.0))
        throw std::invalid_argument("epsilon and mu must lie in (0,1)");
    if (ts.empty() || ts.front() < t0 - 1e-12)
        throw std::invalid_argument("envelope grid must start at or after t0");

    TailIntegral tail = sup_integral_k(prof, t0,
                                       std::numeric_limits<double>::infinity());
    if (!tail.finite)
        throw std::domain_error("curvature tail integral diverges; no control envelope exists");

    ControlEnvelope env;
    env.epsilon = epsilon;
    env.mu = mu;
    env.t0 = t0;
    env.a0 = 2.0 + tail.value + tail.remainder_bound;
    env.xs = xs;
    env.ts = ts;
    const size_t nx = xs.size(), nt = ts.size();
    env.phi1 = Field2<double>(nx, nt);
    env.phi2 = Field2<double>(nx, nt);
    env.phi3 = Field2<double>(nx, nt);
    env.phi4 = Field2<double>(nx, nt);
    env.int_k = Field2<double>(nx, nt);

    // Quadrature nodes per column: t0 followed by the grid times.
    std::vector<double> nodes;
    nodes.reserve(nt + 1);
    nodes.push_back(t0);
    for (double t : ts) nodes.push_back(std::max(t, t0));

    for (size_t i = 0; i < nx; ++i) {
        const double x = xs[i];
        auto kf = [&](double s) { return eval_curvature(prof, x, s).k; };
        auto k2s2 = [&](double s) {
            double k = eval_curvature(prof, x, s).k;
            return k * k * s * s;
        };
        std::vector<double> ik = cumulative_integral(kf, nodes);
        std::vector<double> ik2s2 = cumulative_integral(k2s2, nodes);
        const double k_at_t0 = eval_curvature(prof, x, t0).k;
        for (size_t j = 0; j < nt; ++j) {
            const double t = ts[j];
            const double k = eval_curvature(prof, x, t).k;
            env.int_k.at(i, j) = ik[j + 1];
            env.phi1.at(i, j) = 2.0 * epsilon * k_at_t0 * t0 * t0 / (k * t * t) +
                                epsilon / (k * t * t) * ik2s2[j + 1];
            env.phi2.at(i, j) = epsilon * (2.0 + ik[j + 1]);
            env.phi3.at(i, j) = mu * epsilon * (2.0 + ik[j + 1]);
            env.phi4.at(i, j) = epsilon * (1.0 - 3.0 * env.a0 * mu * ik[j + 1]);
        }
    }
    return env;
}

CertificateReport monitor_bounds(const Evolution& ev, const ControlEnvelope* env,
                                 const CurvatureProfile& prof) {
    CertificateReport rep;
    rep.has_envelope = env != nullptr;
    if (!ev.events.empty()) rep.first_violation_time = ev.events.front().t;

    if (env) {
        const double eps = env->epsilon;
        for (const InvariantField& f : ev.snapshots) {
            if (f.t < env->t0 - 1e-12) continue;
            const size_t j = env->t_index(f.t);
            rep.snapshot_ts.push_back(f.t);
            double w1 = std::numeric_limits<double>::infinity(), w2 = w1, w3 = w1, w4 = w1;
            for (size_t i = 1; i + 1 < f.n(); ++i) {
                if (!f.valid[i - 1] || !f.valid[i] || !f.valid[i + 1]) continue;
                const double p1 = env->phi1.at(i, j), p2 = env->phi2.at(i, j);
                const double p3 = env->phi3.at(i, j), p4 = env->phi4.at(i, j);
                const double sum = f.r[i] + f.s[i], diff = f.r[i] - f.s[i];
                const double m1 = p1 - std::fabs(sum);
                const double m2 = p2 - std::fabs(diff);
                const double m3 =
                    p3 - std::max(std::fabs(f.r_tilde[i]), std::fabs(f.s_tilde[i]));
                const double m4 = diff - p4;
                rep.sum_phi1.fold(m1, f.xs[i], f.t);
                rep.diff_phi2.fold(m2, f.xs[i], f.t);
                rep.tilde_phi3.fold(m3, f.xs[i], f.t);
                rep.sep_phi4.fold(m4, f.xs[i], f.t);
                w1 = std::min(w1, m1);
                w2 = std::min(w2, m2);
                w3 = std::min(w3, m3);
                w4 = std::min(w4, m4);
                if (std::min(std::min(m1, m2), std::min(m3, m4)) < 0.0)
                    rep.first_violation_time = std::min(rep.first_violation_time, f.t);

                const double k = eval_curvature(prof, f.xs[i], f.t).k;
                if (k * f.t > 0.0)
                    rep.C_sum_kt = std::max(rep.C_sum_kt, std::fabs(sum) / (eps * k * f.t));
            }
            rep.m_phi1.push_back(w1);
            rep.m_phi2.push_back(w2);
            rep.m_phi3.push_back(w3);
            rep.m_phi4.push_back(w4);
        }

        // Time-derivative ratio from consecutive snapshots past t0.
        for (size_t a = 0; a + 1 < ev.snapshots.size(); ++a) {
            const InvariantField& f0 = ev.snapshots[a];
            const InvariantField& f1 = ev.snapshots[a + 1];
            if (f0.t < env->t0 - 1e-12) continue;
            const double dt = f1.t - f0.t;
            if (!(dt > 0.0)) continue;
            const double tm = 0.5 * (f0.t + f1.t);
            for (size_t i = 1; i + 1 < f0.n(); ++i) {
                bool ok = f0.valid[i - 1] && f0.valid[i] && f0.valid[i + 1] && f1.valid[i - 1] &&
                          f1.valid[i] && f1.valid[i + 1];
                if (!ok) continue;
                CurvatureSample cs = eval_curvature(prof, f0.xs[i], tm);
                const double scale = eps * (cs.k + tm * std::fabs(cs.k_t));
                if (!(scale > 0.0)) continue;
                const double dr = std::fabs(f1.r[i] - f0.r[i]) / dt;
                const double ds = std::fabs(f1.s[i] - f0.s[i]) / dt;
                rep.C_dt = std::max(rep.C_dt, std::max(dr, ds) / scale);
            }
        }
    }

    const bool phi_ok = !env || (rep.sum_phi1.ok && rep.diff_phi2.ok && rep.tilde_phi3.ok &&
                                 rep.sep_phi4.ok && rep.sum_phi1.cells > 0);
    rep.certified = phi_ok && ev.events.empty();
    return rep;
}

void CertificateReport::write_csv(const std::string& path) const {
    CsvWriter w(path, "t,margin_sum_phi1,margin_diff_phi2,margin_tilde_phi3,margin_sep_phi4");
    for (size_t j = 0; j < snapshot_ts.size(); ++j)
        w.row({snapshot_ts[j], m_phi1[j], m_phi2[j], m_phi3[j], m_phi4[j]});
}

double hong_growth_bound(double H, double t, double init_max) {
    if (H < 0.0) throw std::invalid_argument("H must be nonnegative");
    return init_max * std::exp(5.0 * H * t);
}

ThresholdPlan threshold_plan(double T, double H, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must be in (0,1)");
    ThresholdPlan p;
    p.eta0 = epsilon * std::exp(-30.0 * H * T);
    p.mu = std::sqrt(epsilon);
    return p;
}

double choose_t0(const CurvatureProfile& prof, double delta) {
    const double inf = std::numeric_limits<double>::infinity();
    for (double t0 = 1.0; t0 <= 1024.0; t0 *= 2.0) {
        HypothesisReport h = check_hypotheses(prof, t0, delta);
        if (!(h.h1_ok && h.h2_ok && h.h3_ok)) continue;
        TailIntegral tail = sup_integral_k(prof, t0, inf);
        if (!tail.finite || tail.value + tail.remainder_bound > 1.0) continue;
        if (eval_curvature(prof, 0.0, t0).k * t0 > 1.0) continue;
        return t0;
    }
    throw std::domain_error("no admissible certification start time on the ladder");
}

} // namespace gcflow
