#include "gcflow/upwind.hpp"

#include <algorithm>
#include <cmath>

#include "gcflow/csv.hpp"

namespace gcflow {

size_t InvariantField::count_valid() const {
    size_t c = 0;
    for (uint8_t v : valid) c += v;
    return c;
}

double InvariantField::sup_state() const {
    double m = 0.0;
    for (size_t i = 0; i < n(); ++i)
        if (valid[i]) m = std::max(m, std::max(std::fabs(r[i]), std::fabs(s[i])));
    return m;
}

double InvariantField::min_separation() const {
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n(); ++i)
        if (valid[i]) m = std::min(m, r[i] - s[i]);
    return m;
}

void InvariantField::write_csv(const std::string& path) const {
    CsvWriter w(path, "x,t,r,s,r_tilde,s_tilde,valid");
    for (size_t i = 0; i < n(); ++i)
        w.row({xs[i], t, r[i], s[i], r_tilde[i], s_tilde[i], valid[i] ? 1.0 : 0.0});
}

namespace {

// One-sided difference in the upwind direction; falls back to whichever side
// exists at a mask edge, centered average on a zero speed.
double upwind_diff(const std::vector<double>& v, const std::vector<uint8_t>& ok, size_t i,
                   double dx, double speed) {
    const size_t n = v.size();
    const bool has_l = i > 0 && ok[i - 1];
    const bool has_r = i + 1 < n && ok[i + 1];
    if (speed > 0.0) {
        if (has_l) return (v[i] - v[i - 1]) / dx;
        if (has_r) return (v[i + 1] - v[i]) / dx;
        return 0.0;
    }
    if (speed < 0.0) {
        if (has_r) return (v[i + 1] - v[i]) / dx;
        if (has_l) return (v[i] - v[i - 1]) / dx;
        return 0.0;
    }
    if (has_l && has_r) return (v[i + 1] - v[i - 1]) / (2.0 * dx);
    if (has_l) return (v[i] - v[i - 1]) / dx;
    if (has_r) return (v[i + 1] - v[i]) / dx;
    return 0.0;
}

struct StageCoeffs {
    std::vector<CellCoeffs> cc;
    std::vector<double> k;
};

StageCoeffs stage_coeffs(const InvariantField& fld, const CurvatureProfile& prof,
                         const MetricGrid& metric, double t) {
    MetricSlice sl = metric_slice(metric, prof, t);
    StageCoeffs out;
    out.cc.resize(fld.n());
    out.k.assign(fld.n(), 0.0);
    for (size_t i = 0; i < fld.n(); ++i) {
        if (!fld.valid[i]) continue;
        CurvatureSample cs = eval_curvature(prof, fld.xs[i], t);
        out.cc[i] =
            make_cell_coeffs(cs, sl.B[i], sl.B_t[i], sl.dx_lnB[i], sl.dxx_lnB[i], sl.dxdt_lnB[i]);
        out.k[i] = cs.k;
    }
    return out;
}

struct Rhs {
    double r = 0.0, s = 0.0, rt = 0.0, st = 0.0;
};

Rhs eval_rhs(size_t i, double x, double t, const std::vector<double>& r,
             const std::vector<double>& s, const std::vector<double>& rt,
             const std::vector<double>& st, const std::vector<uint8_t>& ok, double dx,
             const StageCoeffs& sc, const SolveOptions& opt) {
    const CellCoeffs& cc = sc.cc[i];
    const double lam_r = cc.c.k * s[i];
    const double lam_s = cc.c.k * r[i];
    Rhs out;
    SourcePair src = source_terms(r[i], s[i], cc.c);
    out.r = -lam_r * upwind_diff(r, ok, i, dx, lam_r) + src.f;
    out.s = -lam_s * upwind_diff(s, ok, i, dx, lam_s) + src.g;
    if (opt.extra_source) {
        auto ex = opt.extra_source(x, t);
        out.r += ex.first;
        out.s += ex.second;
    }
    if (opt.evolve_tilde) {
        SourceJacobian J = source_jacobian(r[i], s[i], cc.c);
        const double Q = source_quotient(r[i], s[i], cc.c);
        SourcePair dxs = source_x_derivs(r[i], s[i], cc);
        const double sep = r[i] - s[i];
        out.rt = -lam_r * upwind_diff(rt, ok, i, dx, lam_r) +
                 (Q + J.f_r - cc.k_x * s[i]) * rt[i] + J.f_s * st[i] + sep * dxs.f;
        out.st = -lam_s * upwind_diff(st, ok, i, dx, lam_s) + J.g_r * rt[i] +
                 (Q + J.g_s - cc.k_x * r[i]) * st[i] + sep * dxs.g;
    }
    return out;
}

} // namespace

double max_speed(const InvariantField& fld, const CurvatureProfile& prof) {
    double ms = 0.0;
    for (size_t i = 0; i < fld.n(); ++i) {
        if (!fld.valid[i]) continue;
        double k = eval_curvature(prof, fld.xs[i], fld.t).k;
        ms = std::max(ms, k * std::max(std::fabs(fld.r[i]), std::fabs(fld.s[i])));
    }
    return ms;
}

void step_upwind(InvariantField& fld, const CurvatureProfile& prof, const MetricGrid& metric,
                 double dt, const SolveOptions& opt, std::vector<InvalidationEvent>* events) {
    const size_t n = fld.n();
    if (n < 3) throw std::invalid_argument("need at least three grid cells");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    const double dx = fld.xs[1] - fld.xs[0];

    const double ms = max_speed(fld, prof);
    if (dt * ms / dx > opt.cfl * (1.0 + 1e-9))
        throw CflViolation(0.9 * opt.cfl * dx / ms, opt.cfl);

    const double t0 = fld.t, tm = fld.t + 0.5 * dt, tn = fld.t + dt;
    StageCoeffs sc0 = stage_coeffs(fld, prof, metric, t0);
    StageCoeffs scm = stage_coeffs(fld, prof, metric, tm);

    // Predictor: half step on every currently valid cell, so the corrector has
    // predictor values at both neighbors of every surviving cell.
    std::vector<double> rp = fld.r, sp = fld.s, rtp = fld.r_tilde, stp = fld.s_tilde;
    for (size_t i = 0; i < n; ++i) {
        if (!fld.valid[i]) continue;
        Rhs d = eval_rhs(i, fld.xs[i], t0, fld.r, fld.s, fld.r_tilde, fld.s_tilde, fld.valid, dx,
                         sc0, opt);
        rp[i] += 0.5 * dt * d.r;
        sp[i] += 0.5 * dt * d.s;
        rtp[i] += 0.5 * dt * d.rt;
        stp[i] += 0.5 * dt * d.st;
    }

    // Domain-of-dependence erosion: one cell per side per step.
    std::vector<uint8_t> nv(n, 0);
    for (size_t i = 1; i + 1 < n; ++i)
        nv[i] = fld.valid[i] && fld.valid[i - 1] && fld.valid[i + 1];

    // Hard stability bound against the predictor-state speeds.
    double msp = 0.0;
    for (size_t i = 0; i < n; ++i)
        if (nv[i] && std::isfinite(rp[i]) && std::isfinite(sp[i]))
            msp = std::max(msp, scm.k[i] * std::max(std::fabs(rp[i]), std::fabs(sp[i])));
    if (dt * msp / dx > 0.5 * (1.0 + 1e-9)) throw CflViolation(0.45 * dx / msp, 0.5);

    // Corrector: full step with midpoint coefficients, speeds and differences
    // from the predictor state.
    std::vector<double> rn = fld.r, sn = fld.s, rtn = fld.r_tilde, stn = fld.s_tilde;
    for (size_t i = 0; i < n; ++i) {
        if (!nv[i]) continue;
        Rhs d = eval_rhs(i, fld.xs[i], tm, rp, sp, rtp, stp, fld.valid, dx, scm, opt);
        rn[i] = fld.r[i] + dt * d.r;
        sn[i] = fld.s[i] + dt * d.s;
        rtn[i] = fld.r_tilde[i] + dt * d.rt;
        stn[i] = fld.s_tilde[i] + dt * d.st;
    }

    for (size_t i = 0; i < n; ++i) {
        if (!nv[i]) {
            if (fld.valid[i] && fld.cause[i] == static_cast<uint8_t>(CellCause::none))
                fld.cause[i] = static_cast<uint8_t>(CellCause::boundary);
            continue;
        }
        bool bad = !std::isfinite(rn[i]) || !std::isfinite(sn[i]) ||
                   std::max(std::fabs(rn[i]), std::fabs(sn[i])) > opt.state_ceiling;
        if (opt.evolve_tilde) bad = bad || !std::isfinite(rtn[i]) || !std::isfinite(stn[i]);
        if (bad) {
            nv[i] = 0;
            fld.cause[i] = static_cast<uint8_t>(CellCause::overflow);
            if (events) events->push_back({tn, fld.xs[i], CellCause::overflow});
            continue; // keep the last valid values for inspection
        }
        // Invalidate only on a downward crossing, so data sitting at or below
        // the floor from the start (the zero field) stays valid.
        const double old_sep = fld.r[i] - fld.s[i];
        const double new_sep = rn[i] - sn[i];
        if (old_sep > opt.hyperbolicity_floor && new_sep <= opt.hyperbolicity_floor) {
            nv[i] = 0;
            fld.cause[i] = static_cast<uint8_t>(CellCause::hyperbolicity);
            if (events) events->push_back({tn, fld.xs[i], CellCause::hyperbolicity});
            continue;
        }
        fld.r[i] = rn[i];
        fld.s[i] = sn[i];
        fld.r_tilde[i] = rtn[i];
        fld.s_tilde[i] = stn[i];
    }
    fld.valid = std::move(nv);
    fld.t = tn;
}

Evolution solve_cauchy(InvariantField fld, const CurvatureProfile& prof, const MetricGrid& metric,
                       double t_end, std::vector<double> snapshot_times, const SolveOptions& opt) {
    std::sort(snapshot_times.begin(), snapshot_times.end());
    Evolution ev;
    const double dx = fld.xs[1] - fld.xs[0];

    size_t next_snap = 0;
    auto emit_reached = [&] {
        while (next_snap < snapshot_times.size() &&
               fld.t >= snapshot_times[next_snap] - 1e-12 * std::max(1.0, fld.t)) {
            ev.snapshots.push_back(fld);
            ++next_snap;
        }
    };
    emit_reached();

    const size_t max_steps = 20'000'000;
    while (fld.t < t_end - 1e-12 && fld.count_valid() > 0) {
        if (ev.steps >= max_steps) throw std::runtime_error("step budget exhausted");
        double ms = max_speed(fld, prof);
        double dt = opt.dt_max_abs;
        if (ms > 0.0) dt = std::min(dt, opt.cfl * dx / ms);
        dt = std::min(dt, opt.dt_cap_scale * std::max(1.0, fld.t));
        double t_target = t_end;
        if (next_snap < snapshot_times.size())
            t_target = std::min(t_target, snapshot_times[next_snap]);
        if (fld.t + dt >= t_target - 1e-12 * std::max(1.0, t_target)) dt = t_target - fld.t;
        try {
            step_upwind(fld, prof, metric, dt, opt, &ev.events);
        } catch (const CflViolation& v) {
            dt = std::min(v.suggested_dt, 0.5 * dt);
            step_upwind(fld, prof, metric, dt, opt, &ev.events);
        }
        ++ev.steps;
        emit_reached();
    }
    ev.t_end = fld.t;
    if (ev.snapshots.empty() || ev.snapshots.back().t < fld.t - 1e-12 * std::max(1.0, fld.t))
        ev.snapshots.push_back(fld);
    ev.interior_survived = ev.events.empty();
    return ev;
}

void tilde_from_differences(const InvariantField& fld, std::vector<double>& rt,
                            std::vector<double>& st) {
    const size_t n = fld.n();
    const double dx = fld.xs[1] - fld.xs[0];
    rt.assign(n, 0.0);
    st.assign(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        if (!fld.valid[i]) continue;
        const double sep = fld.r[i] - fld.s[i];
        rt[i] = sep * upwind_diff(fld.r, fld.valid, i, dx, 0.0);
        st[i] = sep * upwind_diff(fld.s, fld.valid, i, dx, 0.0);
    }
}

std::pair<std::vector<double>, std::vector<double>> compute_tilde(const InvariantField& fld,
                                                                  TildeMode mode) {
    if (mode == TildeMode::integrated) return {fld.r_tilde, fld.s_tilde};
    std::vector<double> rt, st;
    tilde_from_differences(fld, rt, st);
    return {rt, st};
}

InvariantField make_field(std::vector<double> xs, const std::vector<double>& r0,
                          const std::vector<double>& s0) {
    InvariantField f;
    f.xs = std::move(xs);
    f.r = r0;
    f.s = s0;
    f.valid.assign(f.xs.size(), 1);
    f.cause.assign(f.xs.size(), 0);
    tilde_from_differences(f, f.r_tilde, f.s_tilde);
    return f;
}

} // namespace gcflow
