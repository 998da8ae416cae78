#include "gcflow/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "gcflow/certify.hpp"
#include "gcflow/csv.hpp"
#include "gcflow/gluing.hpp"
#include "gcflow/hypotheses.hpp"
#include "gcflow/immersion.hpp"
#include "gcflow/metric.hpp"
#include "gcflow/ode.hpp"
#include "gcflow/upwind.hpp"

namespace gcflow {

CurvatureProfile make_profile(const ProfileConfig& pc) {
    CurvatureProfile p = CurvatureProfile::log_example();
    if (pc.kind == "constant") p = CurvatureProfile::constant(pc.k0);
    else if (pc.kind == "power") p = CurvatureProfile::power(pc.c, pc.delta);
    else if (pc.kind == "log_example") p = CurvatureProfile::log_example();
    else if (pc.kind == "efimov") p = CurvatureProfile::efimov();
    else throw std::invalid_argument("unknown profile kind '" + pc.kind + "'");
    if (pc.mod_amplitude != 0.0) {
        XModulation m;
        m.amplitude = pc.mod_amplitude;
        m.width = pc.mod_width;
        p = p.with_modulation(m);
    }
    return p;
}

std::vector<double> shaped_data(const std::vector<double>& xs, double amp, double width,
                                double offset) {
    if (!(width > 0.0)) throw std::invalid_argument("data width must be positive");
    if (!(offset >= 0.0 && offset <= 1.0))
        throw std::invalid_argument("data offset must lie in [0, 1]");
    std::vector<double> v(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        double u = xs[i] / width;
        v[i] = amp * (offset + (1.0 - offset) * std::exp(-u * u));
    }
    return v;
}

const StageStatus* RunReport::stage(const std::string& name) const {
    for (const StageStatus& s : stages)
        if (s.name == name) return &s;
    return nullptr;
}

bool RunReport::has_constant(const std::string& key) const {
    for (const Measured& m : constants)
        if (m.key == key) return true;
    return false;
}

double RunReport::constant(const std::string& key) const {
    for (const Measured& m : constants)
        if (m.key == key) return m.value;
    throw std::out_of_range("report has no constant '" + key + "'");
}

namespace {

std::string hex16(uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

std::string RunReport::text() const {
    std::ostringstream o;
    o << "[stages]\n";
    for (const StageStatus& s : stages) {
        o << s.name << " = " << s.status;
        if (!s.message.empty()) o << " : " << s.message;
        o << "\n";
    }
    o << "\n[constants]\n";
    for (const Measured& m : constants) o << m.key << " = " << fmt_double(m.value) << "\n";
    o << "\n[manifest]\n";
    for (const ManifestEntry& e : manifest)
        o << e.name << " = " << hex16(e.digest) << " : " << e.bytes << "\n";
    o << "\n[verdict]\n";
    o << "violation = " << (violation ? "true" : "false") << "\n";
    o << "errored = " << (errored ? "true" : "false") << "\n";
    return o.str();
}

void RunReport::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << text();
}

namespace {

struct Ctx {
    ExperimentConfig cfg;
    RunOptions opt;
    std::string out;
    CurvatureProfile prof = CurvatureProfile::log_example();
    CurvatureProfile pol = CurvatureProfile::log_example(); // polar chart, no modulation
    std::vector<double> xs;
    std::vector<double> snap_ts;
    double t_begin = 0.0;
    double t_end = 0.0; // grid.t_max, extended to t_begin + horizon when certifying
    double eps = 0.0, mu_eff = 0.0;
    double sigma_eff = 1.0;
    bool sigma_resolved = false;
    bool certifying = false;

    std::optional<MetricGrid> metric;
    std::optional<Evolution> ev;
    std::optional<ControlEnvelope> env;
    std::string env_note;
    std::optional<CertificateReport> cert;
    std::optional<PolarMetricGrid> polar;
    std::optional<TransformField> tf;
    std::optional<ImmersionMesh> mesh;

    RunReport rep;

    void put(const std::string& key, double v) { rep.constants.push_back({key, v}); }
    std::string path(const std::string& name) const { return out + "/" + name; }
    void emit(const std::string& name) {
        rep.manifest.push_back({name, fnv1a64_file(path(name)),
                                size_t(std::filesystem::file_size(path(name)))});
    }
};

size_t nearest_col(const std::vector<double>& xs, double x) {
    size_t i = lower_index(xs, x);
    return (std::fabs(xs[i + 1] - x) < std::fabs(xs[i] - x)) ? i + 1 : i;
}

std::vector<double> build_xs(const GridConfig& g, double scale) {
    double dx = g.dx / scale;
    size_t n = size_t(std::llround((g.x_max - g.x_min) / dx)) + 1;
    return linspace(g.x_min, g.x_max, std::max<size_t>(n, 2));
}

void ensure_metric(Ctx& c) {
    if (c.metric) return;
    double t_cov = c.t_end * 1.05 + 1.0;
    c.metric = solve_gauss_equation(c.prof, c.xs, time_grid(t_cov, 0.05, 1.0, 1.05), 0.01);
}

void ensure_polar(Ctx& c) {
    if (c.polar) return;
    ensure_metric(c);
    double xspan = std::max(std::fabs(c.cfg.grid.x_min), std::fabs(c.cfg.grid.x_max));
    double rho_max = c.metric->ts.back() + xspan + 1.0;
    c.polar = solve_polar_gauss(c.pol, linspace(-2.2, M_PI + 2.2, 257),
                                time_grid(rho_max, 0.02, 1.0, 1.04), 0.02);
}

OdeTrajectory ode_with_retries(const OdeSystem& sys, double w0, double z0, double t_end,
                               OdeOptions oo) {
    for (int attempt = 0; attempt < 10; ++attempt) {
        try {
            return integrate_riemann_ode(sys, w0, z0, t_end, oo);
        } catch (const StepRefinementRequest& r) {
            oo.dt = std::min(r.suggested_dt, 0.5 * oo.dt);
        }
    }
    throw std::runtime_error("ode step refinement did not settle");
}

Evolution do_solve(Ctx& c, double sigma) {
    std::vector<double> r0 =
        shaped_data(c.xs, sigma * c.cfg.data.size, c.cfg.data.width, c.cfg.data.offset);
    std::vector<double> s0(r0.size());
    for (size_t i = 0; i < r0.size(); ++i) s0[i] = -r0[i];
    InvariantField fld = make_field(c.xs, r0, s0);
    fld.t = c.t_begin;
    SolveOptions so;
    so.cfl = c.cfg.scheme.cfl;
    so.dt_cap_scale = c.cfg.scheme.dt_cap_scale;
    return solve_cauchy(fld, c.prof, *c.metric, c.t_end, c.snap_ts, so);
}

CertificateReport do_certify(Ctx& c, const Evolution& ev, std::optional<ControlEnvelope>& env,
                             std::string& note) {
    env.reset();
    note.clear();
    try {
        if (!(c.t_begin > 0.0))
            throw std::domain_error("certification needs a positive start time");
        env = control_envelope(c.prof, c.xs, c.snap_ts, c.eps, c.mu_eff, c.t_begin);
    } catch (const std::exception& e) {
        note = e.what();
    }
    return monitor_bounds(ev, env ? &*env : nullptr, c.prof);
}

void resolve_sigma(Ctx& c) {
    if (c.sigma_resolved) return;
    c.sigma_resolved = true;
    if (c.cfg.gluing.sigma) {
        c.sigma_eff = *c.cfg.gluing.sigma;
        return;
    }
    // auto: largest halving of the data scale whose run certifies
    for (int m = 0; m <= 12; ++m) {
        double s = std::ldexp(1.0, -m);
        Evolution ev = do_solve(c, s);
        std::optional<ControlEnvelope> env;
        std::string note;
        CertificateReport cr = do_certify(c, ev, env, note);
        if (cr.certified) {
            c.sigma_eff = s;
            c.ev = std::move(ev);
            c.env = std::move(env);
            c.env_note = note;
            c.cert = std::move(cr);
            return;
        }
    }
    throw std::runtime_error("data-scale bisection failed: no sigma in [2^-12, 1] certifies");
}

void ensure_evolution(Ctx& c) {
    ensure_metric(c);
    if (c.ev) return;
    resolve_sigma(c);
    if (!c.ev) c.ev = do_solve(c, c.sigma_eff);
}

Evolution crop_to_common_valid(const Evolution& ev) {
    const InvariantField& f0 = ev.snapshots.front();
    size_t n = f0.n();
    std::vector<uint8_t> all(n, 1);
    for (const InvariantField& f : ev.snapshots)
        for (size_t i = 0; i < n; ++i) all[i] = all[i] && f.valid[i];
    size_t best_i = 0, best_len = 0;
    for (size_t i = 0; i < n;) {
        if (!all[i]) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < n && all[j]) ++j;
        if (j - i > best_len) {
            best_len = j - i;
            best_i = i;
        }
        i = j;
    }
    Evolution out;
    out.t_end = ev.t_end;
    out.steps = ev.steps;
    out.interior_survived = ev.interior_survived;
    out.events = ev.events;
    for (const InvariantField& f : ev.snapshots) {
        InvariantField g;
        g.t = f.t;
        auto slice = [&](const std::vector<double>& v) {
            return std::vector<double>(v.begin() + best_i, v.begin() + best_i + best_len);
        };
        g.xs = slice(f.xs);
        g.r = slice(f.r);
        g.s = slice(f.s);
        g.r_tilde = slice(f.r_tilde);
        g.s_tilde = slice(f.s_tilde);
        g.valid.assign(f.valid.begin() + best_i, f.valid.begin() + best_i + best_len);
        g.cause.assign(f.cause.begin() + best_i, f.cause.begin() + best_i + best_len);
        out.snapshots.push_back(std::move(g));
    }
    return out;
}

bool stage_check(Ctx& c, StageStatus& st) {
    double t0 = c.cfg.certify.t0 ? *c.cfg.certify.t0 : 1.0;
    if (!c.cfg.certify.t0) {
        try {
            t0 = choose_t0(c.prof);
        } catch (const std::domain_error&) {
            t0 = 1.0; // report against the first rung; clauses will say why
        }
    }
    HypothesisReport h = check_hypotheses(c.prof, t0, 0.25);
    {
        std::ofstream o(c.path("hypotheses.txt"), std::ios::binary);
        if (!o) throw std::runtime_error("cannot open " + c.path("hypotheses.txt"));
        o << "t0 = " << fmt_double(h.t0) << "\n";
        o << "delta = " << fmt_double(h.delta) << "\n";
        o << "integral_sup = " << fmt_double(h.integral_sup.value) << "\n";
        o << "integral_finite = " << (h.integral_sup.finite ? "true" : "false") << "\n";
        o << "integral_ok = " << (h.integral_ok ? "true" : "false") << "\n";
        o << "kt_end = " << fmt_double(h.kt_end) << "\n";
        o << "kt_ok = " << (h.kt_ok ? "true" : "false") << "\n";
        o << "monotone_onset = " << fmt_double(h.monotone_onset) << "\n";
        o << "monotone_ok = " << (h.monotone_ok ? "true" : "false") << "\n";
        o << "h1_ok = " << (h.h1_ok ? "true" : "false") << "\n";
        o << "h2_ok = " << (h.h2_ok ? "true" : "false") << "\n";
        o << "h3_ok = " << (h.h3_ok ? "true" : "false") << "\n";
    }
    c.emit("hypotheses.txt");
    c.put("check.t0", t0);
    c.put("check.integral_sup", h.integral_sup.value);
    c.put("check.kt_end", h.kt_end);
    bool ok = h.h1_ok && h.h2_ok && h.h3_ok;
    if (ok) {
        st.message = "curvature admissible, t0 = " + fmt_double(t0);
    } else {
        std::string fails;
        if (!h.integral_ok) fails += " H1-integral";
        if (!h.kt_ok) fails += " H1-kt";
        if (!h.monotone_ok) fails += " H1-monotone";
        if (!h.h2_ok) fails += " H2";
        if (!h.h3_ok) fails += " H3";
        st.message = "failed:" + fails;
        c.rep.violation = true;
    }
    return ok;
}

bool stage_solve_ode(Ctx& c, StageStatus& st) {
    OdeSystem sys;
    if (c.cfg.profile.kind == "constant" && c.cfg.profile.mod_amplitude == 0.0) {
        sys = OdeSystem::constant_k(c.cfg.profile.k0);
    } else {
        ensure_metric(c);
        size_t col = nearest_col(c.xs, 0.0);
        sys = OdeSystem::from_profile(c.prof, c.xs[col],
                                      MetricColumn::from_grid(*c.metric, c.prof, col));
    }
    double w0 = c.cfg.data.size, z0 = -c.cfg.data.size;
    OdeOptions oo;
    BlowupReport br = detect_blowup(sys, w0, z0, c.t_end, oo);
    // keep the resolved trajectory clear of the singularity
    double t_traj = br.blew_up ? std::min(c.t_end, 0.98 * br.t_star) : c.t_end;
    OdeTrajectory tr = ode_with_retries(sys, w0, z0, t_traj, oo);
    tr.write_csv(c.path("trajectory.csv"));
    c.emit("trajectory.csv");
    if (br.sup_state > 0.0) c.put("ode.sup_state", br.sup_state);
    if (br.blew_up) {
        c.put("ode.t_star", br.t_star);
        c.rep.violation = true;
        st.message = "blowup at t = " + fmt_double(br.t_star) + " (" + br.mechanism + ")";
    } else {
        st.message = "no blowup through t = " + fmt_double(c.t_end);
    }
    return true;
}

bool stage_solve_pde(Ctx& c, StageStatus& st) {
    ensure_evolution(c);
    c.metric->write_csv(c.path("metric.csv"));
    c.emit("metric.csv");
    {
        CsvWriter w(c.path("snapshots.csv"), "x,t,r,s,r_tilde,s_tilde,valid");
        for (const InvariantField& f : c.ev->snapshots)
            for (size_t i = 0; i < f.n(); ++i)
                w.raw_row({fmt_double(f.xs[i]), fmt_double(f.t), fmt_double(f.r[i]),
                           fmt_double(f.s[i]), fmt_double(f.r_tilde[i]), fmt_double(f.s_tilde[i]),
                           std::to_string(int(f.valid[i]))});
    }
    c.emit("snapshots.csv");
    c.put("pde.sigma", c.sigma_eff);
    c.put("pde.steps", double(c.ev->steps));
    c.put("pde.events", double(c.ev->events.size()));
    if (!c.ev->events.empty()) {
        c.rep.violation = true;
        c.put("pde.first_invalidation_time", c.ev->first_invalidation_time());
        st.message = "interior invalidation from t = " + fmt_double(c.ev->first_invalidation_time());
    } else {
        st.message = "interior intact to t = " + fmt_double(c.ev->t_end);
    }
    return true;
}

bool stage_certify(Ctx& c, StageStatus& st) {
    ensure_evolution(c);
    if (!c.cert) c.cert = do_certify(c, *c.ev, c.env, c.env_note);
    c.cert->write_csv(c.path("certificate.csv"));
    c.emit("certificate.csv");
    c.put("certify.epsilon", c.eps);
    c.put("certify.mu", c.mu_eff);
    c.put("certify.t0", c.t_begin);
    if (c.env) c.put("certify.a0", c.env->a0);
    c.put("certify.C_sum_kt", c.cert->C_sum_kt);
    c.put("certify.C_dt", c.cert->C_dt);
    if (std::isfinite(c.cert->first_violation_time))
        c.put("certify.first_violation_time", c.cert->first_violation_time);
    bool horizon_reached = c.ev->t_end >= c.t_end - 1e-9 * std::max(1.0, c.t_end);
    if (c.cert->certified && horizon_reached) {
        st.message = "certified to t = " + fmt_double(c.ev->t_end);
        return true;
    }
    if (c.cert->certified) {
        c.rep.violation = true;
        st.message = "bounds held but the valid region was exhausted at t = " +
                     fmt_double(c.ev->t_end) + "; widen the x range";
        return false;
    }
    c.rep.violation = true;
    if (!c.cert->has_envelope) {
        st.message = "no envelope: " + c.env_note;
    } else {
        std::string bad;
        for (const BoundCheck* b :
             {&c.cert->sum_phi1, &c.cert->diff_phi2, &c.cert->tilde_phi3, &c.cert->sep_phi4})
            if (!b->ok) bad += (bad.empty() ? "" : "; ") + b->name;
        if (!c.ev->events.empty()) bad += (bad.empty() ? "" : "; ") + std::string("invalidation");
        st.message = "lost: " + bad;
        if (std::isfinite(c.cert->first_violation_time))
            st.message += " at t = " + fmt_double(c.cert->first_violation_time);
    }
    return false;
}

bool stage_glue(Ctx& c, StageStatus& st) {
    ensure_evolution(c);
    auto domains = build_domains(c.cfg.gluing.R);
    const OmegaDomain& om1 = domains.first;
    const OmegaDomain& om2 = domains.second;
    double hi = std::max(std::fabs(c.cfg.gluing.window_lo), std::fabs(c.cfg.gluing.window_hi));
    if (om2.t0(hi) > c.t_end + 1e-9)
        throw std::runtime_error("barrier t0(x) leaves the run horizon; raise grid.t_max to " +
                                 fmt_double(om2.t0(hi)));
    if (om2.t0(0.0) < c.t_begin - 1e-9)
        throw std::runtime_error("barrier t0(0) = " + fmt_double(om2.t0(0.0)) +
                                 " precedes the solve start " + fmt_double(c.t_begin));
    ensure_polar(c);
    if (!c.tf) c.tf = coordinate_transform(*c.metric, c.prof, *c.polar);
    c.tf->write_csv(c.path("transform.csv"));
    c.emit("transform.csv");

    double ge = c.cfg.gluing.epsilon;
    double gm = c.cfg.gluing.mu ? *c.cfg.gluing.mu : std::sqrt(ge);
    size_t ns = std::max<size_t>(2, c.cfg.gluing.boundary_samples);
    // trace sampling is column-exact, so snap the window targets to grid nodes
    std::vector<double> xs_s;
    for (double target : linspace(c.cfg.gluing.window_lo, c.cfg.gluing.window_hi, ns)) {
        for (double sgn : {-1.0, 1.0}) {
            double snapped = c.xs[nearest_col(c.xs, sgn * target)];
            if (std::fabs(snapped) < 1e-12) continue; // the axis column carries no trace
            xs_s.push_back(snapped);
        }
    }
    std::sort(xs_s.begin(), xs_s.end());
    xs_s.erase(std::unique(xs_s.begin(), xs_s.end()), xs_s.end());
    BoundaryTraceReport tr =
        boundary_trace_check(*c.ev, *c.tf, *c.metric, *c.polar, c.prof, c.pol, om2, ge, gm, xs_s);
    tr.write_csv(c.path("boundary.csv"));
    c.emit("boundary.csv");

    // data envelope shape, where the metric horizon allows it
    double zcap = std::sqrt(std::max(c.metric->ts.back() / om1.R - 1.0, 0.0)) * 0.999;
    zcap = std::min(zcap, c.cfg.grid.x_max);
    if (zcap >= 1.2) {
        EtaConstruction eta = construct_initial_eta(c.sigma_eff, om1, *c.metric, c.prof, zcap, 48);
        CsvWriter w(c.path("eta.csv"), "zeta,h1,h2,log_eta,eta_hat");
        for (size_t i = 0; i < eta.zetas.size(); ++i) {
            double le = i < eta.log_eta.size() ? eta.log_eta[i] : -1e308;
            double eh = i < eta.eta_hat.size() ? eta.eta_hat[i] : 0.0;
            w.row({eta.zetas[i], eta.h1[i], eta.h2[i], le, eh});
        }
        c.put("glue.log_eta0", eta.log_eta0);
        c.emit("eta.csv");
    }

    c.put("glue.sandwich_margin", c.tf->worst_sandwich_margin);
    c.put("glue.mag_margin", tr.worst_mag_margin);
    c.put("glue.sep_margin", tr.worst_sep_margin);
    c.put("glue.slope_margin", tr.worst_slope_margin);
    c.put("glue.spacelike_margin", tr.worst_spacelike_margin);
    c.put("glue.min_separation", tr.min_separation);
    c.put("glue.skipped", double(tr.skipped));
    bool ok = c.tf->sandwich_ok && tr.mag_ok && tr.slope_ok && tr.spacelike_ok && tr.skipped == 0;
    if (!ok) c.rep.violation = true;
    std::string sep_note = tr.sep_ok ? "separation >= epsilon" : "separation below epsilon";
    st.message = (ok ? "traces admissible (" : "traces rejected (") + sep_note + ")";
    return ok;
}

bool stage_immerse(Ctx& c, StageStatus& st) {
    ensure_evolution(c);
    Evolution patch = crop_to_common_valid(*c.ev);
    if (patch.snapshots.size() < 2 || patch.snapshots.front().n() < 2)
        throw std::runtime_error("no rectangular valid patch to immerse");
    SecondFundamentalForm sff = second_fundamental_form(patch, *c.metric, c.prof);
    c.mesh = integrate_frame(sff, *c.metric);
    ResidualReport rr = verify_immersion(*c.mesh, *c.metric, c.prof);
    c.mesh->write_csv(c.path("mesh.csv"));
    c.emit("mesh.csv");
    c.mesh->write_obj(c.path("mesh.obj"));
    c.emit("mesh.obj");
    c.put("immerse.cells", double(rr.cells));
    c.put("immerse.first_form_sup", rr.first_form_sup);
    c.put("immerse.ortho_sup", rr.ortho_sup);
    c.put("immerse.comm_sup", rr.comm_sup);
    c.put("immerse.curv_rel_sup", rr.curv_rel_sup);
    bool ok = rr.cells >= 4 && std::isfinite(rr.first_form_sup);
    st.message = ok ? "mesh with " + std::to_string(rr.cells) + " vertices"
                    : "degenerate mesh";
    return ok;
}

} // namespace

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
    if (!(opt.resolution_scale > 0.0))
        throw std::invalid_argument("resolution scale must be positive");
    Ctx c;
    c.cfg = cfg;
    c.opt = opt;
    c.out = opt.out_override.empty() ? cfg.out_dir : opt.out_override;
    std::filesystem::create_directories(c.out);
    c.prof = make_profile(cfg.profile);
    ProfileConfig polar_pc = cfg.profile;
    polar_pc.mod_amplitude = 0.0;
    c.pol = make_profile(polar_pc);
    c.xs = build_xs(cfg.grid, opt.resolution_scale);

    auto enabled = [&](const std::string& name) {
        const std::vector<std::string>& sel =
            !opt.stage_filter.empty() ? opt.stage_filter : cfg.stages;
        return sel.empty() || std::find(sel.begin(), sel.end(), name) != sel.end();
    };

    c.eps = cfg.certify.epsilon;
    c.mu_eff = cfg.certify.mu ? *cfg.certify.mu : std::sqrt(cfg.certify.epsilon);
    c.certifying = enabled("certify") || enabled("glue");
    double t0 = cfg.grid.t_start;
    if (cfg.certify.t0) {
        t0 = *cfg.certify.t0;
    } else if (c.certifying) {
        try {
            t0 = choose_t0(c.prof);
        } catch (const std::domain_error&) {
            // no admissible rung; run from t_start and let the monitor speak
        }
    }
    c.t_begin = std::max(cfg.grid.t_start, t0);
    c.t_end = cfg.grid.t_max;
    if (c.certifying) c.t_end = std::max(c.t_end, c.t_begin + cfg.certify.horizon);
    if (!(c.t_begin < c.t_end))
        throw ConfigError(0, "grid.t_max must exceed the start time " + fmt_double(c.t_begin));
    c.snap_ts = linspace(c.t_begin, c.t_end, cfg.grid.snapshots);

    bool halted = false;
    for (const char* name : kStageNames) {
        if (std::string(name) == "report") continue;
        StageStatus st;
        st.name = name;
        if (!enabled(name) || halted) {
            c.rep.stages.push_back(st);
            continue;
        }
        auto tic = std::chrono::steady_clock::now();
        try {
            bool ok = false;
            if (st.name == "check") ok = stage_check(c, st);
            else if (st.name == "solve-ode") ok = stage_solve_ode(c, st);
            else if (st.name == "solve-pde") ok = stage_solve_pde(c, st);
            else if (st.name == "certify") ok = stage_certify(c, st);
            else if (st.name == "glue") ok = stage_glue(c, st);
            else if (st.name == "immerse") ok = stage_immerse(c, st);
            st.status = ok ? "pass" : "fail";
            if (!ok) halted = true; // downstream stages need a clean input
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            st.status = "error";
            st.message = e.what();
            c.rep.errored = true;
            halted = true;
        }
        st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
        c.rep.stages.push_back(st);
    }

    StageStatus st;
    st.name = "report";
    if (enabled("report")) {
        auto tic = std::chrono::steady_clock::now();
        try {
            if (c.rep.manifest.empty()) {
                // standalone report: pick up files earlier runs left in out/
                std::vector<std::string> names;
                for (const auto& e : std::filesystem::directory_iterator(c.out)) {
                    if (!e.is_regular_file()) continue;
                    std::string n = e.path().filename().string();
                    if (n == "report.txt" || n == "summary.csv") continue;
                    names.push_back(n);
                }
                std::sort(names.begin(), names.end());
                for (const std::string& n : names) c.emit(n);
            }
            CsvWriter w(c.path("summary.csv"), "file,bytes,digest64");
            for (const ManifestEntry& e : c.rep.manifest)
                w.raw_row({e.name, std::to_string(e.bytes), hex16(e.digest)});
            st.status = "pass";
            st.message = std::to_string(c.rep.manifest.size()) + " files summarized";
        } catch (const std::exception& e) {
            st.status = "error";
            st.message = e.what();
            c.rep.errored = true;
        }
        st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
        c.rep.stages.push_back(st);
        c.emit("summary.csv");
        c.rep.write(c.path("report.txt"));
    } else {
        c.rep.stages.push_back(st);
    }
    return c.rep;
}

int exit_code(const RunReport& rep, bool expect_blowup) {
    if (rep.errored) return 1;
    if (expect_blowup) return rep.violation ? 0 : 1;
    return rep.violation ? 1 : 0;
}

} // namespace gcflow
