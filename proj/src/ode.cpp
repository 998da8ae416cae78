#include "gcflow/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "gcflow/csv.hpp"
#include "gcflow/grid.hpp"

namespace gcflow {

MetricColumn MetricColumn::constant_k(double k0) {
    MetricColumn c;
    if (k0 == 0.0) {
        c.B = [](double) { return 1.0; };
        c.B_t = [](double) { return 0.0; };
    } else {
        c.B = [k0](double t) { return std::cosh(k0 * t); };
        c.B_t = [k0](double t) { return k0 * std::sinh(k0 * t); };
    }
    return c;
}

MetricColumn MetricColumn::from_grid(const MetricGrid& m, const CurvatureProfile& p, size_t col) {
    // snapshot the column so the interpolants own their data
    auto grid = std::make_shared<MetricGrid>(m);
    auto prof = std::make_shared<CurvatureProfile>(p);
    MetricColumn c;
    c.B = [grid, prof, col](double t) {
        double B, Bt;
        column_interp(*grid, *prof, col, t, B, Bt);
        return B;
    };
    c.B_t = [grid, prof, col](double t) {
        double B, Bt;
        column_interp(*grid, *prof, col, t, B, Bt);
        return Bt;
    };
    return c;
}

OdeSystem OdeSystem::constant_k(double k0) {
    OdeSystem s;
    MetricColumn c = MetricColumn::constant_k(k0);
    s.k = [k0](double) { return k0; };
    s.k_t = [](double) { return 0.0; };
    s.B = c.B;
    s.B_t = c.B_t;
    return s;
}

OdeSystem OdeSystem::from_profile(const CurvatureProfile& p, double x, MetricColumn col) {
    OdeSystem s;
    auto prof = std::make_shared<CurvatureProfile>(p);
    s.k = [prof, x](double t) { return eval_curvature(*prof, x, t).k; };
    s.k_t = [prof, x](double t) { return eval_curvature(*prof, x, t).k_t; };
    s.B = col.B;
    s.B_t = col.B_t;
    return s;
}

namespace {

struct Deriv {
    double dw, dz;
};

Deriv rhs_riemann(const OdeSystem& s, double t, double w, double z) {
    double B = s.B(t), Bt = s.B_t(t), k = s.k(t), kt = s.k_t(t);
    double a = Bt / B, b = k > 0.0 ? kt / (2.0 * k) : 0.0;
    Deriv d;
    d.dw = -(a - b) * w - (a + b) * z - B * Bt * w * w * z;
    d.dz = -(a - b) * z - (a + b) * w - B * Bt * w * z * z;
    return d;
}

template <typename Rhs>
void rk4_step(const Rhs& f, double t, double h, double& w, double& z) {
    Deriv k1 = f(t, w, z);
    Deriv k2 = f(t + 0.5 * h, w + 0.5 * h * k1.dw, z + 0.5 * h * k1.dz);
    Deriv k3 = f(t + 0.5 * h, w + 0.5 * h * k2.dw, z + 0.5 * h * k2.dz);
    Deriv k4 = f(t + h, w + h * k3.dw, z + h * k3.dz);
    w += h / 6.0 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
    z += h / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
}

template <typename Rhs>
OdeTrajectory integrate_generic(const OdeSystem& sys, const Rhs& f, double w0, double z0,
                                double t_end, const OdeOptions& opt) {
    if (!(opt.dt > 0.0) || !(t_end > 0.0))
        throw std::invalid_argument("integrate: dt and t_end must be positive");

    OdeTrajectory tr;
    size_t n = size_t(std::ceil(t_end / opt.dt));
    tr.ts.reserve(n + 1);

    double t = 0.0, w = w0, z = z0;
    auto push = [&](double tt, double ww, double zz) {
        Deriv d = f(tt, ww, zz);
        tr.ts.push_back(tt);
        tr.ws.push_back(ww);
        tr.zs.push_back(zz);
        tr.dws.push_back(d.dw);
        tr.dzs.push_back(d.dz);
        tr.ks.push_back(sys.k(tt));
        tr.Bs.push_back(sys.B(tt));
        tr.Bts.push_back(sys.B_t(tt));
    };
    push(t, w, z);

    while (t < t_end - 1e-15 * t_end) {
        double h = std::min(opt.dt, t_end - t);
        double w1 = w, z1 = z;
        rk4_step(f, t, h, w1, z1);
        double w2 = w, z2 = z;
        if (opt.halfstep_check) {
            rk4_step(f, t, 0.5 * h, w2, z2);
            rk4_step(f, t + 0.5 * h, 0.5 * h, w2, z2);
            double scale = 1.0 + std::fabs(w2) + std::fabs(z2);
            double err = std::max(std::fabs(w1 - w2), std::fabs(z1 - z2)) / scale;
            if (err > opt.step_tol) throw StepRefinementRequest(0.5 * h);
            w = w2;
            z = z2;
        } else {
            w = w1;
            z = z1;
        }
        t += h;

        bool finite = std::isfinite(w) && std::isfinite(z);
        if (!finite || std::fabs(w) + std::fabs(z) > opt.state_ceiling) {
            tr.stopped_early = true;
            tr.stop_reason = "state_ceiling";
            tr.t_stop = t;
            if (finite) push(t, w, z);
            return tr;
        }
        if (w - z <= opt.hyperbolicity_floor && w0 - z0 > opt.hyperbolicity_floor) {
            tr.stopped_early = true;
            tr.stop_reason = "hyperbolicity_floor";
            tr.t_stop = t;
            push(t, w, z);
            return tr;
        }
        push(t, w, z);
    }
    tr.t_stop = t;
    return tr;
}

} // namespace

OdeTrajectory integrate_riemann_ode(const OdeSystem& sys, double w0, double z0, double t_end,
                                    const OdeOptions& opt) {
    auto f = [&sys](double t, double w, double z) { return rhs_riemann(sys, t, w, z); };
    return integrate_generic(sys, f, w0, z0, t_end, opt);
}

void OdeTrajectory::eval(double t, double& w, double& z) const {
    if (ts.size() < 2) throw std::domain_error("trajectory too short");
    if (t < ts.front() || t > ts.back() * (1.0 + 1e-12))
        throw std::domain_error("eval: t outside trajectory");
    size_t j = lower_index(ts, std::min(t, ts.back()));
    w = hermite(ts[j], ts[j + 1], ws[j], ws[j + 1], dws[j], dws[j + 1], t);
    z = hermite(ts[j], ts[j + 1], zs[j], zs[j + 1], dzs[j], dzs[j + 1], t);
}

void OdeTrajectory::write_csv(const std::string& path) const {
    CsvWriter wtr(path, "t,w,z,w_plus_z,w_minus_z,k,B,B_t");
    for (size_t i = 0; i < ts.size(); ++i)
        wtr.row({ts[i], ws[i], zs[i], ws[i] + zs[i], ws[i] - zs[i], ks[i], Bs[i], Bts[i]});
}

ClosedForm closed_form_special_solution(double w0, double z0, double B, double Bp, double k,
                                        double k0) {
    ClosedForm r;
    double B2 = B * B, B4 = B2 * B2, k02 = k0 * k0;
    double sum = w0 + z0, dif = w0 - z0;
    r.radicand = 4.0 * B4 * k02 + k02 * sum * sum * (B4 - B2) - k02 * dif * dif * B4 * Bp * Bp;
    if (!(r.radicand > 0.0)) return r;
    double root = std::sqrt(r.radicand);
    r.w = (k0 * sum + B2 * k * dif) / root;
    r.z = (k0 * sum - B2 * k * dif) / root;
    r.valid = true;
    return r;
}

double closed_form_product(double w0, double z0, double B, double Bp, double k, double k0) {
    double B2 = B * B, B4 = B2 * B2;
    double sum = w0 + z0, dif = w0 - z0;
    double a = sum * sum / (4.0 * B4) - k * k * dif * dif / (4.0 * k0 * k0);
    double den = 1.0 + 0.25 * sum * sum * (1.0 - 1.0 / B2) - 0.25 * dif * dif * Bp * Bp;
    return a / den;
}

BlowupReport detect_blowup(const OdeSystem& sys, double w0, double z0, double t_max,
                           const OdeOptions& opt) {
    BlowupReport r;
    double k0 = sys.k(0.0);
    auto radicand = [&](double t) {
        return closed_form_special_solution(w0, z0, sys.B(t), sys.B_t(t), sys.k(t), k0).radicand;
    };

    // scan for the first sign change of the radicand, then bisect
    double prev_t = 0.0, prev_v = radicand(0.0);
    const int n_scan = 4096;
    for (int i = 1; i <= n_scan; ++i) {
        double t = t_max * double(i) / n_scan;
        double v = radicand(t);
        if (prev_v > 0.0 && v <= 0.0) {
            double lo = prev_t, hi = t;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                if (radicand(mid) > 0.0) lo = mid; else hi = mid;
            }
            r.blew_up = true;
            r.t_star = 0.5 * (lo + hi);
            r.mechanism = "radicand_root";
            return r;
        }
        prev_t = t;
        prev_v = v;
    }

    // no root: confirm boundedness by integration
    OdeOptions o = opt;
    o.halfstep_check = false;
    OdeTrajectory tr = integrate_riemann_ode(sys, w0, z0, t_max, o);
    for (size_t i = 0; i < tr.ws.size(); ++i)
        r.sup_state = std::max(r.sup_state, std::fabs(tr.ws[i]) + std::fabs(tr.zs[i]));
    if (tr.stopped_early) {
        r.blew_up = true;
        r.t_star = tr.t_stop;
        r.mechanism = tr.stop_reason;
    } else {
        r.mechanism = "none";
    }
    return r;
}

ToyReport integrate_toy_model(ToyModel model, const CurvatureProfile& p, const OdeSystem& sys,
                              double w0, double z0, double t_end, const OdeOptions& opt) {
    ToyReport r;
    auto f_full = [&sys](double t, double w, double z) {
        double B = sys.B(t), Bt = sys.B_t(t), k = sys.k(t), kt = sys.k_t(t);
        double a = Bt / B, b = k > 0.0 ? kt / (2.0 * k) : 0.0;
        Deriv d;
        d.dw = -(a - b) * w - (a + b) * z - B * Bt * w * w * z + w * w;
        d.dz = -(a - b) * z - (a + b) * w - B * Bt * w * z * z - z * z;
        return d;
    };
    auto f_scalar = [&sys](double t, double w, double /*z*/) {
        double B = sys.B(t), Bt = sys.B_t(t), k = sys.k(t), kt = sys.k_t(t);
        Deriv d;
        d.dw = (k > 0.0 ? kt / k : 0.0) * w + w * w + B * Bt * w * w * w;
        d.dz = -d.dw; // z = -w eliminated
        return d;
    };

    OdeOptions o = opt;
    o.halfstep_check = false;
    r.trajectory = model == ToyModel::full
                       ? integrate_generic(sys, f_full, w0, z0, t_end, o)
                       : integrate_generic(sys, f_scalar, w0, -w0, t_end, o);
    for (size_t i = 0; i < r.trajectory.ws.size(); ++i)
        r.sup_state =
            std::max(r.sup_state, std::fabs(r.trajectory.ws[i]) + std::fabs(r.trajectory.zs[i]));
    r.global = !r.trajectory.stopped_early;
    r.t_star = r.trajectory.stopped_early ? r.trajectory.t_stop : 0.0;

    double inf = std::numeric_limits<double>::infinity();
    r.integral_k_finite = sup_integral_k(p, 0.0, inf).finite;
    r.integral_k2t_finite = integral_base_k2_t(p, 0.0, inf).finite;
    return r;
}

} // namespace gcflow
