#include "gcflow/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gcflow/csv.hpp"

namespace gcflow {

namespace {

constexpr double kOverflow = 1e150;

// One RK4 step of y'' = k(t)²·y written as (y, y').
void rk4_linear_step(const std::function<double(double)>& ksq, double t, double h, double& y,
                     double& yp) {
    auto f = [&](double tt, double a, double b, double& da, double& db) {
        da = b;
        db = ksq(tt) * a;
    };
    double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    f(t, y, yp, k1a, k1b);
    f(t + 0.5 * h, y + 0.5 * h * k1a, yp + 0.5 * h * k1b, k2a, k2b);
    f(t + 0.5 * h, y + 0.5 * h * k2a, yp + 0.5 * h * k2b, k3a, k3b);
    f(t + h, y + h * k3a, yp + h * k3b, k4a, k4b);
    y += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    yp += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
}

void integrate_column(const std::function<double(double)>& ksq, const std::vector<double>& ts,
                      double dt_sub, double y0, double yp0, std::vector<double>& y,
                      std::vector<double>& yp, size_t& valid) {
    y[0] = y0;
    yp[0] = yp0;
    valid = 1;
    double a = y0, b = yp0;
    for (size_t j = 1; j < ts.size(); ++j) {
        double h = ts[j] - ts[j - 1];
        // substep scales with t at late times, where the coefficient decays
        double eff = dt_sub * std::max(1.0, ts[j - 1]);
        size_t nsub = std::max<size_t>(1, size_t(std::ceil(h / eff)));
        double hs = h / double(nsub);
        double t = ts[j - 1];
        for (size_t s = 0; s < nsub; ++s) {
            rk4_linear_step(ksq, t, hs, a, b);
            t += hs;
        }
        if (!std::isfinite(a) || std::fabs(a) > kOverflow) break;
        y[j] = a;
        yp[j] = b;
        valid = j + 1;
    }
}

void check_time_nodes(const std::vector<double>& ts) {
    if (ts.size() < 2 || ts.front() != 0.0)
        throw std::invalid_argument("time grid must start at 0 with 2+ nodes");
    for (size_t j = 1; j < ts.size(); ++j)
        if (!(ts[j] > ts[j - 1])) throw std::invalid_argument("time grid must increase");
}

} // namespace

size_t MetricGrid::col(double x) const {
    for (size_t i = 0; i < xs.size(); ++i)
        if (std::fabs(xs[i] - x) <= 1e-12 * std::max(1.0, std::fabs(x))) return i;
    throw std::invalid_argument("col: x is not a grid node");
}

MetricGrid solve_gauss_equation(const CurvatureProfile& p, const std::vector<double>& xs,
                                const std::vector<double>& ts, double dt_sub) {
    check_time_nodes(ts);
    if (xs.empty()) throw std::invalid_argument("empty x grid");
    if (!(dt_sub > 0.0)) throw std::invalid_argument("dt_sub must be positive");

    MetricGrid m;
    m.xs = xs;
    m.ts = ts;
    m.B = Field2<double>(xs.size(), ts.size(), std::numeric_limits<double>::quiet_NaN());
    m.B_t = m.B;
    m.valid_rows.assign(xs.size(), 0);

    std::vector<double> y(ts.size()), yp(ts.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        double x = xs[i];
        auto ksq = [&](double t) {
            CurvatureSample s = eval_curvature(p, x, t);
            return s.k * s.k;
        };
        size_t valid = 0;
        integrate_column(ksq, ts, dt_sub, 1.0, 0.0, y, yp, valid);
        m.valid_rows[i] = valid;
        for (size_t j = 0; j < valid; ++j) {
            m.B.at(i, j) = y[j];
            m.B_t.at(i, j) = yp[j];
        }
    }

    // x-diagnostics: centered differences, one-sided at edges, per t-row.
    size_t nx = xs.size(), nt = ts.size();
    m.dx_lnB = Field2<double>(nx, nt, 0.0);
    m.dxx_lnB = Field2<double>(nx, nt, 0.0);
    m.BdxdtlnB = Field2<double>(nx, nt, 0.0);
    for (size_t j = 0; j < nt; ++j) {
        for (size_t i = 0; i < nx; ++i) {
            if (j >= m.valid_rows[i]) continue;
            size_t il = i > 0 ? i - 1 : i;
            size_t ir = i + 1 < nx ? i + 1 : i;
            if (j >= m.valid_rows[il]) il = i;
            if (j >= m.valid_rows[ir]) ir = i;
            if (il == ir) continue;
            double dx = xs[ir] - xs[il];
            double lnl = std::log(m.B.at(il, j)), lnr = std::log(m.B.at(ir, j));
            m.dx_lnB.at(i, j) = (lnr - lnl) / dx;
            double ql = m.B_t.at(il, j) / m.B.at(il, j);
            double qr = m.B_t.at(ir, j) / m.B.at(ir, j);
            m.BdxdtlnB.at(i, j) = m.B.at(i, j) * (qr - ql) / dx;
            if (ir - il == 2) {
                double h = 0.5 * dx;
                double lnc = std::log(m.B.at(i, j));
                m.dxx_lnB.at(i, j) = (lnr - 2.0 * lnc + lnl) / (h * h);
            }
        }
    }
    return m;
}

void column_interp(const MetricGrid& m, const CurvatureProfile& p, size_t i, double t, double& B,
                   double& B_t) {
    size_t valid = m.valid_rows[i];
    if (valid < 2) throw std::domain_error("column_interp: column too short");
    double t_hi = m.ts[valid - 1];
    if (t < m.ts.front() || t > t_hi * (1.0 + 1e-12))
        throw std::domain_error("column_interp: t outside valid column range");
    t = std::min(t, t_hi);
    size_t j = lower_index(m.ts, t);
    if (j + 1 >= valid) j = valid - 2;
    double t0 = m.ts[j], t1 = m.ts[j + 1];
    double b0 = m.B.at(i, j), b1 = m.B.at(i, j + 1);
    double p0 = m.B_t.at(i, j), p1 = m.B_t.at(i, j + 1);
    // B interpolated with exact slope B_t; B_t with slope k²B
    B = hermite(t0, t1, b0, b1, p0, p1, t);
    CurvatureSample s0 = eval_curvature(p, m.xs[i], t0);
    CurvatureSample s1 = eval_curvature(p, m.xs[i], t1);
    B_t = hermite(t0, t1, p0, p1, s0.k * s0.k * b0, s1.k * s1.k * b1, t);
}

MetricSlice metric_slice(const MetricGrid& m, const CurvatureProfile& p, double t) {
    size_t nx = m.xs.size();
    MetricSlice s;
    s.t = t;
    s.B.assign(nx, std::numeric_limits<double>::quiet_NaN());
    s.B_t = s.B;
    s.dx_lnB.assign(nx, 0.0);
    s.dxx_lnB.assign(nx, 0.0);
    s.dxdt_lnB.assign(nx, 0.0);
    for (size_t i = 0; i < nx; ++i) column_interp(m, p, i, t, s.B[i], s.B_t[i]);
    for (size_t i = 0; i < nx; ++i) {
        size_t il = i > 0 ? i - 1 : i;
        size_t ir = i + 1 < nx ? i + 1 : i;
        if (il == ir) continue;
        double dx = m.xs[ir] - m.xs[il];
        s.dx_lnB[i] = (std::log(s.B[ir]) - std::log(s.B[il])) / dx;
        s.dxdt_lnB[i] = (s.B_t[ir] / s.B[ir] - s.B_t[il] / s.B[il]) / dx;
        if (ir - il == 2) {
            double h = 0.5 * dx;
            s.dxx_lnB[i] =
                (std::log(s.B[ir]) - 2.0 * std::log(s.B[i]) + std::log(s.B[il])) / (h * h);
        }
    }
    return s;
}

void MetricGrid::write_csv(const std::string& path) const {
    CsvWriter w(path, "x,t,B,B_t,dx_lnB,dxx_lnB,BdxdtlnB");
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < valid_rows[i]; ++j)
            w.row({xs[i], ts[j], B.at(i, j), B_t.at(i, j), dx_lnB.at(i, j), dxx_lnB.at(i, j),
                   BdxdtlnB.at(i, j)});
}

AsymptoticsReport verify_metric_asymptotics(const MetricGrid& m, const CurvatureProfile& p) {
    AsymptoticsReport r;
    size_t nx = m.xs.size(), nt = m.ts.size();

    for (size_t j = 0; j < nt; ++j) {
        if (m.ts[j] < 1.0) continue;
        double worst = 0.0;
        bool any = false;
        for (size_t i = 0; i < nx; ++i) {
            if (j >= m.valid_rows[i]) continue;
            double e = std::fabs(m.ts[j] * m.B_t.at(i, j) / m.B.at(i, j) - 1.0);
            worst = std::max(worst, e);
            any = true;
        }
        if (any) {
            r.sample_ts.push_back(m.ts[j]);
            r.e_sup.push_back(worst);
        }
    }
    r.e_decreasing = r.e_sup.size() >= 2;
    for (size_t j = 1; j < r.e_sup.size(); ++j)
        if (!(r.e_sup[j] < r.e_sup[j - 1] + 1e-12)) r.e_decreasing = false;
    r.e_final = r.e_sup.empty() ? std::numeric_limits<double>::infinity() : r.e_sup.back();

    // tail envelope for B/t
    double t_tail = std::max(10.0, 0.1 * m.ts.back());
    r.C1 = std::numeric_limits<double>::infinity();
    r.C2 = 0.0;
    for (size_t i = 0; i < nx; ++i)
        for (size_t j = 0; j < m.valid_rows[i]; ++j) {
            if (m.ts[j] < t_tail) continue;
            double q = m.B.at(i, j) / m.ts[j];
            r.C1 = std::min(r.C1, q);
            r.C2 = std::max(r.C2, q);
        }

    for (size_t i = 0; i < nx; ++i)
        for (size_t j = 0; j < m.valid_rows[i]; ++j) {
            r.sup_dx_lnB = std::max(r.sup_dx_lnB, std::fabs(m.dx_lnB.at(i, j)));
            r.sup_dxx_lnB = std::max(r.sup_dxx_lnB, std::fabs(m.dxx_lnB.at(i, j)));
            r.sup_BdxdtlnB = std::max(r.sup_BdxdtlnB, std::fabs(m.BdxdtlnB.at(i, j)));
        }

    // B_t band at the last valid node per column
    r.bt_band_ok = true;
    for (size_t i = 0; i < nx; ++i) {
        size_t valid = m.valid_rows[i];
        if (valid < 2) continue;
        double t_end = m.ts[valid - 1];
        double mm = p.modulation().m(m.xs[i]);
        double ik2 = integral_base_k2(p, 0.0, t_end).value * mm * mm;
        double isk2 = integral_base_k2_t(p, 0.0, t_end).value * mm * mm;
        double bt = m.B_t.at(i, valid - 1);
        double lo = ik2 * (1.0 - 1e-8) - 1e-14;
        double hi = std::exp(isk2) * ik2 * (1.0 + 1e-8) + 1e-14;
        if (!(bt >= lo && bt <= hi)) r.bt_band_ok = false;
    }

    r.asymptotics_ok = r.e_decreasing && r.e_final <= r.e_threshold;
    return r;
}

PolarMetricGrid solve_polar_gauss(const CurvatureProfile& p, const std::vector<double>& thetas,
                                  const std::vector<double>& rhos, double drho_sub) {
    check_time_nodes(rhos);
    if (thetas.empty()) throw std::invalid_argument("empty theta grid");
    if (!(drho_sub > 0.0)) throw std::invalid_argument("drho_sub must be positive");

    PolarMetricGrid g;
    g.thetas = thetas;
    g.rhos = rhos;
    g.G = Field2<double>(thetas.size(), rhos.size(), std::numeric_limits<double>::quiet_NaN());
    g.G_rho = g.G;
    g.valid_rows.assign(thetas.size(), 0);

    std::vector<double> y(rhos.size()), yp(rhos.size());
    for (size_t i = 0; i < thetas.size(); ++i) {
        double th = thetas[i];
        auto ksq = [&](double rho) {
            CurvatureSample s = eval_curvature(p, th, rho);
            return s.k * s.k;
        };
        size_t valid = 0;
        integrate_column(ksq, rhos, drho_sub, 0.0, 1.0, y, yp, valid);
        g.valid_rows[i] = valid;
        for (size_t j = 0; j < valid; ++j) {
            g.G.at(i, j) = y[j];
            g.G_rho.at(i, j) = yp[j];
        }
    }

    TailIntegral irho = integral_base_k2_t(p, 0.0, std::numeric_limits<double>::infinity());
    double mm = p.mod_max();
    g.b0 = irho.finite ? std::exp(mm * mm * (irho.value + irho.remainder_bound))
                       : std::numeric_limits<double>::infinity();
    return g;
}

void PolarMetricGrid::write_csv(const std::string& path) const {
    CsvWriter w(path, "x,t,B,B_t,dx_lnB,dxx_lnB,BdxdtlnB");
    for (size_t i = 0; i < thetas.size(); ++i)
        for (size_t j = 0; j < valid_rows[i]; ++j)
            w.row({thetas[i], rhos[j], G.at(i, j), G_rho.at(i, j), 0.0, 0.0, 0.0});
}

PolarBandReport check_polar_bands(const PolarMetricGrid& g, double rho_max) {
    PolarBandReport r;
    r.G_rho_in_band = true;
    r.G_in_band = true;
    r.worst_low = std::numeric_limits<double>::infinity();
    r.worst_high = 0.0;
    for (size_t i = 0; i < g.thetas.size(); ++i)
        for (size_t j = 0; j < g.valid_rows[i]; ++j) {
            double rho = g.rhos[j];
            if (rho > rho_max) break;
            double gr = g.G_rho.at(i, j);
            r.worst_low = std::min(r.worst_low, gr);
            r.worst_high = std::max(r.worst_high, gr);
            if (gr < 1.0 - 1e-9 || gr > g.b0 * (1.0 + 1e-9)) r.G_rho_in_band = false;
            if (rho > 0.0) {
                double G = g.G.at(i, j);
                if (G < rho * (1.0 - 1e-9) || G > g.b0 * rho * (1.0 + 1e-9)) r.G_in_band = false;
            }
        }
    return r;
}

} // namespace gcflow
