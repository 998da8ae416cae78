#include "gcflow/gluing.hpp"

#include <algorithm>
#include <cmath>

#include "gcflow/csv.hpp"
#include "gcflow/sources.hpp"

namespace gcflow {

std::pair<OmegaDomain, OmegaDomain> build_domains(double R) {
    if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
    OmegaDomain o1, o2;
    o1.R = o2.R = R;
    o1.side = OmegaDomain::Side::omega1;
    o2.side = OmegaDomain::Side::omega2;
    return {o1, o2};
}

bool polar_sample(const PolarMetricGrid& g, double theta, double rho, double& G, double& G_rho) {
    const auto& th = g.thetas;
    const auto& rh = g.rhos;
    if (th.size() < 2 || rh.size() < 2) return false;
    if (theta < th.front() || theta > th.back() || rho < rh.front() || rho > rh.back())
        return false;
    size_t i = lower_index(th, theta);
    size_t j = lower_index(rh, rho);
    if (j + 1 >= g.valid_rows[i] || j + 1 >= g.valid_rows[i + 1]) return false;
    double u = (theta - th[i]) / (th[i + 1] - th[i]);
    double v = (rho - rh[j]) / (rh[j + 1] - rh[j]);
    auto blend = [&](const Field2<double>& f) {
        double lo = lerp(f.at(i, j), f.at(i + 1, j), u);
        double hi = lerp(f.at(i, j + 1), f.at(i + 1, j + 1), u);
        return lerp(lo, hi, v);
    };
    G = blend(g.G);
    G_rho = blend(g.G_rho);
    return true;
}

size_t TransformField::col(double x) const {
    for (size_t i = 0; i < xs.size(); ++i)
        if (std::fabs(xs[i] - x) <= 1e-9 * std::max(1.0, std::fabs(x))) return i;
    throw std::invalid_argument("x is not a transform grid column");
}

bool TransformField::sample(size_t i, double t, double& rho_v, double& theta_v,
                            double& Phi_v) const {
    size_t nv = valid_rows[i];
    if (nv < 2 || t < ts.front() - 1e-12 || t > ts[nv - 1] + 1e-12 * std::max(1.0, t))
        return false;
    size_t j = lower_index(ts, std::min(t, ts[nv - 1]));
    if (j + 1 >= nv) j = nv - 2;
    double u = (t - ts[j]) / (ts[j + 1] - ts[j]);
    rho_v = lerp(rho.at(i, j), rho.at(i, j + 1), u);
    theta_v = lerp(theta.at(i, j), theta.at(i, j + 1), u);
    Phi_v = lerp(Phi.at(i, j), Phi.at(i, j + 1), u);
    return true;
}

void TransformField::write_csv(const std::string& path) const {
    CsvWriter w(path, "x,t,rho,theta,Phi,xi");
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < valid_rows[i]; ++j)
            w.row({xs[i], ts[j], rho.at(i, j), theta.at(i, j), Phi.at(i, j), xi[i]});
}

TransformField coordinate_transform(const MetricGrid& metric, const CurvatureProfile& geo,
                                    const PolarMetricGrid& polar) {
    (void)geo;
    TransformField tf;
    tf.xs = metric.xs;
    tf.ts = metric.ts;
    const size_t nx = tf.xs.size(), nt = tf.ts.size();
    tf.rho = Field2<double>(nx, nt);
    tf.theta = Field2<double>(nx, nt);
    tf.Phi = Field2<double>(nx, nt);
    tf.rho_t = Field2<double>(nx, nt);
    tf.rho_x = Field2<double>(nx, nt);
    tf.theta_t = Field2<double>(nx, nt);
    tf.theta_x = Field2<double>(nx, nt);
    tf.xi.assign(nx, 0.0);
    tf.valid_rows.assign(nx, 0);

    const double pi = std::acos(-1.0);
    for (size_t i = 0; i < nx; ++i) {
        const double x = tf.xs[i];
        if (std::fabs(x) < 1e-12) continue; // the axis column belongs to the polar chart
        // At t=0: rho = |x|, Phi = 0, B = 1, so rho_x = -xi/cosh(0) = -xi must
        // match d|x|/dx = sign(x). That pins xi = -sign(x) per column.
        const double xi = x > 0.0 ? -1.0 : 1.0;
        tf.xi[i] = xi;
        double rho_v = std::fabs(x);
        // theta is measured from the negative x-axis (flat limit: atan2(t, -x)).
        // This keeps theta_x = B tanh(Phi)/G one-signed across both half-lines
        // and sends the two column families into a single wedge around pi/2
        // rather than two slivers on opposite sides of the branch cut.
        double theta_v = x > 0.0 ? pi : 0.0;
        double Phi_v = 0.0;

        size_t rows = 0;
        for (size_t j = 0; j < nt; ++j) {
            if (j > 0) {
                if (j >= std::min(metric.valid_rows[i], nt)) break;
                double t0 = tf.ts[j - 1], t1 = tf.ts[j];
                // Substep so each advance stays small relative to rho, where
                // the rates ~ G_rho/G ~ 1/rho live.
                size_t nsub = size_t(std::ceil((t1 - t0) / (0.05 * std::max(rho_v, 1e-3))));
                nsub = std::min(nsub, size_t(200000));
                if (nsub == 0) nsub = 1;
                double h = (t1 - t0) / double(nsub);
                bool dead = false;
                for (size_t q = 0; q < nsub; ++q) {
                    auto rate = [&](double rv, double tv, double pv, double* d) {
                        double G, G_rho;
                        if (!polar_sample(polar, tv, rv, G, G_rho)) return false;
                        d[0] = std::tanh(pv);
                        d[1] = xi / (G * std::cosh(pv));
                        d[2] = G_rho / G;
                        return true;
                    };
                    double d1[3], d2[3];
                    if (!rate(rho_v, theta_v, Phi_v, d1)) {
                        dead = true;
                        break;
                    }
                    double rm = rho_v + 0.5 * h * d1[0];
                    double thm = theta_v + 0.5 * h * d1[1];
                    double pm = Phi_v + 0.5 * h * d1[2];
                    if (!rate(rm, thm, pm, d2)) {
                        d2[0] = d1[0];
                        d2[1] = d1[1];
                        d2[2] = d1[2];
                    }
                    rho_v += h * d2[0];
                    theta_v += h * d2[1];
                    Phi_v += h * d2[2];
                }
                if (dead) break;
            }
            tf.rho.at(i, j) = rho_v;
            tf.theta.at(i, j) = theta_v;
            tf.Phi.at(i, j) = Phi_v;
            double G, G_rho;
            if (!polar_sample(polar, theta_v, rho_v, G, G_rho)) break;
            const double B = metric.B.at(i, j);
            tf.rho_t.at(i, j) = std::tanh(Phi_v);
            tf.theta_t.at(i, j) = xi / (G * std::cosh(Phi_v));
            tf.rho_x.at(i, j) = -xi * B / std::cosh(Phi_v);
            tf.theta_x.at(i, j) = B * std::tanh(Phi_v) / G;
            rows = j + 1;
        }
        tf.valid_rows[i] = rows;

        for (size_t j = 0; j < rows; ++j) {
            const double t = tf.ts[j], ax = std::fabs(x), rv = tf.rho.at(i, j);
            double m = std::min(std::min(rv - t, rv - 0.5 * ax),
                                std::min(t + ax - rv, 3.0 * rv - (t + ax)));
            tf.worst_sandwich_margin = std::min(tf.worst_sandwich_margin, m);
            if (m < -1e-9 * std::max(1.0, rv)) tf.sandwich_ok = false;
        }
    }
    return tf;
}

PushforwardPoint pushforward_point(double x, double t, double r, double s, double B,
                                   double rho_v, double theta_v, double rho_t, double rho_x,
                                   double theta_t, double theta_x, double k_geo, double k_polar,
                                   double G) {
    PushforwardPoint p;
    p.x = x;
    p.t = t;
    p.theta = theta_v;
    p.rho = rho_v;
    const double Dr = rho_t + k_geo * r * rho_x;
    const double Ds = rho_t + k_geo * s * rho_x;
    if (std::fabs(Dr) < 1e-10 || std::fabs(Ds) < 1e-10 || !(k_polar > 0.0) || !(G > 0.0))
        return p;
    p.rbar = (theta_t + k_geo * r * theta_x) / (k_polar * Dr);
    p.sbar = (theta_t + k_geo * s * theta_x) / (k_polar * Ds);
    p.sep_identity = (k_geo / k_polar) * B * (r - s) / (G * Dr * Ds);
    p.ok = true;
    return p;
}

PushforwardField pushforward_invariants(const InvariantField& fld, const TransformField& tf,
                                        const MetricGrid& metric, const PolarMetricGrid& polar,
                                        const CurvatureProfile& geo, const CurvatureProfile& pol) {
    if (fld.n() != tf.xs.size())
        throw std::invalid_argument("field and transform must share the x grid");
    PushforwardField out;
    for (size_t i = 0; i < fld.n(); ++i) {
        if (!fld.valid[i] || tf.xi[i] == 0.0) continue;
        double rho_v, theta_v, Phi_v;
        if (!tf.sample(i, fld.t, rho_v, theta_v, Phi_v)) continue;
        double G, G_rho;
        if (!polar_sample(polar, theta_v, rho_v, G, G_rho)) continue;
        double B, B_t;
        column_interp(metric, geo, i, fld.t, B, B_t);
        const double k_geo = eval_curvature(geo, fld.xs[i], fld.t).k;
        const double k_pol = eval_curvature(pol, theta_v, rho_v).k;
        const double ch = std::cosh(Phi_v), th = std::tanh(Phi_v);
        PushforwardPoint p =
            pushforward_point(fld.xs[i], fld.t, fld.r[i], fld.s[i], B, rho_v, theta_v, th,
                              -tf.xi[i] * B / ch, tf.xi[i] / (G * ch), B * th / G, k_geo, k_pol, G);
        if (!p.ok) {
            ++out.excluded;
            continue;
        }
        out.max_route_mismatch =
            std::max(out.max_route_mismatch, std::fabs((p.rbar - p.sbar) - p.sep_identity));
        out.pts.push_back(p);
    }
    return out;
}

namespace {

double lin_at(const std::vector<double>& zs, const std::vector<double>& vs, double z) {
    if (z <= zs.front()) return vs.front();
    if (z >= zs.back()) return vs.back();
    size_t i = lower_index(zs, z);
    double u = (z - zs[i]) / (zs[i + 1] - zs[i]);
    return lerp(vs[i], vs[i + 1], u);
}

// Smooth ramp: 0 for z <= 0.1, 1 for z >= 1.
double psi_cutoff(double z) {
    auto sig = [](double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    double u = (z - 0.1) / 0.9;
    double a = sig(u), b = sig(1.0 - u);
    return a / (a + b);
}

double logaddexp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

} // namespace

double EtaConstruction::h1_at(double zeta) const { return lin_at(zetas, h1, std::fabs(zeta)); }
double EtaConstruction::h2_at(double zeta) const { return lin_at(zetas, h2, std::fabs(zeta)); }

double EtaConstruction::log_integrand(double zeta) const {
    const double psi = psi_cutoff(zeta);
    if (psi <= 0.0) return -std::numeric_limits<double>::infinity();
    const double t0R = R * (1.0 + (zeta + 1.0) * (zeta + 1.0)) + R;
    const double pi = std::acos(-1.0);
    return std::log(psi) - 30.0 * t0R * h1_at(zeta + 1.0) - zeta * zeta - std::log(8.0 * pi) -
           std::log(t0R) - std::log(h2_at(zeta + 1.0));
}

double EtaConstruction::eval_hat(double x) const {
    const double ax = std::fabs(x);
    const auto& zs = zetas;
    // log_eta is sampled on the prefix of zetas that eta_hat covers.
    const size_t n = eta_hat.size();
    if (n == 0) return 0.0;
    if (ax <= zs.front()) return eta_hat.front();
    if (ax >= zs[n - 1]) {
        // continue the last log-linear decay
        if (n < 2) return eta_hat.back();
        double slope = (log_eta[n - 1] - log_eta[n - 2]) / (zs[n - 1] - zs[n - 2]);
        double le = log_eta[n - 1] + slope * (ax - zs[n - 1]) - log_eta0;
        return le < -700.0 ? 0.0 : std::exp(le);
    }
    size_t i = lower_index(zs, ax);
    if (i + 1 >= n) i = n - 2;
    double u = (ax - zs[i]) / (zs[i + 1] - zs[i]);
    double le = lerp(log_eta[i], log_eta[i + 1], u) - log_eta0;
    return le < -700.0 ? 0.0 : std::exp(le);
}

EtaConstruction construct_initial_eta(double sigma, const OmegaDomain& om1,
                                      const MetricGrid& metric, const CurvatureProfile& prof,
                                      double zeta_max, size_t n_zeta) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be nonnegative");
    if (n_zeta < 8 || !(zeta_max > 2.0)) throw std::invalid_argument("eta grid too small");
    if (om1.t0(zeta_max) > metric.ts.back() + 1e-9)
        throw std::invalid_argument("metric grid does not cover omega1 up to zeta_max");

    EtaConstruction eta;
    eta.sigma = sigma;
    eta.R = om1.R;
    eta.zetas = linspace(0.0, zeta_max, n_zeta);

    // Per-column sup of the coefficient list over t <= t0(x).
    const size_t nx = metric.xs.size();
    std::vector<double> colsup(nx, 0.0);
    for (size_t i = 0; i < nx; ++i) {
        const double x = metric.xs[i];
        if (std::fabs(x) > zeta_max + 1e-12) continue;
        const double tcap = om1.t0(x);
        double sup = 0.0;
        for (size_t j = 0; j < metric.valid_rows[i]; ++j) {
            if (metric.ts[j] > tcap) break;
            CurvatureSample ks = eval_curvature(prof, x, metric.ts[j]);
            const double B = metric.B.at(i, j), B_t = metric.B_t.at(i, j);
            const double dxlnB = metric.dx_lnB.at(i, j), dxxlnB = metric.dxx_lnB.at(i, j);
            const double dxdtlnB = metric.BdxdtlnB.at(i, j) / B;
            CellCoeffs cc = make_cell_coeffs(ks, B, B_t, dxlnB, dxxlnB, dxdtlnB);
            const double d_ktk = ks.k > 0.0
                                     ? ks.k_xt / ks.k - ks.k_x * ks.k_t / (ks.k * ks.k)
                                     : 0.0;
            const double q[] = {
                std::fabs(B_t / B),          std::fabs(dxdtlnB),
                std::fabs(cc.c.kt_over_k),   std::fabs(d_ktk),
                std::fabs(ks.k * dxlnB),     std::fabs(ks.k_x * dxlnB + ks.k * dxxlnB),
                std::fabs(ks.k_xx),          std::fabs(ks.k),
                std::fabs(ks.k_x),           std::fabs(B * B_t * ks.k * ks.k),
                std::fabs(cc.dx.d_bbtk2),
            };
            for (double v : q) sup = std::max(sup, v);
        }
        colsup[i] = sup;
    }

    // Cumulative sup in |x| with a 2x safety factor, plus the slope-ratio term.
    const double sqrt2 = std::sqrt(2.0);
    eta.h1.resize(eta.zetas.size());
    eta.h2.resize(eta.zetas.size());
    for (size_t m = 0; m < eta.zetas.size(); ++m) {
        const double z = eta.zetas[m];
        double sup = 0.0;
        for (size_t i = 0; i < nx; ++i)
            if (std::fabs(metric.xs[i]) <= z + 1e-12) sup = std::max(sup, colsup[i]);
        eta.h1[m] = 1.0 + 2.0 * sup;
        eta.h2[m] = 1.0 + eta.h1[m] + om1.slope_ratio(std::min(z, sqrt2));
    }
    for (size_t m = 1; m < eta.zetas.size(); ++m) {
        eta.h1[m] = std::max(eta.h1[m], eta.h1[m - 1]);
        eta.h2[m] = std::max(eta.h2[m], eta.h2[m - 1]);
    }

    // eta on the grid prefix that the shifted integrand covers, in log space.
    const double z_cut = zeta_max - 1.0;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    size_t n_eta = 0;
    while (n_eta < eta.zetas.size() && eta.zetas[n_eta] <= z_cut - 0.5 + 1e-12) ++n_eta;
    const size_t n_fine = 4000;
    std::vector<double> fine = linspace(0.0, z_cut, n_fine + 1);
    std::vector<double> lmass(n_fine, neg_inf); // log of each interval's mass
    for (size_t q = 0; q < n_fine; ++q) {
        double a = fine[q], b = fine[q + 1];
        double la = eta.log_integrand(a), lb = eta.log_integrand(b);
        lmass[q] = std::log(0.5 * (b - a)) + logaddexp(la, lb);
    }
    eta.log_eta.assign(n_eta, neg_inf);
    std::vector<double> suffix(n_fine + 1, neg_inf);
    for (size_t q = n_fine; q-- > 0;) suffix[q] = logaddexp(suffix[q + 1], lmass[q]);
    for (size_t m = 0; m < n_eta; ++m) {
        // suffix sum from the first fine interval at or after zetas[m]
        size_t q0 = size_t(std::ceil(eta.zetas[m] / (z_cut / n_fine)));
        q0 = std::min(q0, n_fine);
        eta.log_eta[m] = suffix[q0];
    }
    eta.log_eta0 = eta.log_eta.empty() ? neg_inf : eta.log_eta.front();
    eta.tail_truncation_log = eta.log_integrand(z_cut);
    eta.eta_hat.resize(n_eta);
    for (size_t m = 0; m < n_eta; ++m) {
        double le = eta.log_eta[m] - eta.log_eta0;
        eta.eta_hat[m] = le < -700.0 ? 0.0 : std::exp(le);
    }
    return eta;
}

void BoundaryTraceReport::write_csv(const std::string& path) const {
    CsvWriter w(path, "x,rho,theta,rbar,sbar,dtheta_rbar,dtheta_sbar");
    for (size_t m = 0; m < xs.size(); ++m)
        w.row({xs[m], rhos[m], thetas[m], rbars[m], sbars[m], dth_rbar[m], dth_sbar[m]});
}

BoundaryTraceReport boundary_trace_check(const Evolution& ev, const TransformField& tf,
                                         const MetricGrid& metric, const PolarMetricGrid& polar,
                                         const CurvatureProfile& geo, const CurvatureProfile& pol,
                                         const OmegaDomain& om2, double epsilon, double mu,
                                         const std::vector<double>& xs_sample) {
    BoundaryTraceReport rep;
    rep.epsilon = epsilon;
    rep.mu = mu;

    std::vector<double> kbar_vals;
    for (double x : xs_sample) {
        const double tb = om2.t0(x);
        double r, s;
        if (!sample_invariants(ev, x, tb, r, s)) {
            ++rep.skipped;
            continue;
        }
        size_t i;
        try {
            i = tf.col(x);
        } catch (const std::invalid_argument&) {
            ++rep.skipped;
            continue;
        }
        double rho_v, theta_v, Phi_v;
        if (tf.xi[i] == 0.0 || !tf.sample(i, tb, rho_v, theta_v, Phi_v)) {
            ++rep.skipped;
            continue;
        }
        double G, G_rho;
        if (!polar_sample(polar, theta_v, rho_v, G, G_rho)) {
            ++rep.skipped;
            continue;
        }
        double B, B_t;
        column_interp(metric, geo, i, tb, B, B_t);
        const double k_geo = eval_curvature(geo, x, tb).k;
        const double k_pol = eval_curvature(pol, theta_v, rho_v).k;
        const double ch = std::cosh(Phi_v), th = std::tanh(Phi_v);
        PushforwardPoint p =
            pushforward_point(x, tb, r, s, B, rho_v, theta_v, th, -tf.xi[i] * B / ch,
                              tf.xi[i] / (G * ch), B * th / G, k_geo, k_pol, G);
        if (!p.ok) {
            ++rep.skipped;
            continue;
        }
        rep.xs.push_back(x);
        rep.rhos.push_back(rho_v);
        rep.thetas.push_back(theta_v);
        rep.rbars.push_back(p.rbar);
        rep.sbars.push_back(p.sbar);
        kbar_vals.push_back(k_pol);
    }

    const size_t n = rep.xs.size();
    rep.dth_rbar.assign(n, 0.0);
    rep.dth_sbar.assign(n, 0.0);
    if (n == 0) return rep;

    // Split into the two boundary branches by sign of x; derivatives along the
    // boundary curve by differences in theta.
    std::vector<size_t> branch[2];
    for (size_t m = 0; m < n; ++m) branch[rep.xs[m] > 0.0 ? 0 : 1].push_back(m);
    double mean_theta[2] = {0.0, 0.0};
    for (int b = 0; b < 2; ++b) {
        auto& idx = branch[b];
        std::sort(idx.begin(), idx.end(),
                  [&](size_t a, size_t c) { return rep.thetas[a] < rep.thetas[c]; });
        for (size_t m : idx) mean_theta[b] += rep.thetas[m];
        if (!idx.empty()) mean_theta[b] /= double(idx.size());
        for (size_t q = 0; q < idx.size(); ++q) {
            size_t lo = q > 0 ? idx[q - 1] : idx[q];
            size_t hi = q + 1 < idx.size() ? idx[q + 1] : idx[q];
            if (lo == hi) continue;
            double dth = rep.thetas[hi] - rep.thetas[lo];
            if (std::fabs(dth) < 1e-14) continue;
            rep.dth_rbar[idx[q]] = (rep.rbars[hi] - rep.rbars[lo]) / dth;
            rep.dth_sbar[idx[q]] = (rep.sbars[hi] - rep.sbars[lo]) / dth;
        }
    }

    rep.mag_ok = rep.sep_ok = rep.slope_ok = rep.spacelike_ok = true;
    for (size_t m = 0; m < n; ++m) {
        double mag = epsilon - std::max(std::fabs(rep.rbars[m]), std::fabs(rep.sbars[m]));
        double sep = (rep.rbars[m] - rep.sbars[m]) - epsilon;
        double slope = mu - std::max(std::fabs(rep.dth_rbar[m]), std::fabs(rep.dth_sbar[m]));
        rep.worst_mag_margin = std::min(rep.worst_mag_margin, mag);
        rep.worst_sep_margin = std::min(rep.worst_sep_margin, sep);
        rep.worst_slope_margin = std::min(rep.worst_slope_margin, slope);
        rep.min_separation = std::min(rep.min_separation, rep.rbars[m] - rep.sbars[m]);
        if (mag < 0.0) rep.mag_ok = false;
        if (sep < 0.0) rep.sep_ok = false;
        if (slope < 0.0) rep.slope_ok = false;
    }

    // Space-like inequalities: the lower-theta branch is theta1 and needs
    // d theta/d rho < kbar*sbar; the other is theta2 and needs > kbar*rbar.
    int b1 = mean_theta[0] <= mean_theta[1] ? 0 : 1;
    for (int b = 0; b < 2; ++b) {
        auto idx = branch[b];
        std::sort(idx.begin(), idx.end(),
                  [&](size_t a, size_t c) { return rep.rhos[a] < rep.rhos[c]; });
        for (size_t q = 0; q < idx.size(); ++q) {
            size_t lo = q > 0 ? idx[q - 1] : idx[q];
            size_t hi = q + 1 < idx.size() ? idx[q + 1] : idx[q];
            if (lo == hi) continue;
            double drho = rep.rhos[hi] - rep.rhos[lo];
            if (std::fabs(drho) < 1e-14) continue;
            double slope = (rep.thetas[hi] - rep.thetas[lo]) / drho;
            size_t m = idx[q];
            double margin = b == b1 ? kbar_vals[m] * rep.sbars[m] - slope
                                    : slope - kbar_vals[m] * rep.rbars[m];
            rep.worst_spacelike_margin = std::min(rep.worst_spacelike_margin, margin);
            if (margin < 0.0) rep.spacelike_ok = false;
        }
    }
    return rep;
}

} // namespace gcflow
