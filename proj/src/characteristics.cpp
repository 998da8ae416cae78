#include "gcflow/characteristics.hpp"

#include <algorithm>
#include <cmath>

namespace gcflow {

namespace {

// Linear interpolation of one snapshot row; ok only between two valid cells.
bool row_sample(const InvariantField& f, double x, double& r, double& s) {
    const auto& xs = f.xs;
    if (xs.size() < 2 || x < xs.front() || x > xs.back()) return false;
    size_t i = lower_index(xs, x);
    if (i + 1 >= xs.size()) i = xs.size() - 2;
    if (!f.valid[i] || !f.valid[i + 1]) return false;
    double u = (x - xs[i]) / (xs[i + 1] - xs[i]);
    r = (1.0 - u) * f.r[i] + u * f.r[i + 1];
    s = (1.0 - u) * f.s[i] + u * f.s[i + 1];
    return true;
}

} // namespace

bool sample_invariants(const Evolution& ev, double x, double t, double& r, double& s) {
    const auto& sn = ev.snapshots;
    if (sn.empty()) return false;
    // Closed time range with a little slack so apexes that sit exactly on the
    // last snapshot survive roundoff.
    const double slack = 1e-9 * std::max(1.0, std::fabs(sn.back().t));
    if (t < sn.front().t - slack || t > sn.back().t + slack) return false;
    if (t <= sn.front().t) return row_sample(sn.front(), x, r, s);
    if (t >= sn.back().t) return row_sample(sn.back(), x, r, s);
    size_t lo = 0, hi = sn.size() - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        (sn[mid].t <= t ? lo : hi) = mid;
    }
    double r0, s0, r1, s1;
    if (!row_sample(sn[lo], x, r0, s0) || !row_sample(sn[hi], x, r1, s1)) return false;
    double u = (t - sn[lo].t) / (sn[hi].t - sn[lo].t);
    r = (1.0 - u) * r0 + u * r1;
    s = (1.0 - u) * s0 + u * s1;
    return true;
}

namespace {

// Derivative-system coefficient matrix a_ij at one point, from interpolated
// invariants and analytic/metric coefficients.
bool a_matrix(const Evolution& ev, const CurvatureProfile& prof, const MetricSlice& sl,
              const std::vector<double>& xs, double x, double t, double a[4], double lam[2]) {
    double r, s;
    if (!sample_invariants(ev, x, t, r, s)) return false;
    if (xs.size() < 2 || x < xs.front() || x > xs.back()) return false;
    size_t i = lower_index(xs, x);
    if (i + 1 >= xs.size()) i = xs.size() - 2;
    double u = (x - xs[i]) / (xs[i + 1] - xs[i]);
    auto lin = [&](const std::vector<double>& v) { return (1.0 - u) * v[i] + u * v[i + 1]; };
    CurvatureSample cs = eval_curvature(prof, x, t);
    CellCoeffs cc = make_cell_coeffs(cs, lin(sl.B), lin(sl.B_t), lin(sl.dx_lnB), lin(sl.dxx_lnB),
                                     lin(sl.dxdt_lnB));
    SourceJacobian J = source_jacobian(r, s, cc.c);
    double Q = source_quotient(r, s, cc.c);
    a[0] = Q + J.f_r - cc.k_x * s;
    a[1] = J.f_s;
    a[2] = J.g_r;
    a[3] = Q + J.g_s - cc.k_x * r;
    lam[0] = cs.k * s;
    lam[1] = cs.k * r;
    return true;
}

} // namespace

CharTriangle characteristic_triangle(const Evolution& ev, const CurvatureProfile& prof,
                                     const MetricGrid& metric, double x_star, double t_star,
                                     double t0, size_t n_levels) {
    if (!(t0 < t_star)) throw std::invalid_argument("need t0 < t_star");
    if (n_levels < 2) n_levels = 2;

    CharTriangle tri;
    tri.apex_x = x_star;
    tri.apex_t = t_star;
    tri.taus = linspace(t0, t_star, n_levels + 1);
    tri.left.assign(n_levels + 1, x_star);
    tri.right.assign(n_levels + 1, x_star);

    // Backward midpoint integration of dX/dtau = lambda(X, tau). The left edge
    // rides the faster speed k*r, the right edge the slower k*s.
    auto speed = [&](double x, double t, bool fast, double& out) {
        double r, s;
        if (!sample_invariants(ev, x, t, r, s)) return false;
        out = eval_curvature(prof, x, t).k * (fast ? r : s);
        return true;
    };
    for (int fast = 0; fast < 2; ++fast) {
        std::vector<double>& curve = fast ? tri.left : tri.right;
        double x = x_star;
        for (size_t j = n_levels; j-- > 0;) {
            double th = tri.taus[j + 1], tl = tri.taus[j], h = th - tl;
            double v1;
            if (!speed(x, th, fast, v1)) {
                tri.truncated = true;
                for (size_t jj = 0; jj <= j; ++jj) curve[jj] = x;
                break;
            }
            double xm = x - 0.5 * h * v1;
            double v2;
            if (!speed(xm, th - 0.5 * h, fast, v2)) v2 = v1;
            x -= h * v2;
            curve[j] = x;
        }
    }
    for (size_t j = 0; j <= n_levels; ++j)
        if (tri.left[j] > tri.right[j]) std::swap(tri.left[j], tri.right[j]);
    tri.base_lo = tri.left.front();
    tri.base_hi = tri.right.front();

    // H: sample the coefficient matrix and speeds across each level, with
    // centered differences in x for the derivative entries.
    const double hx = 0.5 * (metric.xs.size() > 1 ? metric.xs[1] - metric.xs[0] : 1e-3);
    double H = 0.0;
    const size_t nx_samples = 17;
    for (size_t j = 0; j <= n_levels; ++j) {
        double t = tri.taus[j];
        MetricSlice sl = metric_slice(metric, prof, t);
        for (size_t q = 0; q < nx_samples; ++q) {
            double u = nx_samples == 1 ? 0.5 : double(q) / double(nx_samples - 1);
            double x = tri.left[j] + u * (tri.right[j] - tri.left[j]);
            double a[4], lam[2], ap[4], lp[2], am[4], lm[2];
            if (!a_matrix(ev, prof, sl, metric.xs, x, t, a, lam)) continue;
            for (double v : a) H = std::max(H, std::fabs(v));
            if (a_matrix(ev, prof, sl, metric.xs, x + hx, t, ap, lp) &&
                a_matrix(ev, prof, sl, metric.xs, x - hx, t, am, lm)) {
                for (int c = 0; c < 4; ++c)
                    H = std::max(H, std::fabs(ap[c] - am[c]) / (2.0 * hx));
                for (int c = 0; c < 2; ++c)
                    H = std::max(H, std::fabs(lp[c] - lm[c]) / (2.0 * hx));
            }
        }
    }
    tri.H = H;
    return tri;
}

} // namespace gcflow
