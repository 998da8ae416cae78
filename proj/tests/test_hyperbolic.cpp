#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gcflow/characteristics.hpp"
#include "gcflow/grid.hpp"
#include "gcflow/ode.hpp"
#include "gcflow/upwind.hpp"

using namespace gcflow;

namespace {

constexpr double kTStar = 0.8813735870195429; // arcsinh(1)

SourceCoeffs generic_coeffs() {
    SourceCoeffs c;
    c.bt_over_b = 0.3;
    c.bx_over_b = 0.0;
    c.k = 0.8;
    c.kt_over_k = -0.2;
    c.kx_over_k = 0.0;
    c.B = 1.2;
    c.B_t = 0.36;
    return c;
}

InvariantField constant_field(const std::vector<double>& xs, double r0, double s0) {
    std::vector<double> r(xs.size(), r0), s(xs.size(), s0);
    return make_field(xs, r, s);
}

} // namespace

TEST_CASE("sources vanish at the origin of state space") {
    SourcePair sp = source_terms(0.0, 0.0, generic_coeffs());
    CHECK(std::fabs(sp.f) <= 1e-15);
    CHECK(std::fabs(sp.g) <= 1e-15);
}

TEST_CASE("x-homogeneous coefficients give the swap symmetry g(r,s) = f(s,r)") {
    SourceCoeffs c = generic_coeffs(); // bx_over_b = kx_over_k = 0
    for (double r : {-0.4, 0.1, 0.9}) {
        for (double s : {-0.8, 0.05, 0.6}) {
            SourcePair a = source_terms(r, s, c);
            SourcePair b = source_terms(s, r, c);
            CHECK(a.g == doctest::Approx(b.f).epsilon(1e-14));
            CHECK(a.f == doctest::Approx(b.g).epsilon(1e-14));
        }
    }
}

TEST_CASE("source jacobian matches difference quotients") {
    SourceCoeffs c = generic_coeffs();
    c.bx_over_b = 0.15; // break the symmetry so all four entries are exercised
    c.kx_over_k = -0.07;
    double r = 0.35, s = -0.2, h = 1e-6;
    SourceJacobian J = source_jacobian(r, s, c);
    double fr = (source_terms(r + h, s, c).f - source_terms(r - h, s, c).f) / (2 * h);
    double fs = (source_terms(r, s + h, c).f - source_terms(r, s - h, c).f) / (2 * h);
    double gr = (source_terms(r + h, s, c).g - source_terms(r - h, s, c).g) / (2 * h);
    double gs = (source_terms(r, s + h, c).g - source_terms(r, s - h, c).g) / (2 * h);
    CHECK(J.f_r == doctest::Approx(fr).epsilon(1e-6));
    CHECK(J.f_s == doctest::Approx(fs).epsilon(1e-6));
    CHECK(J.g_r == doctest::Approx(gr).epsilon(1e-6));
    CHECK(J.g_s == doctest::Approx(gs).epsilon(1e-6));
}

TEST_CASE("source quotient agrees with (f-g)/(r-s) and is finite on the diagonal") {
    SourceCoeffs c = generic_coeffs();
    c.bx_over_b = 0.15;
    c.kx_over_k = -0.07;
    double r = 0.42, s = -0.13;
    SourcePair sp = source_terms(r, s, c);
    CHECK(source_quotient(r, s, c) == doctest::Approx((sp.f - sp.g) / (r - s)).epsilon(1e-12));

    double on_diag = source_quotient(0.3, 0.3, c);
    double near_diag = source_quotient(0.3 + 5e-8, 0.3 - 5e-8, c);
    CHECK(std::isfinite(on_diag));
    CHECK(on_diag == doctest::Approx(near_diag).epsilon(1e-5));
}

TEST_CASE("cell coefficient assembly wires the sample through") {
    CurvatureSample ks;
    ks.k = 0.9;
    ks.k_t = -0.18;
    ks.k_x = 0.09;
    ks.k_xx = 0.036;
    ks.k_xt = -0.01;
    CellCoeffs cc = make_cell_coeffs(ks, 1.5, 0.45, 0.02, 0.003, 0.001);
    CHECK(cc.c.k == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(cc.c.kt_over_k == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(cc.c.kx_over_k == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(cc.c.bt_over_b == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(cc.c.bx_over_b == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(cc.k_x == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(cc.dx.d_kx2 == doctest::Approx(0.018).epsilon(1e-14));
}

TEST_CASE("zero data is a discrete equilibrium and the mask erodes one cell per side") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = linspace(-0.5, 0.5, 11);
    MetricGrid m = solve_gauss_equation(p, xs, linspace(0.0, 1.0, 21), 0.01);
    InvariantField fld = constant_field(xs, 0.0, 0.0);
    std::vector<InvalidationEvent> events;
    SolveOptions opt;
    for (int n = 1; n <= 4; ++n) {
        step_upwind(fld, p, m, 0.01, opt, &events);
        CHECK(fld.count_valid() == 11 - 2 * size_t(n));
    }
    CHECK(events.empty()); // boundary erosion is not an interior event
    for (size_t i = 0; i < fld.n(); ++i)
        if (fld.valid[i]) {
            CHECK(std::fabs(fld.r[i]) <= 1e-15);
            CHECK(std::fabs(fld.s[i]) <= 1e-15);
        }
    // the eroded edge cells carry the boundary cause
    CHECK(CellCause(fld.cause[0]) == CellCause::boundary);
    CHECK(CellCause(fld.cause[1]) == CellCause::boundary);
}

TEST_CASE("time steps above the Courant bound are rejected with a suggestion") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = linspace(-0.5, 0.5, 21);
    MetricGrid m = solve_gauss_equation(p, xs, linspace(0.0, 1.0, 21), 0.01);
    InvariantField fld = constant_field(xs, 0.5, -0.5);
    CHECK(max_speed(fld, p) == doctest::Approx(0.5).epsilon(1e-12));
    std::vector<InvalidationEvent> events;
    SolveOptions opt;
    bool threw = false;
    try {
        step_upwind(fld, p, m, 0.1, opt, &events); // Courant number 1.0 > 0.4
    } catch (const CflViolation& v) {
        threw = true;
        CHECK(v.suggested_dt > 0.0);
        CHECK(v.suggested_dt <= 0.4 * 0.05 / 0.5 * (1 + 1e-9));
    }
    CHECK(threw);
}

TEST_CASE("x-independent evolution matches the single-column ODE") {
    CurvatureProfile p = CurvatureProfile::log_example();
    std::vector<double> xs = linspace(-8.0, 8.0, 321);
    MetricGrid m = solve_gauss_equation(p, xs, time_grid(35.0, 0.05, 1.0, 1.05), 0.01);
    InvariantField fld = constant_field(xs, 0.01, -0.01);
    Evolution ev = solve_cauchy(fld, p, m, 30.0, {10.0, 20.0, 30.0}, {});
    REQUIRE(ev.snapshots.size() >= 3);
    CHECK(ev.interior_survived);

    size_t mid = 160; // x = 0
    OdeSystem sys = OdeSystem::from_profile(p, 0.0, MetricColumn::from_grid(m, p, mid));
    double k0 = eval_curvature(p, 0.0, 0.0).k;
    OdeTrajectory tr = integrate_riemann_ode(sys, 0.01 * k0, -0.01 * k0, 30.0);
    REQUIRE_FALSE(tr.stopped_early);

    for (const InvariantField& snap : ev.snapshots) {
        REQUIRE(snap.valid[mid]);
        double w, z;
        tr.eval(snap.t, w, z);
        double k = eval_curvature(p, 0.0, snap.t).k;
        CHECK(std::fabs(snap.r[mid] - w / k) <= 5e-4);
        CHECK(std::fabs(snap.s[mid] - z / k) <= 5e-4);
        // the profile never develops x-structure
        REQUIRE(snap.valid[mid - 5]);
        CHECK(snap.r[mid - 5] == doctest::Approx(snap.r[mid]).epsilon(1e-12));
    }
}

TEST_CASE("time integration is second order once the spatial error vanishes") {
    CurvatureProfile p = CurvatureProfile::log_example();
    std::vector<double> xs = linspace(-8.0, 8.0, 801);
    MetricGrid m = solve_gauss_equation(p, xs, time_grid(3.0, 0.05, 1.0, 1.05), 0.01);
    size_t mid = 400;

    OdeSystem sys = OdeSystem::from_profile(p, 0.0, MetricColumn::from_grid(m, p, mid));
    double k0 = eval_curvature(p, 0.0, 0.0).k;
    OdeOptions oo;
    oo.dt = 1e-4;
    OdeTrajectory ref = integrate_riemann_ode(sys, 0.01 * k0, -0.01 * k0, 2.0, oo);
    double w_ref, z_ref;
    ref.eval(2.0, w_ref, z_ref);
    double k2 = eval_curvature(p, 0.0, 2.0).k;

    auto run = [&](double dt_cap) {
        SolveOptions opt;
        opt.dt_max_abs = dt_cap;
        InvariantField fld = constant_field(xs, 0.01, -0.01);
        Evolution ev = solve_cauchy(fld, p, m, 2.0, {2.0}, opt);
        const InvariantField& fin = ev.snapshots.back();
        REQUIRE(fin.valid[mid]);
        return std::fabs(fin.r[mid] - w_ref / k2);
    };
    double e_coarse = run(0.02);
    double e_fine = run(0.01);
    REQUIRE(e_fine > 1e-14);
    double order = std::log2(e_coarse / e_fine);
    CHECK(order >= 1.9);
    CHECK(order <= 2.5);
}

TEST_CASE("manufactured solution converges under joint refinement") {
    // Constant curvature so B = cosh t is exact; the forcing makes
    // r* = 0.01(2+sin(x-t)), s* = -0.01(2+cos(x+t)) an exact solution.
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    auto r_star = [](double x, double t) { return 0.01 * (2.0 + std::sin(x - t)); };
    auto s_star = [](double x, double t) { return -0.01 * (2.0 + std::cos(x + t)); };

    auto forcing = [&](double x, double t) {
        SourceCoeffs c;
        c.B = std::cosh(t);
        c.B_t = std::sinh(t);
        c.bt_over_b = std::tanh(t);
        c.k = 1.0;
        double r = r_star(x, t), s = s_star(x, t);
        double r_t = -0.01 * std::cos(x - t), r_x = 0.01 * std::cos(x - t);
        double s_t = 0.01 * std::sin(x + t), s_x = 0.01 * std::sin(x + t);
        SourcePair sp = source_terms(r, s, c);
        return std::make_pair(r_t + c.k * s * r_x - sp.f, s_t + c.k * r * s_x - sp.g);
    };

    auto sup_err = [&](size_t n, double dt_cap) {
        std::vector<double> xs = linspace(-2.0, 2.0, n);
        MetricGrid m = solve_gauss_equation(p, xs, linspace(0.0, 1.0, 41), 0.005);
        std::vector<double> r0(n), s0(n);
        for (size_t i = 0; i < n; ++i) {
            r0[i] = r_star(xs[i], 0.0);
            s0[i] = s_star(xs[i], 0.0);
        }
        SolveOptions opt;
        opt.dt_max_abs = dt_cap;
        opt.evolve_tilde = false;
        opt.extra_source = forcing;
        Evolution ev = solve_cauchy(make_field(xs, r0, s0), p, m, 0.5, {0.5}, opt);
        const InvariantField& fin = ev.snapshots.back();
        double worst = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (!fin.valid[i] || std::fabs(xs[i]) > 0.75) continue;
            worst = std::max(worst, std::fabs(fin.r[i] - r_star(xs[i], 0.5)));
            worst = std::max(worst, std::fabs(fin.s[i] - s_star(xs[i], 0.5)));
        }
        return worst;
    };

    double e_h = sup_err(81, 0.025);
    double e_h2 = sup_err(161, 0.0125);
    REQUIRE(e_h2 > 1e-13);
    double order = std::log2(e_h / e_h2);
    CHECK(order >= 0.9); // one-sided differences: first order in space
}

TEST_CASE("co-evolved derivative fields track a difference-quotient reconstruction") {
    CurvatureProfile p = CurvatureProfile::log_example();
    auto run = [&](double dx) {
        size_t n = size_t(std::lround(16.0 / dx)) + 1;
        std::vector<double> xs = linspace(-8.0, 8.0, n);
        MetricGrid m = solve_gauss_equation(p, xs, time_grid(5.0, 0.05, 1.0, 1.05), 0.01);
        std::vector<double> r0(n), s0(n);
        for (size_t i = 0; i < n; ++i) {
            r0[i] = 0.01 * std::exp(-xs[i] * xs[i]);
            s0[i] = -r0[i];
        }
        Evolution ev = solve_cauchy(make_field(xs, r0, s0), p, m, 3.0, {3.0}, {});
        const InvariantField& fin = ev.snapshots.back();
        auto evolved = compute_tilde(fin, TildeMode::integrated);
        auto fd = compute_tilde(fin, TildeMode::finite_difference);
        double worst = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (!fin.valid[i]) continue;
            worst = std::max(worst, std::fabs(evolved.first[i] - fd.first[i]));
            worst = std::max(worst, std::fabs(evolved.second[i] - fd.second[i]));
        }
        return worst;
    };
    double gap_coarse = run(0.05);
    double gap_fine = run(0.025);
    CHECK(gap_coarse <= 2e-5);
    CHECK(gap_fine <= gap_coarse);
}

TEST_CASE("order-one data on constant curvature loses cells at the hyperbolic blowup time") {
    // Wide enough that domain-of-dependence erosion cannot consume the grid
    // before the interior overflows.
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = linspace(-4.0, 4.0, 201);
    MetricGrid m = solve_gauss_equation(p, xs, linspace(0.0, 1.2, 25), 0.01);
    InvariantField fld = constant_field(xs, 1.0, -1.0);
    Evolution ev = solve_cauchy(fld, p, m, 1.0, {1.0}, {});
    CHECK_FALSE(ev.interior_survived);
    REQUIRE_FALSE(ev.events.empty());
    CHECK(std::fabs(ev.first_invalidation_time() - kTStar) <= 0.05);
    CHECK(ev.events.front().cause == CellCause::overflow);
}

TEST_CASE("characteristic triangle of a quiescent field is a vertical segment") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = linspace(-1.0, 1.0, 101);
    MetricGrid m = solve_gauss_equation(p, xs, linspace(0.0, 0.6, 13), 0.01);
    InvariantField fld = constant_field(xs, 0.0, 0.0);
    Evolution ev = solve_cauchy(fld, p, m, 0.5, {0.1, 0.2, 0.3, 0.4, 0.5}, {});
    CharTriangle tri = characteristic_triangle(ev, p, m, 0.0, 0.5, 0.1);
    CHECK_FALSE(tri.truncated);
    CHECK(tri.taus.front() == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(tri.taus.back() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::fabs(tri.width_at_base()) <= 1e-12);
    CHECK(tri.H >= 0.0);
    CHECK(std::isfinite(tri.H));
}

TEST_CASE("characteristic triangle width reflects the invariant separation") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = linspace(-1.0, 1.0, 201);
    MetricGrid m = solve_gauss_equation(p, xs, linspace(0.0, 0.6, 13), 0.01);
    double c = 0.01;
    InvariantField fld = constant_field(xs, c, -c);
    Evolution ev = solve_cauchy(fld, p, m, 0.5, linspace(0.05, 0.5, 10), {});
    CharTriangle tri = characteristic_triangle(ev, p, m, 0.0, 0.5, 0.3);
    CHECK_FALSE(tri.truncated);
    // edge speeds are close to +-k·c, so the base spans about 2c(t*-t0)
    CHECK(tri.width_at_base() == doctest::Approx(2.0 * c * 0.2).epsilon(0.15));
    for (size_t i = 0; i < tri.taus.size(); ++i) CHECK(tri.left[i] <= tri.right[i] + 1e-15);
    CHECK(tri.base_lo == doctest::Approx(tri.left.front()).epsilon(1e-12));
    CHECK(tri.base_hi == doctest::Approx(tri.right.front()).epsilon(1e-12));
}

TEST_CASE("bilinear snapshot sampling respects the valid region") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = linspace(-1.0, 1.0, 21);
    MetricGrid m = solve_gauss_equation(p, xs, linspace(0.0, 0.5, 11), 0.01);
    InvariantField fld = constant_field(xs, 0.02, -0.02);
    Evolution ev = solve_cauchy(fld, p, m, 0.4, {0.1, 0.2, 0.3, 0.4}, {});
    double r, s;
    CHECK(sample_invariants(ev, 0.0, 0.25, r, s));
    CHECK(r == doctest::Approx(0.02).epsilon(0.05));
    CHECK(s == doctest::Approx(-0.02).epsilon(0.05));
    CHECK_FALSE(sample_invariants(ev, 0.0, 5.0, r, s));   // beyond the last snapshot
    CHECK_FALSE(sample_invariants(ev, 0.99, 0.4, r, s));  // eroded by then
}
