#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gcflow/grid.hpp"
#include "gcflow/hypotheses.hpp"
#include "gcflow/metric.hpp"

using namespace gcflow;

namespace {

// Frozen reference values, computed independently of the library.
constexpr double kLogK00 = 1.0406844905028039;   // 1/(2 ln^2 2)
constexpr double kInvLn2 = 1.4426950408889634;   // ∫_0^∞ dt/((t+2)ln²(t+2))
constexpr double kCosh1 = 1.5430806348152437;
constexpr double kSinh1 = 1.1752011936438014;

std::vector<double> uniform(double a, double b, size_t n) { return linspace(a, b, n); }

} // namespace

TEST_CASE("constant profile evaluates to its parameters everywhere") {
    CurvatureProfile p = CurvatureProfile::constant(2.5);
    for (double x : {-3.0, 0.0, 1.7}) {
        for (double t : {0.0, 0.5, 40.0}) {
            CurvatureSample s = eval_curvature(p, x, t);
            CHECK(s.k == doctest::Approx(2.5).epsilon(1e-15));
            CHECK(std::fabs(s.k_t) <= 1e-15);
            CHECK(std::fabs(s.k_x) <= 1e-15);
            CHECK(s.K == doctest::Approx(-6.25).epsilon(1e-15));
        }
    }
}

TEST_CASE("slow-decay example profile hits its closed-form values") {
    CurvatureProfile p = CurvatureProfile::log_example();
    CurvatureSample s0 = eval_curvature(p, 0.0, 0.0);
    CHECK(s0.k == doctest::Approx(kLogK00).epsilon(1e-14));
    CHECK(s0.K == doctest::Approx(-kLogK00 * kLogK00).epsilon(1e-13));

    // k(0,1) = 1/(3 ln² 3)
    CHECK(eval_curvature(p, 0.0, 1.0).k == doctest::Approx(0.2761784832300743).epsilon(1e-14));

    // d/dt [ (t+2) ln²(t+2) ] = ln²(t+2) + 2 ln(t+2), so
    // k_t = -(ln² + 2 ln)/( (t+2) ln²(t+2) )².
    double L = std::log(2.0);
    double expect_kt = -(L * L + 2.0 * L) / std::pow(2.0 * L * L, 2.0);
    CHECK(s0.k_t == doctest::Approx(expect_kt).epsilon(1e-12));
}

TEST_CASE("power and reciprocal profiles evaluate correctly") {
    CurvatureProfile pw = CurvatureProfile::power(1.0, 0.25);
    CurvatureSample s = eval_curvature(pw, 0.3, 0.0);
    CHECK(s.k == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.k_t == doctest::Approx(-1.25).epsilon(1e-12));
    CHECK(eval_curvature(pw, 0.0, 3.0).k == doctest::Approx(std::pow(4.0, -1.25)).epsilon(1e-13));

    CurvatureProfile ef = CurvatureProfile::efimov();
    CHECK(eval_curvature(ef, 0.0, 1.0).k == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(eval_curvature(ef, 0.0, 1.0).k_t == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("analytic partials match central differences on a modulated profile") {
    CurvatureProfile p = CurvatureProfile::log_example().with_modulation({0.5, 2.0});
    double x = 0.7, t = 2.3;
    CurvatureSample s = eval_curvature(p, x, t);

    double h = 1e-5;
    auto kk = [&](double xx, double tt) { return eval_curvature(p, xx, tt).k; };
    double fd_kt = (kk(x, t + h) - kk(x, t - h)) / (2.0 * h);
    double fd_kx = (kk(x + h, t) - kk(x - h, t)) / (2.0 * h);
    CHECK(s.k_t == doctest::Approx(fd_kt).epsilon(1e-7));
    CHECK(s.k_x == doctest::Approx(fd_kx).epsilon(1e-7));

    double hx = 1e-4;
    double fd_kxx = (kk(x + hx, t) - 2.0 * kk(x, t) + kk(x - hx, t)) / (hx * hx);
    CHECK(s.k_xx == doctest::Approx(fd_kxx).epsilon(1e-5));

    auto kx_of = [&](double xx, double tt) { return eval_curvature(p, xx, tt).k_x; };
    double fd_kxt = (kx_of(x, t + h) - kx_of(x, t - h)) / (2.0 * h);
    CHECK(s.k_xt == doctest::Approx(fd_kxt).epsilon(1e-6));
}

TEST_CASE("custom profiles fall back to difference quotients for partials") {
    auto fk = [](double x, double t) { return std::exp(-t) * (1.0 + 0.1 * x * x) + 0.5; };
    CurvatureProfile p = CurvatureProfile::custom(fk);
    CurvatureSample s = eval_curvature(p, 0.8, 1.2);
    double kt_exact = -std::exp(-1.2) * (1.0 + 0.1 * 0.64);
    double kx_exact = std::exp(-1.2) * 0.2 * 0.8;
    CHECK(s.k == doctest::Approx(fk(0.8, 1.2)).epsilon(1e-15));
    CHECK(s.k_t == doctest::Approx(kt_exact).epsilon(1e-6));
    CHECK(s.k_x == doctest::Approx(kx_exact).epsilon(1e-6));
}

TEST_CASE("modulation envelope bounds") {
    XModulation up{0.5, 2.0};
    CHECK(up.m(0.0) == doctest::Approx(1.5).epsilon(1e-15));
    CurvatureProfile p = CurvatureProfile::log_example().with_modulation(up);
    CHECK(p.mod_max() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(p.mod_min() == doctest::Approx(1.0).epsilon(1e-12));

    CurvatureProfile q = CurvatureProfile::log_example().with_modulation({-0.3, 1.0});
    CHECK(q.mod_max() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q.mod_min() == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("curvature tail integrals reproduce closed forms") {
    double inf = std::numeric_limits<double>::infinity();

    TailIntegral log_tail = integral_base_k(CurvatureProfile::log_example(), 0.0, inf);
    CHECK(log_tail.finite);
    CHECK(std::fabs(log_tail.value + log_tail.remainder_bound - kInvLn2) <= 1e-8);

    // ∫_0^∞ (1+t)^(-1-δ) dt = 1/δ
    TailIntegral pow_tail = integral_base_k(CurvatureProfile::power(1.0, 0.25), 0.0, inf);
    CHECK(pow_tail.finite);
    CHECK(std::fabs(pow_tail.value + pow_tail.remainder_bound - 4.0) <= 1e-8);

    TailIntegral ef_tail = integral_base_k(CurvatureProfile::efimov(), 0.0, inf);
    CHECK_FALSE(ef_tail.finite);
    TailIntegral const_tail = integral_base_k(CurvatureProfile::constant(1.0), 0.0, inf);
    CHECK_FALSE(const_tail.finite);

    // the sup over x scales the base integral by the modulation maximum
    CurvatureProfile mod = CurvatureProfile::log_example().with_modulation({0.5, 2.0});
    TailIntegral sup_tail = sup_integral_k(mod, 0.0, inf);
    CHECK(sup_tail.finite);
    CHECK(sup_tail.value == doctest::Approx(1.5 * log_tail.value).epsilon(1e-10));
}

TEST_CASE("decay conditions: slow-decay example passes, counterexamples fail") {
    HypothesisReport log_rep = check_hypotheses(CurvatureProfile::log_example(), 1.0, 0.25);
    CHECK(log_rep.integral_ok);
    CHECK(log_rep.kt_ok);
    CHECK(log_rep.kt_end < 0.01); // k·t ~ 1/ln²t at the probe end
    CHECK(log_rep.monotone_ok);
    CHECK(log_rep.h1_ok);
    CHECK(log_rep.h2_ok);
    CHECK(log_rep.h3_ok);

    HypothesisReport ef_rep = check_hypotheses(CurvatureProfile::efimov(), 1.0, 0.25);
    CHECK_FALSE(ef_rep.integral_ok);
    CHECK_FALSE(ef_rep.kt_ok); // k·t -> 1 for k = 1/(1+t)
    CHECK(ef_rep.kt_end > 0.5);
    CHECK_FALSE(ef_rep.h1_ok);

    HypothesisReport c_rep = check_hypotheses(CurvatureProfile::constant(1.0), 1.0, 0.25);
    CHECK_FALSE(c_rep.integral_ok);
    CHECK_FALSE(c_rep.kt_ok);
    CHECK(c_rep.h3_ok); // constant curvature still has the sign-definite sources
    CHECK_FALSE(c_rep.h1_ok);

    // Pure power decay sits in the fast-decay regime the slow-decay
    // monotonicity clause is meant to exclude.
    HypothesisReport pw_rep = check_hypotheses(CurvatureProfile::power(1.0, 0.25), 1.0, 0.25);
    CHECK(pw_rep.fast_decay_regime);
    CHECK_FALSE(pw_rep.monotone_ok);
    CHECK_FALSE(pw_rep.h1_ok);
}

TEST_CASE("geodesic-parallel metric: constant curvature gives B = cosh t") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = {-0.5, 0.0, 0.5};
    MetricGrid m = solve_gauss_equation(p, xs, uniform(0.0, 1.0, 21), 0.01);

    REQUIRE(m.valid_rows.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
        REQUIRE(m.valid_rows[i] == 21);
        CHECK(m.B.at(i, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::fabs(m.B_t.at(i, 0)) <= 1e-15);
        CHECK(m.B.at(i, 20) == doctest::Approx(kCosh1).epsilon(1e-8));
        CHECK(m.B_t.at(i, 20) == doctest::Approx(kSinh1).epsilon(1e-8));
        // no x-dependence anywhere
        CHECK(std::fabs(m.dx_lnB.at(i, 20)) <= 1e-12);
    }
    // B_t grows monotonically from rest
    for (size_t j = 1; j < 21; ++j) CHECK(m.B_t.at(1, j) > m.B_t.at(1, j - 1));
    CHECK(m.det_g(1, 20) == doctest::Approx(kCosh1 * kCosh1).epsilon(1e-7));
}

TEST_CASE("metric integrator converges at fourth order in the substep") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = {0.0};
    std::vector<double> ts = uniform(0.0, 1.0, 11);
    double e_coarse =
        std::fabs(solve_gauss_equation(p, xs, ts, 0.02).B.at(0, 10) - kCosh1);
    double e_fine =
        std::fabs(solve_gauss_equation(p, xs, ts, 0.01).B.at(0, 10) - kCosh1);
    REQUIRE(e_fine > 1e-13); // stay above roundoff so the ratio is meaningful
    double ratio = e_coarse / e_fine;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("cubic interpolation within a metric column is consistent") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = {0.0};
    MetricGrid m = solve_gauss_equation(p, xs, uniform(0.0, 1.0, 21), 0.005);
    double B, B_t;
    column_interp(m, p, 0, 0.575, B, B_t);
    CHECK(B == doctest::Approx(std::cosh(0.575)).epsilon(1e-7));
    CHECK(B_t == doctest::Approx(std::sinh(0.575)).epsilon(1e-6));
    // slice agrees with the column at a grid node
    MetricSlice sl = metric_slice(m, p, 0.5);
    CHECK(sl.B[0] == doctest::Approx(std::cosh(0.5)).epsilon(1e-8));
}

TEST_CASE("long-time metric behavior: slow decay linearizes, constant does not") {
    CurvatureProfile logp = CurvatureProfile::log_example();
    std::vector<double> xs = uniform(-0.5, 0.5, 5);
    MetricGrid m = solve_gauss_equation(logp, xs, time_grid(200.0, 0.05, 1.0, 1.05), 0.01);
    AsymptoticsReport rep = verify_metric_asymptotics(m, logp);
    CHECK(rep.e_decreasing);
    CHECK(rep.bt_band_ok);
    CHECK(rep.C1 > 0.0);
    CHECK(rep.C2 >= rep.C1);
    REQUIRE(rep.e_sup.size() >= 2);
    CHECK(rep.e_sup.back() < rep.e_sup.front());

    CurvatureProfile cp = CurvatureProfile::constant(1.0);
    MetricGrid mc = solve_gauss_equation(cp, xs, uniform(0.0, 5.0, 101), 0.01);
    AsymptoticsReport rc = verify_metric_asymptotics(mc, cp);
    CHECK_FALSE(rc.asymptotics_ok);
    CHECK(rc.e_final > 0.5); // t·B_t/B - 1 -> t - 1 for B = cosh t
}

TEST_CASE("polar metric: constant curvature gives G = sinh rho") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> thetas = {0.0, 1.0, 2.0};
    PolarMetricGrid g = solve_polar_gauss(p, thetas, uniform(0.0, 1.0, 21), 0.005);
    for (size_t i = 0; i < thetas.size(); ++i) {
        REQUIRE(g.valid_rows[i] == 21);
        CHECK(std::fabs(g.G.at(i, 0)) <= 1e-15);
        CHECK(g.G_rho.at(i, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(g.G.at(i, 20) == doctest::Approx(kSinh1).epsilon(1e-8));
        CHECK(g.G_rho.at(i, 20) == doctest::Approx(kCosh1).epsilon(1e-8));
    }
    CHECK(g.b0 >= 1.0);
}

TEST_CASE("polar metric: zero curvature collapses to the Euclidean cone") {
    auto zero = [](double, double) { return 0.0; };
    CurvatureProfile p = CurvatureProfile::custom(zero, zero, zero);
    PolarMetricGrid g = solve_polar_gauss(p, {0.0, 1.5}, uniform(0.0, 4.0, 41), 0.01);
    for (size_t j = 0; j < 41; ++j) {
        CHECK(g.G.at(0, j) == doctest::Approx(g.rhos[j]).epsilon(1e-12));
        CHECK(g.G_rho.at(1, j) == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(g.b0 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("polar comparison bands hold for an integrable radial profile") {
    // same slow-decay law, read as a function of the radius
    CurvatureProfile p = CurvatureProfile::log_example();
    std::vector<double> thetas = uniform(0.0, 3.0, 4);
    PolarMetricGrid g = solve_polar_gauss(p, thetas, time_grid(1000.0, 0.05, 1.0, 1.05), 0.01);
    PolarBandReport band = check_polar_bands(g, 1000.0);
    CHECK(g.b0 > 1.0);
    CHECK(band.G_rho_in_band);
    CHECK(band.G_in_band);
}
