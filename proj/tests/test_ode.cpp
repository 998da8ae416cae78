#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gcflow/grid.hpp"
#include "gcflow/ode.hpp"

using namespace gcflow;

namespace {

// Frozen reference values, computed independently of the library.
constexpr double kTStar = 0.8813735870195429;    // arcsinh(1) = ln(1+sqrt 2)
constexpr double kW05 = 1.1716482275514208;      // 1/sqrt(1 - sinh² 0.5)

OdeSystem unit_system() { return OdeSystem::constant_k(1.0); }

} // namespace

TEST_CASE("special closed-form solution reproduces its initial data") {
    ClosedForm f = closed_form_special_solution(0.8, -0.3, 1.0, 0.0, 1.0, 1.0);
    REQUIRE(f.valid);
    CHECK(f.w == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(f.z == doctest::Approx(-0.3).epsilon(1e-14));
}

TEST_CASE("antisymmetric data stays antisymmetric in the closed form") {
    // For w0 = -z0 = 1 on constant curvature the solution collapses to
    // w(t) = 1/sqrt(1 - sinh² t), z = -w.
    ClosedForm f = closed_form_special_solution(1.0, -1.0, std::cosh(0.5), std::sinh(0.5), 1.0,
                                                1.0);
    REQUIRE(f.valid);
    CHECK(f.w == doctest::Approx(-f.z).epsilon(1e-13));
    CHECK(f.w == doctest::Approx(kW05).epsilon(1e-12));
}

TEST_CASE("closed form loses validity exactly at the hyperbolic blowup time") {
    // radicand 4B⁴ - 4B⁴Bp² vanishes when sinh t = 1
    double before = 0.99 * kTStar, after = 1.01 * kTStar;
    ClosedForm ok = closed_form_special_solution(1.0, -1.0, std::cosh(before), std::sinh(before),
                                                 1.0, 1.0);
    ClosedForm bad = closed_form_special_solution(1.0, -1.0, std::cosh(after), std::sinh(after),
                                                  1.0, 1.0);
    CHECK(ok.valid);
    CHECK_FALSE(bad.valid);
    CHECK(ok.radicand > 0.0);
    CHECK(bad.radicand < 0.0);
}

TEST_CASE("product law matches the closed-form product") {
    double B = std::cosh(0.4), Bp = std::sinh(0.4);
    ClosedForm f = closed_form_special_solution(0.6, -0.9, B, Bp, 1.0, 1.0);
    REQUIRE(f.valid);
    double X = closed_form_product(0.6, -0.9, B, Bp, 1.0, 1.0);
    CHECK(X == doctest::Approx(f.w * f.z).epsilon(1e-12));
}

TEST_CASE("zero data is an equilibrium of the invariant system") {
    OdeTrajectory tr = integrate_riemann_ode(unit_system(), 0.0, 0.0, 2.0);
    CHECK_FALSE(tr.stopped_early);
    for (size_t i = 0; i < tr.ts.size(); ++i) {
        CHECK(std::fabs(tr.ws[i]) <= 1e-15);
        CHECK(std::fabs(tr.zs[i]) <= 1e-15);
    }
}

TEST_CASE("integrated invariants track the closed form on constant curvature") {
    OdeSystem sys = unit_system();
    double t_end = 0.7 * kTStar;
    OdeTrajectory tr = integrate_riemann_ode(sys, 1.0, -1.0, t_end);
    REQUIRE_FALSE(tr.stopped_early);
    double worst = 0.0;
    for (size_t i = 0; i < tr.ts.size(); ++i) {
        double t = tr.ts[i];
        ClosedForm f = closed_form_special_solution(1.0, -1.0, std::cosh(t), std::sinh(t), 1.0,
                                                    1.0);
        REQUIRE(f.valid);
        worst = std::max(worst, std::fabs(tr.ws[i] - f.w) / std::fabs(f.w));
        worst = std::max(worst, std::fabs(tr.zs[i] - f.z) / std::fabs(f.z));
    }
    CHECK(worst <= 1e-6);

    // dense output interpolates between nodes to comparable accuracy
    double w, z;
    tr.eval(0.5, w, z);
    CHECK(w == doctest::Approx(kW05).epsilon(1e-7));
    CHECK(z == doctest::Approx(-kW05).epsilon(1e-7));
}

TEST_CASE("antisymmetry is preserved by the integrator") {
    OdeTrajectory tr = integrate_riemann_ode(unit_system(), 0.5, -0.5, 0.6);
    for (size_t i = 0; i < tr.ts.size(); ++i) CHECK(std::fabs(tr.ws[i] + tr.zs[i]) <= 1e-12);
}

TEST_CASE("blowup detector finds the radicand root of the special solution") {
    BlowupReport rep = detect_blowup(unit_system(), 1.0, -1.0, 2.0);
    CHECK(rep.blew_up);
    CHECK(rep.mechanism == "radicand_root");
    CHECK(std::fabs(rep.t_star - kTStar) <= 1e-3);
}

TEST_CASE("blowup detector reports global existence for small data on decaying curvature") {
    // Slow-decay curvature with small symmetric data stays bounded far beyond
    // the constant-curvature blowup time.
    CurvatureProfile p = CurvatureProfile::log_example();
    std::vector<double> xs = {0.0};
    MetricGrid m = solve_gauss_equation(p, xs, time_grid(1000.0, 0.05, 1.0, 1.05), 0.01);
    OdeSystem sys = OdeSystem::from_profile(p, 0.0, MetricColumn::from_grid(m, p, 0));

    BlowupReport rep = detect_blowup(sys, 0.01, -0.01, 1000.0);
    CHECK_FALSE(rep.blew_up);
    CHECK(rep.mechanism == "none");
    CHECK(rep.sup_state < 0.1);

    // and the w/k ratio stays of order one: w ~ k along the run
    OdeTrajectory tr = integrate_riemann_ode(sys, 0.01, -0.01, 1000.0, {});
    REQUIRE_FALSE(tr.stopped_early);
    for (size_t i = 0; i < tr.ts.size(); i += 50) {
        double ratio = tr.ws[i] / tr.ks[i];
        CHECK(ratio > 0.0);
        CHECK(ratio < 1.0);
    }
}

TEST_CASE("state ceiling and hyperbolicity floor are reported as stop reasons") {
    OdeSystem sys = unit_system();
    OdeOptions opt;
    opt.halfstep_check = false;
    opt.state_ceiling = 10.0;
    OdeTrajectory tr = integrate_riemann_ode(sys, 1.0, -1.0, 2.0, opt);
    CHECK(tr.stopped_early);
    CHECK(tr.stop_reason == "state_ceiling");
    CHECK(tr.t_stop <= kTStar + 0.05);

    // A column with k_t/k = -1 and frozen B gives d(w-z)/dt = -(w-z), so the
    // separation decays like 0.3 e^{-t} and crosses the floor at t = ln 3.
    OdeSystem shrink{[](double) { return 1.0; }, [](double) { return -1.0; },
                     [](double) { return 1.0; }, [](double) { return 0.0; }};
    OdeOptions opt2;
    opt2.hyperbolicity_floor = 0.1;
    OdeTrajectory tr2 = integrate_riemann_ode(shrink, 0.4, 0.1, 3.0, opt2);
    CHECK(tr2.stopped_early);
    CHECK(tr2.stop_reason == "hyperbolicity_floor");
    CHECK(tr2.t_stop == doctest::Approx(std::log(3.0)).epsilon(0.02));
}

TEST_CASE("oversized steps trigger a refinement request with a smaller step") {
    OdeSystem sys = unit_system();
    OdeOptions opt;
    opt.dt = 0.2; // far too coarse near the blowup
    opt.step_tol = 1e-9;
    bool threw = false;
    try {
        integrate_riemann_ode(sys, 1.0, -1.0, 0.86, opt);
    } catch (const StepRefinementRequest& req) {
        threw = true;
        CHECK(req.suggested_dt < opt.dt);
        CHECK(req.suggested_dt > 0.0);
    }
    CHECK(threw);
}

TEST_CASE("toy scalar model blows up on constant curvature, survives slow decay") {
    OdeSystem cs = unit_system();
    ToyReport bad = integrate_toy_model(ToyModel::scalar, CurvatureProfile::constant(1.0), cs,
                                        1.0, -1.0, 10.0);
    CHECK_FALSE(bad.global);
    CHECK(bad.t_star > 0.0);
    CHECK(bad.t_star < 10.0);
    CHECK_FALSE(bad.integral_k_finite);

    CurvatureProfile p = CurvatureProfile::log_example();
    std::vector<double> xs = {0.0};
    MetricGrid m = solve_gauss_equation(p, xs, time_grid(500.0, 0.05, 1.0, 1.05), 0.01);
    OdeSystem sys = OdeSystem::from_profile(p, 0.0, MetricColumn::from_grid(m, p, 0));
    ToyReport good = integrate_toy_model(ToyModel::scalar, p, sys, 0.005, -0.005, 500.0);
    CHECK(good.global);
    CHECK(good.integral_k_finite);
    CHECK(good.sup_state < 0.1);
}

TEST_CASE("toy full model keeps the origin fixed") {
    ToyReport rep = integrate_toy_model(ToyModel::full, CurvatureProfile::constant(1.0),
                                        unit_system(), 0.0, 0.0, 3.0);
    CHECK(rep.global);
    CHECK(rep.sup_state <= 1e-15);
}

TEST_CASE("grid-backed metric column matches the closed form it samples") {
    CurvatureProfile p = CurvatureProfile::constant(1.0);
    std::vector<double> xs = {0.0};
    MetricGrid m = solve_gauss_equation(p, xs, linspace(0.0, 2.0, 41), 0.005);
    MetricColumn col = MetricColumn::from_grid(m, p, 0);
    MetricColumn exact = MetricColumn::constant_k(1.0);
    for (double t : {0.0, 0.333, 1.0, 1.777}) {
        CHECK(col.B(t) == doctest::Approx(exact.B(t)).epsilon(1e-7));
        CHECK(col.B_t(t) == doctest::Approx(exact.B_t(t)).epsilon(1e-6));
    }
}
