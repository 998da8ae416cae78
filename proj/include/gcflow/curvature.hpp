#pragma once

#include <functional>
#include <string>

#include "gcflow/quadrature.hpp"

namespace gcflow {

struct Domain {
    double x_min = -1e9, x_max = 1e9;
    double t_min = 0.0, t_max = 1e9;
};

// Bounded smooth factor m(x) = 1 + amplitude * exp(-(x/width)^2).
// amplitude = 0 means no modulation; amplitude > -1 keeps k positive.
struct XModulation {
    double amplitude = 0.0;
    double width = 1.0;

    double m(double x) const;
    double dm(double x) const;
    double d2m(double x) const;
};

struct CurvatureSample {
    double k = 0.0;
    double k_t = 0.0;
    double k_x = 0.0;
    double k_xx = 0.0;
    double k_xt = 0.0;
    double K = 0.0; // Gauss curvature, -k^2
};

// k(x,t) = base(t) * m(x) for the built-in kinds. The coordinates are named
// (x,t) but the same type serves polar charts with (theta,rho).
class CurvatureProfile {
public:
    enum class Kind { constant, power, log_example, efimov, custom };

    static CurvatureProfile constant(double k0, Domain d = {});
    static CurvatureProfile power(double c, double delta, Domain d = {});
    static CurvatureProfile log_example(Domain d = {});
    static CurvatureProfile efimov(Domain d = {});
    // Custom profiles supply k and optionally analytic partials; missing
    // partials fall back to central differences.
    static CurvatureProfile custom(std::function<double(double, double)> k,
                                   std::function<double(double, double)> k_t = nullptr,
                                   std::function<double(double, double)> k_x = nullptr,
                                   Domain d = {});

    CurvatureProfile with_modulation(XModulation mod) const;

    Kind kind() const { return kind_; }
    const Domain& domain() const { return domain_; }
    const XModulation& modulation() const { return mod_; }
    bool separable() const { return kind_ != Kind::custom; }
    std::string kind_name() const;
    double param_k0() const { return k0_; }
    double param_c() const { return c_; }
    double param_delta() const { return delta_; }

    // base factor (modulation stripped); custom kind evaluates at x = 0
    double base(double t) const;
    double base_dt(double t) const;

    double mod_max() const; // sup_x m(x)
    double mod_min() const; // inf_x m(x)

    friend CurvatureSample eval_curvature(const CurvatureProfile& p, double x, double t);

private:
    Kind kind_ = Kind::constant;
    double k0_ = 1.0, c_ = 1.0, delta_ = 0.25;
    Domain domain_;
    XModulation mod_;
    std::function<double(double, double)> fk_, fk_t_, fk_x_;
};

CurvatureSample eval_curvature(const CurvatureProfile& p, double x, double t);

// Integrals of the base factor along t. b may be +infinity: closed-form
// antiderivatives are used where the kind has one, otherwise adaptive
// quadrature up to a horizon with the truncation recorded.
TailIntegral integral_base_k(const CurvatureProfile& p, double a, double b);
TailIntegral integral_base_k2(const CurvatureProfile& p, double a, double b);
TailIntegral integral_base_k2_t(const CurvatureProfile& p, double a, double b); // ∫ k²·s ds

// sup over x of ∫_a^b k(x,s) ds, i.e. base integral scaled by sup m.
TailIntegral sup_integral_k(const CurvatureProfile& p, double a, double b);

} // namespace gcflow
