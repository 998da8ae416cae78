#include "gcflow/curvature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gcflow {

double XModulation::m(double x) const {
    if (amplitude == 0.0) return 1.0;
    double u = x / width;
    return 1.0 + amplitude * std::exp(-u * u);
}

double XModulation::dm(double x) const {
    if (amplitude == 0.0) return 0.0;
    double u = x / width;
    return amplitude * std::exp(-u * u) * (-2.0 * x / (width * width));
}

double XModulation::d2m(double x) const {
    if (amplitude == 0.0) return 0.0;
    double u = x / width;
    double w2 = width * width;
    return amplitude * std::exp(-u * u) * (4.0 * x * x / (w2 * w2) - 2.0 / w2);
}

CurvatureProfile CurvatureProfile::constant(double k0, Domain d) {
    if (k0 < 0.0) throw std::invalid_argument("constant profile needs k0 >= 0");
    CurvatureProfile p;
    p.kind_ = Kind::constant;
    p.k0_ = k0;
    p.domain_ = d;
    return p;
}

CurvatureProfile CurvatureProfile::power(double c, double delta, Domain d) {
    if (!(c > 0.0) || !(delta > 0.0)) throw std::invalid_argument("power profile needs c, delta > 0");
    CurvatureProfile p;
    p.kind_ = Kind::power;
    p.c_ = c;
    p.delta_ = delta;
    p.domain_ = d;
    return p;
}

CurvatureProfile CurvatureProfile::log_example(Domain d) {
    CurvatureProfile p;
    p.kind_ = Kind::log_example;
    p.domain_ = d;
    return p;
}

CurvatureProfile CurvatureProfile::efimov(Domain d) {
    CurvatureProfile p;
    p.kind_ = Kind::efimov;
    p.domain_ = d;
    return p;
}

CurvatureProfile CurvatureProfile::custom(std::function<double(double, double)> k,
                                          std::function<double(double, double)> k_t,
                                          std::function<double(double, double)> k_x, Domain d) {
    if (!k) throw std::invalid_argument("custom profile needs k(x,t)");
    CurvatureProfile p;
    p.kind_ = Kind::custom;
    p.fk_ = std::move(k);
    p.fk_t_ = std::move(k_t);
    p.fk_x_ = std::move(k_x);
    p.domain_ = d;
    return p;
}

CurvatureProfile CurvatureProfile::with_modulation(XModulation mod) const {
    if (!(1.0 + mod.amplitude > 0.0) || !(mod.width > 0.0))
        throw std::invalid_argument("modulation needs amplitude > -1 and width > 0");
    CurvatureProfile p = *this;
    p.mod_ = mod;
    return p;
}

std::string CurvatureProfile::kind_name() const {
    switch (kind_) {
        case Kind::constant: return "constant";
        case Kind::power: return "power";
        case Kind::log_example: return "log_example";
        case Kind::efimov: return "efimov";
        case Kind::custom: return "custom";
    }
    return "?";
}

double CurvatureProfile::base(double t) const {
    switch (kind_) {
        case Kind::constant: return k0_;
        case Kind::power: return c_ * std::pow(1.0 + t, -(1.0 + delta_));
        case Kind::log_example: {
            double u = t + 2.0, L = std::log(u);
            return 1.0 / (u * L * L);
        }
        case Kind::efimov: return 1.0 / (1.0 + t);
        case Kind::custom: return fk_(0.0, t);
    }
    return 0.0;
}

double CurvatureProfile::base_dt(double t) const {
    switch (kind_) {
        case Kind::constant: return 0.0;
        case Kind::power: return -c_ * (1.0 + delta_) * std::pow(1.0 + t, -(2.0 + delta_));
        case Kind::log_example: {
            double u = t + 2.0, L = std::log(u);
            return -(L + 2.0) / (u * u * L * L * L);
        }
        case Kind::efimov: return -1.0 / ((1.0 + t) * (1.0 + t));
        case Kind::custom: {
            double h = 1e-5 * (1.0 + std::fabs(t));
            return (fk_(0.0, t + h) - fk_(0.0, t - h)) / (2.0 * h);
        }
    }
    return 0.0;
}

double CurvatureProfile::mod_max() const {
    return mod_.amplitude >= 0.0 ? 1.0 + mod_.amplitude : 1.0;
}

double CurvatureProfile::mod_min() const {
    return mod_.amplitude >= 0.0 ? 1.0 : 1.0 + mod_.amplitude;
}

CurvatureSample eval_curvature(const CurvatureProfile& p, double x, double t) {
    const Domain& d = p.domain_;
    if (x < d.x_min || x > d.x_max || t < d.t_min || t > d.t_max)
        throw std::domain_error("eval_curvature: (x,t) outside profile domain");

    CurvatureSample s;
    if (p.kind_ == CurvatureProfile::Kind::custom) {
        s.k = p.fk_(x, t);
        double ht = 1e-5 * (1.0 + std::fabs(t));
        double hx = 1e-5 * (1.0 + std::fabs(x));
        s.k_t = p.fk_t_ ? p.fk_t_(x, t) : (p.fk_(x, t + ht) - p.fk_(x, t - ht)) / (2.0 * ht);
        s.k_x = p.fk_x_ ? p.fk_x_(x, t) : (p.fk_(x + hx, t) - p.fk_(x - hx, t)) / (2.0 * hx);
        if (p.fk_x_) {
            s.k_xx = (p.fk_x_(x + hx, t) - p.fk_x_(x - hx, t)) / (2.0 * hx);
            s.k_xt = (p.fk_x_(x, t + ht) - p.fk_x_(x, t - ht)) / (2.0 * ht);
        } else {
            s.k_xx = (p.fk_(x + hx, t) - 2.0 * s.k + p.fk_(x - hx, t)) / (hx * hx);
            s.k_xt = (p.fk_(x + hx, t + ht) - p.fk_(x + hx, t - ht) - p.fk_(x - hx, t + ht)
                      + p.fk_(x - hx, t - ht)) / (4.0 * hx * ht);
        }
    } else {
        double kb = p.base(t), kb_t = p.base_dt(t);
        double m = p.mod_.m(x), dm = p.mod_.dm(x), d2m = p.mod_.d2m(x);
        s.k = kb * m;
        s.k_t = kb_t * m;
        s.k_x = kb * dm;
        s.k_xx = kb * d2m;
        s.k_xt = kb_t * dm;
    }
    s.K = -s.k * s.k;
    return s;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TailIntegral by_quadrature(const std::function<double(double)>& f, double a, double b,
                           double horizon, double decay_hint) {
    TailIntegral r;
    double hi = std::min(b, horizon);
    if (hi > a) r.value = integrate(f, a, hi, 1e-13);
    if (b > horizon) {
        // crude monotone-decay remainder: |∫_T^∞ f| <= f(T)·T·decay_hint
        r.remainder_bound = std::fabs(f(horizon)) * horizon * decay_hint;
    }
    return r;
}

} // namespace

TailIntegral integral_base_k(const CurvatureProfile& p, double a, double b) {
    TailIntegral r;
    using K = CurvatureProfile::Kind;
    switch (p.kind()) {
        case K::constant:
            if (std::isinf(b)) {
                r.finite = p.param_k0() == 0.0;
                r.value = r.finite ? 0.0 : kInf;
            } else {
                r.value = p.param_k0() * (b - a);
            }
            return r;
        case K::power: {
            double c = p.param_c(), d = p.param_delta();
            double hi = std::isinf(b) ? 0.0 : std::pow(1.0 + b, -d);
            r.value = c / d * (std::pow(1.0 + a, -d) - hi);
            return r;
        }
        case K::log_example: {
            double hi = std::isinf(b) ? 0.0 : 1.0 / std::log(b + 2.0);
            r.value = 1.0 / std::log(a + 2.0) - hi;
            return r;
        }
        case K::efimov:
            if (std::isinf(b)) {
                r.finite = false;
                r.value = kInf;
            } else {
                r.value = std::log((1.0 + b) / (1.0 + a));
            }
            return r;
        case K::custom:
            return by_quadrature([&](double t) { return p.base(t); }, a, b, 1e6, 2.0);
    }
    return r;
}

TailIntegral integral_base_k2(const CurvatureProfile& p, double a, double b) {
    TailIntegral r;
    using K = CurvatureProfile::Kind;
    switch (p.kind()) {
        case K::constant:
            if (std::isinf(b)) {
                r.finite = p.param_k0() == 0.0;
                r.value = r.finite ? 0.0 : kInf;
            } else {
                r.value = p.param_k0() * p.param_k0() * (b - a);
            }
            return r;
        case K::power: {
            double c = p.param_c(), d = p.param_delta();
            double e = 1.0 + 2.0 * d;
            double hi = std::isinf(b) ? 0.0 : std::pow(1.0 + b, -e);
            r.value = c * c / e * (std::pow(1.0 + a, -e) - hi);
            return r;
        }
        case K::efimov: {
            double hi = std::isinf(b) ? 0.0 : 1.0 / (1.0 + b);
            r.value = 1.0 / (1.0 + a) - hi;
            return r;
        }
        case K::log_example:
        case K::custom: {
            auto f = [&](double t) { double v = p.base(t); return v * v; };
            double horizon = std::isinf(b) ? std::max(1e5, 10.0 * (a + 1.0)) : b;
            r.value = integrate(f, a, horizon, 1e-14);
            if (std::isinf(b)) {
                // k <= 1/((t+2) ln²(t+2)) tail: ∫_T^∞ k² <= 1/((T+2) ln⁴(T+2))
                if (p.kind() == K::log_example) {
                    double L = std::log(horizon + 2.0);
                    r.remainder_bound = 1.0 / ((horizon + 2.0) * L * L * L * L);
                } else {
                    r.remainder_bound = f(horizon) * horizon;
                }
                r.value += 0.5 * r.remainder_bound;
            }
            return r;
        }
    }
    return r;
}

TailIntegral integral_base_k2_t(const CurvatureProfile& p, double a, double b) {
    TailIntegral r;
    auto f = [&](double t) { double v = p.base(t); return v * v * t; };
    using K = CurvatureProfile::Kind;
    if (p.kind() == K::constant) {
        if (std::isinf(b)) {
            r.finite = p.param_k0() == 0.0;
            r.value = r.finite ? 0.0 : kInf;
        } else {
            r.value = p.param_k0() * p.param_k0() * 0.5 * (b * b - a * a);
        }
        return r;
    }
    if (p.kind() == K::efimov && std::isinf(b)) {
        r.finite = false; // ∫ t/(1+t)² diverges
        r.value = kInf;
        return r;
    }
    double horizon = std::isinf(b) ? std::max(1e6, 10.0 * (a + 1.0)) : b;
    r.value = integrate(f, a, horizon, 1e-13);
    if (std::isinf(b)) {
        if (p.kind() == K::log_example) {
            // t·k² ~ 1/(t ln⁴ t): ∫_T^∞ <= 1/(3 ln³(T+2))
            double L = std::log(horizon + 2.0);
            r.remainder_bound = 1.0 / (3.0 * L * L * L);
        } else if (p.kind() == K::power) {
            double d = p.param_delta();
            double c = p.param_c();
            r.remainder_bound = c * c * std::pow(1.0 + horizon, -2.0 * d) / (2.0 * d);
        } else {
            r.remainder_bound = f(horizon) * horizon;
        }
        r.value += 0.5 * r.remainder_bound;
    }
    return r;
}

TailIntegral sup_integral_k(const CurvatureProfile& p, double a, double b) {
    TailIntegral r = integral_base_k(p, a, b);
    r.value *= p.mod_max();
    r.remainder_bound *= p.mod_max();
    return r;
}

} // namespace gcflow
