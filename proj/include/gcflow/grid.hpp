#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gcflow {

inline std::vector<double> linspace(double a, double b, size_t n) {
    if (n < 2) throw std::invalid_argument("linspace needs n >= 2");
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
    v.back() = b;
    return v;
}

// Time grid for long-horizon runs: uniform spacing dt_lin up to t_switch,
// then geometrically growing intervals (ratio > 1) until t_max.
inline std::vector<double> time_grid(double t_max, double dt_lin, double t_switch = 1.0,
                                     double ratio = 1.05) {
    if (!(t_max > 0.0) || !(dt_lin > 0.0) || !(ratio > 1.0))
        throw std::invalid_argument("time_grid: bad parameters");
    std::vector<double> ts{0.0};
    double dt = dt_lin;
    while (ts.back() < t_max) {
        if (ts.back() >= t_switch) dt *= ratio;
        double next = ts.back() + dt;
        if (next >= t_max - 1e-12 * t_max) next = t_max;
        ts.push_back(next);
    }
    return ts;
}

// Row-major 2-D field indexed (column i along x, row j along t).
template <typename T>
struct Field2 {
    size_t nx = 0, nt = 0;
    std::vector<T> data;

    Field2() = default;
    Field2(size_t nx_, size_t nt_, T fill = T{}) : nx(nx_), nt(nt_), data(nx_ * nt_, fill) {}

    T& at(size_t i, size_t j) {
        assert(i < nx && j < nt);
        return data[j * nx + i];
    }
    const T& at(size_t i, size_t j) const {
        assert(i < nx && j < nt);
        return data[j * nx + i];
    }
};

inline size_t lower_index(const std::vector<double>& xs, double x) {
    // greatest i with xs[i] <= x, clamped to [0, n-2]
    if (xs.size() < 2) throw std::invalid_argument("lower_index: need 2+ nodes");
    size_t lo = 0, hi = xs.size() - 1;
    if (x <= xs.front()) return 0;
    if (x >= xs[hi - 1]) return hi - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (xs[mid] <= x) lo = mid; else hi = mid;
    }
    return lo;
}

// Cubic Hermite on one interval; f0,f1 values and d0,d1 derivatives.
inline double hermite(double t0, double t1, double f0, double f1, double d0, double d1, double t) {
    double h = t1 - t0;
    double u = (t - t0) / h;
    double u2 = u * u, u3 = u2 * u;
    return f0 * (2 * u3 - 3 * u2 + 1) + d0 * h * (u3 - 2 * u2 + u)
         + f1 * (-2 * u3 + 3 * u2) + d1 * h * (u3 - u2);
}

inline double lerp(double a, double b, double u) { return a + (b - a) * u; }

inline double bilinear(const std::vector<double>& xs, const std::vector<double>& ts,
                       const Field2<double>& f, double x, double t) {
    size_t i = lower_index(xs, x), j = lower_index(ts, t);
    double ux = (x - xs[i]) / (xs[i + 1] - xs[i]);
    double ut = (t - ts[j]) / (ts[j + 1] - ts[j]);
    double lo = lerp(f.at(i, j), f.at(i + 1, j), ux);
    double hi = lerp(f.at(i, j + 1), f.at(i + 1, j + 1), ux);
    return lerp(lo, hi, ut);
}

} // namespace gcflow
