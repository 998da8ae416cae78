#include "gcflow/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace gcflow {

namespace {

double simpson(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(fa, flm, fm, m - a);
    double right = simpson(fm, frm, fb, b - m);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 int max_depth) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = simpson(fa, fm, fb, b - a);
    return adaptive(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

std::vector<double> cumulative_integral(const std::function<double(double)>& f,
                                        const std::vector<double>& nodes) {
    if (nodes.size() < 1) throw std::invalid_argument("cumulative_integral: empty grid");
    std::vector<double> out(nodes.size(), 0.0);
    for (size_t i = 1; i < nodes.size(); ++i) {
        double a = nodes[i - 1], b = nodes[i];
        out[i] = out[i - 1] + simpson(f(a), f(0.5 * (a + b)), f(b), b - a);
    }
    return out;
}

} // namespace gcflow
