#include "gcflow/sources.hpp"

namespace gcflow {

SourcePair source_terms(double r, double s, const SourceCoeffs& c) {
    const double a = c.bt_over_b + 0.5 * c.kt_over_k;
    const double m = (c.bx_over_b + 1.5 * c.kx_over_k) * c.k;
    const double q = 0.5 * c.kx_over_k * c.k;
    const double w = c.B * c.B_t * c.k * c.k;
    SourcePair out;
    out.f = -a * (r + s) - m * r * s + q * r * r - w * r * r * s;
    out.g = -a * (r + s) - m * r * s + q * s * s - w * r * s * s;
    return out;
}

SourceJacobian source_jacobian(double r, double s, const SourceCoeffs& c) {
    const double a = c.bt_over_b + 0.5 * c.kt_over_k;
    const double m = (c.bx_over_b + 1.5 * c.kx_over_k) * c.k;
    const double q = 0.5 * c.kx_over_k * c.k;
    const double w = c.B * c.B_t * c.k * c.k;
    SourceJacobian j;
    j.f_r = -a - m * s + 2.0 * q * r - 2.0 * w * r * s;
    j.f_s = -a - m * r - w * r * r;
    j.g_r = -a - m * s - w * s * s;
    j.g_s = -a - m * r + 2.0 * q * s - 2.0 * w * r * s;
    return j;
}

double source_quotient(double r, double s, const SourceCoeffs& c) {
    // f - g = q(r² - s²) - w·r·s·(r - s) = (r - s)·(q·(r+s) - w·r·s), so the
    // quotient follows without ever dividing by r - s.
    const double q = 0.5 * c.kx_over_k * c.k;
    const double w = c.B * c.B_t * c.k * c.k;
    return q * (r + s) - w * r * s;
}

SourcePair source_x_derivs(double r, double s, const CellCoeffs& cc) {
    SourcePair out;
    out.f = -cc.dx.d_btb * (r + s) - cc.dx.d_mix * r * s + cc.dx.d_kx2 * r * r -
            cc.dx.d_bbtk2 * r * r * s;
    out.g = -cc.dx.d_btb * (r + s) - cc.dx.d_mix * r * s + cc.dx.d_kx2 * s * s -
            cc.dx.d_bbtk2 * r * s * s;
    return out;
}

CellCoeffs make_cell_coeffs(const CurvatureSample& ks, double B, double B_t, double dx_lnB,
                            double dxx_lnB, double dxdt_lnB) {
    CellCoeffs cc;
    cc.c.B = B;
    cc.c.B_t = B_t;
    cc.c.bt_over_b = B_t / B;
    cc.c.bx_over_b = dx_lnB;
    cc.c.k = ks.k;
    // k == 0 only for the flat profile, where every k-derivative vanishes too.
    cc.c.kt_over_k = ks.k > 0.0 ? ks.k_t / ks.k : 0.0;
    cc.c.kx_over_k = ks.k > 0.0 ? ks.k_x / ks.k : 0.0;
    cc.k_x = ks.k_x;

    // ∂_x(k_t/k) = k_xt/k - k_x·k_t/k².
    const double d_ktk =
        ks.k > 0.0 ? ks.k_xt / ks.k - ks.k_x * ks.k_t / (ks.k * ks.k) : 0.0;
    cc.dx.d_btb = dxdt_lnB + 0.5 * d_ktk;
    // ∂_x[(B_x/B)k + 3k_x/2] = (∂_xx lnB)k + (B_x/B)k_x + 3k_xx/2.
    cc.dx.d_mix = dxx_lnB * ks.k + dx_lnB * ks.k_x + 1.5 * ks.k_xx;
    cc.dx.d_kx2 = 0.5 * ks.k_xx;
    // ∂_x[B·B_t·k²], with B_tx = B_t·∂_x lnB + B·∂_x∂_t lnB.
    const double B_x = B * dx_lnB;
    const double B_tx = B_t * dx_lnB + B * dxdt_lnB;
    cc.dx.d_bbtk2 =
        B_x * B_t * ks.k * ks.k + B * B_tx * ks.k * ks.k + 2.0 * B * B_t * ks.k * ks.k_x;
    return cc;
}

} // namespace gcflow
