#pragma once

#include "gcflow/curvature.hpp"

namespace gcflow {

// Coefficient pack for the weighted-invariant source terms at one point.
struct SourceCoeffs {
    double bt_over_b = 0.0; // ∂_t ln B
    double bx_over_b = 0.0; // ∂_x ln B
    double k = 0.0;
    double kt_over_k = 0.0;
    double kx_over_k = 0.0;
    double B = 1.0;
    double B_t = 0.0;
};

// x-derivatives of the coefficient groups, for the derivative system.
struct SourceXDerivs {
    double d_btb = 0.0;   // ∂_x(B_t/B + k_t/2k)
    double d_mix = 0.0;   // ∂_x[(B_x/B + 3k_x/2k)·k]
    double d_kx2 = 0.0;   // ∂_x[(k_x/2k)·k] = k_xx/2
    double d_bbtk2 = 0.0; // ∂_x[B·B_t·k²]
};

struct CellCoeffs {
    SourceCoeffs c;
    double k_x = 0.0;
    SourceXDerivs dx;
};

struct SourcePair {
    double f = 0.0, g = 0.0;
};

struct SourceJacobian {
    double f_r = 0.0, f_s = 0.0, g_r = 0.0, g_s = 0.0;
};

SourcePair source_terms(double r, double s, const SourceCoeffs& c);
SourceJacobian source_jacobian(double r, double s, const SourceCoeffs& c);

// Q = (f-g)/(r-s) in closed form, finite through r = s.
double source_quotient(double r, double s, const SourceCoeffs& c);

// (δ_x f, δ_x g): x-derivatives of the sources at frozen (r,s).
SourcePair source_x_derivs(double r, double s, const CellCoeffs& cc);

// Assemble the pack from a curvature sample and metric data at one node.
CellCoeffs make_cell_coeffs(const CurvatureSample& ks, double B, double B_t, double dx_lnB,
                            double dxx_lnB, double dxdt_lnB);

} // namespace gcflow
