#pragma once

#include <string>
#include <vector>

#include "gcflow/curvature.hpp"
#include "gcflow/grid.hpp"

namespace gcflow {

// Geodesic-parallel chart metric ds² = B² dx² + dt², B from B_tt = k²B,
// B(x,0) = 1, B_t(x,0) = 0. Columns are truncated independently when the
// integration overflows; valid_rows[i] counts usable nodes in column i.
struct MetricGrid {
    std::vector<double> xs, ts;
    Field2<double> B, B_t;
    Field2<double> dx_lnB, dxx_lnB, BdxdtlnB;
    std::vector<size_t> valid_rows;

    double det_g(size_t i, size_t j) const {
        double b = B.at(i, j);
        return b * b;
    }
    size_t col(double x) const; // exact node lookup
    void write_csv(const std::string& path) const;
};

// Row of metric data at arbitrary t (cubic Hermite per column, then centered
// differences across columns for the x-diagnostics).
struct MetricSlice {
    double t = 0.0;
    std::vector<double> B, B_t, dx_lnB, dxx_lnB, dxdt_lnB;
};

MetricGrid solve_gauss_equation(const CurvatureProfile& p, const std::vector<double>& xs,
                                const std::vector<double>& ts, double dt_sub);

MetricSlice metric_slice(const MetricGrid& m, const CurvatureProfile& p, double t);

// Hermite-interpolated B, B_t within one column.
void column_interp(const MetricGrid& m, const CurvatureProfile& p, size_t i, double t,
                   double& B, double& B_t);

struct AsymptoticsReport {
    std::vector<double> sample_ts; // where e(t) = |t·B_t/B - 1| was measured
    std::vector<double> e_sup;     // sup over x at each sample time
    bool e_decreasing = false;
    double e_final = 0.0;
    double C1 = 0.0, C2 = 0.0; // tail envelope C1·t <= B <= C2·t
    double sup_dx_lnB = 0.0, sup_dxx_lnB = 0.0, sup_BdxdtlnB = 0.0;
    bool bt_band_ok = false; // ∫k² <= B_t <= exp(∫s·k²)·∫k² at the last valid node
    bool asymptotics_ok = false;
    double e_threshold = 0.1;
};

AsymptoticsReport verify_metric_asymptotics(const MetricGrid& m, const CurvatureProfile& p);

// Polar chart ds² = dρ² + G² dθ², G_ρρ = k²G, G(θ,0) = 0, G_ρ(θ,0) = 1.
struct PolarMetricGrid {
    std::vector<double> thetas, rhos;
    Field2<double> G, G_rho;
    std::vector<size_t> valid_rows;
    double b0 = 1.0; // exp(sup_θ ∫ ρk² dρ), upper band for G_ρ

    void write_csv(const std::string& path) const;
};

PolarMetricGrid solve_polar_gauss(const CurvatureProfile& p, const std::vector<double>& thetas,
                                  const std::vector<double>& rhos, double drho_sub);

struct PolarBandReport {
    bool G_rho_in_band = false; // 1 <= G_ρ <= b0
    bool G_in_band = false;     // ρ <= G <= b0·ρ
    double worst_low = 0.0, worst_high = 0.0;
};

PolarBandReport check_polar_bands(const PolarMetricGrid& g, double rho_max);

} // namespace gcflow
