#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gcflow/curvature.hpp"
#include "gcflow/invariant_field.hpp"
#include "gcflow/metric.hpp"

namespace gcflow {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double c, Vec3 v) { return {c * v.x, c * v.y, c * v.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }

// Second fundamental form coefficients on a (x, t) patch, together with the
// metric data the frame integration needs at the same nodes. Row j lives at
// time ts[j]; cells where the invariants were invalid or degenerate carry
// valid = 0 and must not be integrated across.
struct SecondFundamentalForm {
    std::vector<double> xs, ts;
    Field2<double> L, M, N;
    Field2<double> B, B_t, B_x, k;
    // r - s and r + s per node. The frame transport substeps between nodes,
    // and L = 2B/(r-s) swings over orders of magnitude across a snapshot gap
    // while r -+ s stay tame, so mid-interval coefficients are rebuilt from
    // these plus exact k(x,t) rather than interpolating L, M, N directly.
    Field2<double> sep, sum;
    std::optional<CurvatureProfile> prof;
    Field2<uint8_t> valid;

    size_t rows() const { return ts.size(); }
    size_t cols() const { return xs.size(); }
};

// From weighted invariants on one time slice: with w = kr, z = ks and
// sqrt(det g) = B,
//   L = 2kB/(w - z),  M = -L(w + z)/2,  N = (M² - k²B²)/L.
SecondFundamentalForm second_fundamental_form(const InvariantField& fld, const MetricGrid& m,
                                              const CurvatureProfile& p);

// Stacks one row per snapshot.
SecondFundamentalForm second_fundamental_form(const Evolution& ev, const MetricGrid& m,
                                              const CurvatureProfile& p);

// Algebraic inverse of the map above: w = (-M + kB)/L, z = (-M - kB)/L.
void invert_second_form(double L, double M, double N, double k, double B, double& w, double& z);

struct ImmersionMesh {
    std::vector<double> xs, ts;
    Field2<Vec3> X, X_x, X_t, n;
    Field2<double> res_I;    // first-form error, scale-normalized
    Field2<double> res_comm; // ‖∂t X_x - ∂x X_t‖, centered; NaN on the rim
    Field2<double> K_disc;   // fitted-quadric Gauss curvature; NaN where the
                             // 3x3 stencil is incomplete
    Field2<uint8_t> valid;

    size_t rows() const { return ts.size(); }
    size_t cols() const { return xs.size(); }
    size_t count_valid() const;

    void write_csv(const std::string& path) const;
    void write_obj(const std::string& path) const;
    void write_ply(const std::string& path) const;
};

// Gauss-Weingarten frame transport. Base line along x at the first row, then
// independent columns in t; midpoint (second order) updates, substepped so
// each substep rotates the frame by at most a few milliradians. The normal is
// renormalized after every step; the tangents are not, their lengths are the
// metric check. Gauge: X = 0 at the patch origin, X_x ∝ e1, X_t = e2, n = e3
// there.
//
// Columns truncate where |X_x|/B or |X_t| leaves [1/2, 2].
ImmersionMesh integrate_frame(const SecondFundamentalForm& sff, const MetricGrid& m);

struct ResidualReport {
    double first_form_sup = 0.0, first_form_mean = 0.0;
    double ortho_sup = 0.0, ortho_mean = 0.0; // |n·X_x|/B, |n·X_t|, | |n|-1 |
    double comm_sup = 0.0, comm_mean = 0.0;
    double curv_rel_sup = 0.0, curv_rel_mean = 0.0; // |K_disc + k²|/k², interior
    size_t cells = 0, curv_cells = 0;
};

// Recomputes B and k from the metric grid and the profile, independently of
// what integrate_frame stored.
ResidualReport verify_immersion(const ImmersionMesh& mesh, const MetricGrid& m,
                                const CurvatureProfile& p);

// Angle-defect estimate on the triangulated mesh (cross-check for K_disc).
// NaN on the rim and next to invalid cells.
Field2<double> angle_defect_curvature(const ImmersionMesh& mesh);

enum class MeshFormat { obj, ply, csv };

void export_mesh(const ImmersionMesh& mesh, MeshFormat fmt, const std::string& path);

} // namespace gcflow
