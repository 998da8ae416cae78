#include "gcflow/immersion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "gcflow/csv.hpp"

namespace gcflow {

namespace {

constexpr double kSepFloor = 1e-12;
const double kNan = std::numeric_limits<double>::quiet_NaN();

struct NodeCoef {
    double L, M, N, B, B_t, B_x;
};

NodeCoef coef_at(const SecondFundamentalForm& s, size_t i, size_t j) {
    return {s.L.at(i, j), s.M.at(i, j), s.N.at(i, j),
            s.B.at(i, j), s.B_t.at(i, j), s.B_x.at(i, j)};
}

NodeCoef midpoint(NodeCoef a, NodeCoef b) {
    return {0.5 * (a.L + b.L), 0.5 * (a.M + b.M), 0.5 * (a.N + b.N),
            0.5 * (a.B + b.B), 0.5 * (a.B_t + b.B_t), 0.5 * (a.B_x + b.B_x)};
}

NodeCoef mix_coef(const NodeCoef& a, const NodeCoef& b, double u) {
    return {a.L + u * (b.L - a.L),     a.M + u * (b.M - a.M),
            a.N + u * (b.N - a.N),     a.B + u * (b.B - a.B),
            a.B_t + u * (b.B_t - a.B_t), a.B_x + u * (b.B_x - a.B_x)};
}

struct Frame {
    Vec3 X, Xx, Xt, n;
};

// Gauss formulas for ds² = B²dx² + dt²: the only nonzero Christoffel symbols
// are Γ¹₁₁ = B_x/B, Γ²₁₁ = -BB_t, Γ¹₁₂ = B_t/B. Weingarten closes the system.
Frame deriv_x(const Frame& f, const NodeCoef& c) {
    Frame d;
    d.X = f.Xx;
    d.Xx = (c.B_x / c.B) * f.Xx + (-c.B * c.B_t) * f.Xt + c.L * f.n;
    d.Xt = (c.B_t / c.B) * f.Xx + c.M * f.n;
    d.n = (-c.L / (c.B * c.B)) * f.Xx + (-c.M) * f.Xt;
    return d;
}

Frame deriv_t(const Frame& f, const NodeCoef& c) {
    Frame d;
    d.X = f.Xt;
    d.Xx = (c.B_t / c.B) * f.Xx + c.M * f.n;
    d.Xt = c.N * f.n;
    d.n = (-c.M / (c.B * c.B)) * f.Xx + (-c.N) * f.Xt;
    return d;
}

Frame axpy(const Frame& f, double h, const Frame& d) {
    return {f.X + h * d.X, f.Xx + h * d.Xx, f.Xt + h * d.Xt, f.n + h * d.n};
}

template <Frame (*Deriv)(const Frame&, const NodeCoef&)>
Frame midpoint_step(const Frame& f, double h, NodeCoef ca, NodeCoef cb) {
    Frame half = axpy(f, 0.5 * h, Deriv(f, ca));
    Frame next = axpy(f, h, Deriv(half, midpoint(ca, cb)));
    double nn = norm(next.n);
    if (nn > 0.0) next.n = (1.0 / nn) * next.n;
    return next;
}

// Frame rotation rates per unit coordinate. Small data makes L = 2kB/(w-z)
// large, so one grid cell can hide many radians of frame rotation; substep
// counts scale with these so each substep turns the frame by <= ~0.005 rad.
double rot_rate_x(const NodeCoef& c) {
    double inv = 1.0 + 1.0 / (c.B * c.B);
    return (std::fabs(c.L) + std::fabs(c.M)) * inv + std::fabs(c.B * c.B_t) +
           std::fabs(c.B_t / c.B) + std::fabs(c.B_x / c.B);
}
double rot_rate_t(const NodeCoef& c) {
    double inv = 1.0 + 1.0 / (c.B * c.B);
    return (std::fabs(c.M) + std::fabs(c.N)) * inv + std::fabs(c.B_t / c.B);
}

// Coefficients at an interior point of an interval, from the locally tame
// quantities: r -+ s interpolate linearly, k and B are evaluated where the
// substep actually is. Reproduces the node values at u = 0 and u = 1.
NodeCoef make_coef(double B, double B_t, double B_x, double k, double rm, double rp) {
    rm = std::max(rm, 1e-300);
    double L = 2.0 * B / rm;
    double M = -k * B * rp / rm;
    return {L, M, (M * M - k * k * B * B) / L, B, B_t, B_x};
}

// One grid interval, substepped; coef(u) supplies coefficients at fraction u.
// The rotation budget per substep is capped at 0.005 rad absolutely and at
// h/20 relatively; the relative part ties integrator error to the vertex
// spacing, so mesh refinement sharpens the frames instead of stalling at a
// fixed-tolerance floor.
template <Frame (*Deriv)(const Frame&, const NodeCoef&), class CoefAt>
Frame advance(Frame f, double h, CoefAt&& coef, double rate) {
    double cap = std::min(0.005, 0.05 * std::fabs(h));
    size_t n = size_t(std::ceil(std::fabs(h) * std::max(rate, 1.0) / cap));
    n = std::min(std::max<size_t>(n, 1), size_t(500000));
    double hs = h / double(n);
    NodeCoef c0 = coef(0.0);
    for (size_t q = 0; q < n; ++q) {
        NodeCoef c1 = coef(double(q + 1) / double(n));
        f = midpoint_step<Deriv>(f, hs, c0, c1);
        c0 = c1;
    }
    return f;
}

double mix(double a, double b, double u) { return a + u * (b - a); }

bool frame_ok(const Frame& f, double B) {
    double ax = norm(f.Xx) / B;
    double at = norm(f.Xt);
    return std::isfinite(ax) && std::isfinite(at) && ax >= 0.5 && ax <= 2.0 && at >= 0.5 &&
           at <= 2.0;
}

double first_form_residual(const Frame& f, double B) {
    double e11 = std::fabs(dot(f.Xx, f.Xx) / (B * B) - 1.0);
    double e12 = std::fabs(dot(f.Xx, f.Xt)) / B;
    double e22 = std::fabs(dot(f.Xt, f.Xt) - 1.0);
    return std::max({e11, e12, e22});
}

// Dense least squares for the quadric fit: normal equations, Gaussian
// elimination with partial pivoting. n is tiny (6), no library needed.
bool solve_dense(std::array<std::array<double, 6>, 6>& A, std::array<double, 6>& b) {
    for (int col = 0; col < 6; ++col) {
        int piv = col;
        for (int r = col + 1; r < 6; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        if (std::fabs(A[piv][col]) < 1e-14) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 6; ++r) {
            double m = A[r][col] / A[col][col];
            for (int c2 = col; c2 < 6; ++c2) A[r][c2] -= m * A[col][c2];
            b[r] -= m * b[col];
        }
    }
    for (int r = 5; r >= 0; --r) {
        double acc = b[r];
        for (int c2 = r + 1; c2 < 6; ++c2) acc -= A[r][c2] * b[c2];
        b[r] = acc / A[r][r];
    }
    return true;
}

// Monge-form fit h(u,v) = c0 + c1 u + c2 v + ½c3 u² + c4 uv + ½c5 v² over the
// 3x3 neighborhood, in the frame (e1, e2, e3) built from the node tangents.
// K = (h_uu h_vv - h_uv²)/(1 + h_u² + h_v²)².
double quadric_curvature(const ImmersionMesh& m, size_t i, size_t j) {
    Vec3 e1 = m.X_x.at(i, j);
    double n1 = norm(e1);
    if (n1 < 1e-300) return kNan;
    e1 = (1.0 / n1) * e1;
    Vec3 e2 = m.X_t.at(i, j) - dot(m.X_t.at(i, j), e1) * e1;
    double n2 = norm(e2);
    if (n2 < 1e-300) return kNan;
    e2 = (1.0 / n2) * e2;
    Vec3 e3 = cross(e1, e2);

    std::array<std::array<double, 6>, 6> AtA{};
    std::array<double, 6> Atb{};
    Vec3 p0 = m.X.at(i, j);
    for (size_t ii = i - 1; ii <= i + 1; ++ii)
        for (size_t jj = j - 1; jj <= j + 1; ++jj) {
            Vec3 d = m.X.at(ii, jj) - p0;
            double u = dot(d, e1), v = dot(d, e2), h = dot(d, e3);
            std::array<double, 6> row = {1.0, u, v, 0.5 * u * u, u * v, 0.5 * v * v};
            for (int a = 0; a < 6; ++a) {
                for (int b = 0; b < 6; ++b) AtA[a][b] += row[a] * row[b];
                Atb[a] += row[a] * h;
            }
        }
    if (!solve_dense(AtA, Atb)) return kNan;
    double gu = Atb[1], gv = Atb[2];
    double denom = 1.0 + gu * gu + gv * gv;
    return (Atb[3] * Atb[5] - Atb[4] * Atb[4]) / (denom * denom);
}

std::string csv_cell(double v) { return std::isfinite(v) ? fmt_double(v) : "nan"; }

} // namespace

void invert_second_form(double L, double M, double N, double k, double B, double& w, double& z) {
    (void)N; // determined by the constraint LN - M² = -k²B²
    w = (-M + k * B) / L;
    z = (-M - k * B) / L;
}

SecondFundamentalForm second_fundamental_form(const InvariantField& fld, const MetricGrid& m,
                                              const CurvatureProfile& p) {
    Evolution ev;
    ev.snapshots.push_back(fld);
    return second_fundamental_form(ev, m, p);
}

SecondFundamentalForm second_fundamental_form(const Evolution& ev, const MetricGrid& m,
                                              const CurvatureProfile& p) {
    if (ev.snapshots.empty()) throw std::invalid_argument("second_fundamental_form: no snapshots");
    const std::vector<double>& xs = ev.snapshots.front().xs;
    for (const InvariantField& f : ev.snapshots)
        if (f.xs.size() != xs.size())
            throw std::invalid_argument("second_fundamental_form: snapshot grids differ");

    SecondFundamentalForm s;
    s.xs = xs;
    s.prof = p;
    size_t nx = xs.size(), nt = ev.snapshots.size();
    s.L = Field2<double>(nx, nt);
    s.M = Field2<double>(nx, nt);
    s.N = Field2<double>(nx, nt);
    s.B = Field2<double>(nx, nt, 1.0);
    s.B_t = Field2<double>(nx, nt);
    s.B_x = Field2<double>(nx, nt);
    s.k = Field2<double>(nx, nt);
    s.sep = Field2<double>(nx, nt);
    s.sum = Field2<double>(nx, nt);
    s.valid = Field2<uint8_t>(nx, nt, 0);

    for (size_t j = 0; j < nt; ++j) {
        const InvariantField& f = ev.snapshots[j];
        s.ts.push_back(f.t);
        MetricSlice ms = metric_slice(m, p, f.t);
        for (size_t i = 0; i < nx; ++i) {
            double B = ms.B[i];
            s.B.at(i, j) = B;
            s.B_t.at(i, j) = ms.B_t[i];
            s.B_x.at(i, j) = B * ms.dx_lnB[i];
            double k = eval_curvature(p, xs[i], f.t).k;
            s.k.at(i, j) = k;
            if (!f.valid[i]) continue;
            double w = k * f.r[i], z = k * f.s[i];
            if (!(w - z >= kSepFloor)) continue; // degenerate, excluded
            double L = 2.0 * k * B / (w - z);
            double M = -0.5 * L * (w + z);
            s.L.at(i, j) = L;
            s.M.at(i, j) = M;
            s.N.at(i, j) = (M * M - k * k * B * B) / L;
            s.sep.at(i, j) = f.r[i] - f.s[i];
            s.sum.at(i, j) = f.r[i] + f.s[i];
            s.valid.at(i, j) = 1;
        }
    }
    return s;
}

size_t ImmersionMesh::count_valid() const {
    size_t c = 0;
    for (uint8_t v : valid.data) c += v;
    return c;
}

ImmersionMesh integrate_frame(const SecondFundamentalForm& sff, const MetricGrid& mg) {
    size_t nx = sff.cols(), nt = sff.rows();
    if (nx < 2 || nt < 2) throw std::invalid_argument("integrate_frame: patch too small");
    // Without a profile (hand-built forms in tests) coefficients interpolate
    // node values directly; with one they are rebuilt from r -+ s and exact k.
    const CurvatureProfile* prof = sff.prof ? &*sff.prof : nullptr;

    ImmersionMesh m;
    m.xs = sff.xs;
    m.ts = sff.ts;
    m.X = Field2<Vec3>(nx, nt);
    m.X_x = Field2<Vec3>(nx, nt);
    m.X_t = Field2<Vec3>(nx, nt);
    m.n = Field2<Vec3>(nx, nt);
    m.res_I = Field2<double>(nx, nt, kNan);
    m.res_comm = Field2<double>(nx, nt, kNan);
    m.K_disc = Field2<double>(nx, nt, kNan);
    m.valid = Field2<uint8_t>(nx, nt, 0);

    auto commit = [&](size_t i, size_t j, const Frame& f) {
        m.X.at(i, j) = f.X;
        m.X_x.at(i, j) = f.Xx;
        m.X_t.at(i, j) = f.Xt;
        m.n.at(i, j) = f.n;
        m.res_I.at(i, j) = first_form_residual(f, sff.B.at(i, j));
        m.valid.at(i, j) = 1;
    };

    // base line along x at the first row
    std::vector<Frame> base(nx);
    if (!sff.valid.at(0, 0)) throw std::invalid_argument("integrate_frame: origin cell invalid");
    base[0] = {{0, 0, 0}, {sff.B.at(0, 0), 0, 0}, {0, 1, 0}, {0, 0, 1}};
    commit(0, 0, base[0]);
    size_t base_cols = 1;
    for (size_t i = 0; i + 1 < nx; ++i) {
        if (!sff.valid.at(i, 0) || !sff.valid.at(i + 1, 0)) break;
        double h = sff.xs[i + 1] - sff.xs[i];
        NodeCoef ca = coef_at(sff, i, 0), cb = coef_at(sff, i + 1, 0);
        double t0 = sff.ts[0], xa = sff.xs[i];
        auto coef = [&](double u) {
            if (!prof) return mix_coef(ca, cb, u);
            double k = eval_curvature(*prof, xa + u * h, t0).k;
            return make_coef(mix(ca.B, cb.B, u), mix(ca.B_t, cb.B_t, u),
                             mix(ca.B_x, cb.B_x, u), k,
                             mix(sff.sep.at(i, 0), sff.sep.at(i + 1, 0), u),
                             mix(sff.sum.at(i, 0), sff.sum.at(i + 1, 0), u));
        };
        base[i + 1] = advance<deriv_x>(base[i], h, coef, std::max(rot_rate_x(ca), rot_rate_x(cb)));
        if (!frame_ok(base[i + 1], sff.B.at(i + 1, 0))) break;
        commit(i + 1, 0, base[i + 1]);
        base_cols = i + 2;
    }

    // independent columns in t
    for (size_t i = 0; i < base_cols; ++i) {
        Frame f = base[i];
        size_t col = prof ? mg.col(sff.xs[i]) : 0;
        for (size_t j = 0; j + 1 < nt; ++j) {
            if (!sff.valid.at(i, j) || !sff.valid.at(i, j + 1)) break;
            double h = sff.ts[j + 1] - sff.ts[j];
            NodeCoef ca = coef_at(sff, i, j), cb = coef_at(sff, i, j + 1);
            double ta = sff.ts[j], xv = sff.xs[i];
            auto coef = [&](double u) {
                if (!prof) return mix_coef(ca, cb, u);
                double tv = ta + u * h;
                double B, B_t;
                column_interp(mg, *prof, col, tv, B, B_t);
                double k = eval_curvature(*prof, xv, tv).k;
                return make_coef(B, B_t, mix(ca.B_x, cb.B_x, u), k,
                                 mix(sff.sep.at(i, j), sff.sep.at(i, j + 1), u),
                                 mix(sff.sum.at(i, j), sff.sum.at(i, j + 1), u));
            };
            f = advance<deriv_t>(f, h, coef, std::max(rot_rate_t(ca), rot_rate_t(cb)));
            if (!frame_ok(f, sff.B.at(i, j + 1))) break;
            commit(i, j + 1, f);
        }
    }

    // Finite-difference diagnostics only make sense where the vertex spacing
    // resolves the frame rotation; elsewhere they would difference aliased
    // frames and report noise.
    auto resolved = [&](size_t i, size_t j) {
        NodeCoef c = coef_at(sff, i, j);
        double dx = i + 1 < nx ? sff.xs[i + 1] - sff.xs[i] : sff.xs[i] - sff.xs[i - 1];
        double dt = j + 1 < nt ? sff.ts[j + 1] - sff.ts[j] : sff.ts[j] - sff.ts[j - 1];
        return rot_rate_x(c) * dx <= 0.5 && rot_rate_t(c) * dt <= 0.5;
    };

    // commutator residual, centered where the full plus-stencil is valid
    for (size_t i = 1; i + 1 < nx; ++i)
        for (size_t j = 1; j + 1 < nt; ++j) {
            if (!m.valid.at(i, j) || !m.valid.at(i - 1, j) || !m.valid.at(i + 1, j) ||
                !m.valid.at(i, j - 1) || !m.valid.at(i, j + 1) || !resolved(i, j))
                continue;
            double dt2 = sff.ts[j + 1] - sff.ts[j - 1];
            double dx2 = sff.xs[i + 1] - sff.xs[i - 1];
            Vec3 dXx_dt = (1.0 / dt2) * (m.X_x.at(i, j + 1) - m.X_x.at(i, j - 1));
            Vec3 dXt_dx = (1.0 / dx2) * (m.X_t.at(i + 1, j) - m.X_t.at(i - 1, j));
            m.res_comm.at(i, j) = norm(dXx_dt - dXt_dx);
        }

    // fitted-quadric curvature where the 3x3 block is valid
    for (size_t i = 1; i + 1 < nx; ++i)
        for (size_t j = 1; j + 1 < nt; ++j) {
            bool ok = resolved(i, j);
            for (size_t ii = i - 1; ii <= i + 1 && ok; ++ii)
                for (size_t jj = j - 1; jj <= j + 1; ++jj)
                    if (!m.valid.at(ii, jj)) {
                        ok = false;
                        break;
                    }
            if (ok) m.K_disc.at(i, j) = quadric_curvature(m, i, j);
        }

    return m;
}

ResidualReport verify_immersion(const ImmersionMesh& mesh, const MetricGrid& m,
                                const CurvatureProfile& p) {
    ResidualReport r;
    size_t nx = mesh.cols(), nt = mesh.rows();
    double sumI = 0.0, sumO = 0.0, sumC = 0.0, sumK = 0.0;
    size_t comm_cells = 0;

    for (size_t i = 0; i < nx; ++i) {
        size_t col = m.col(mesh.xs[i]);
        for (size_t j = 0; j < nt; ++j) {
            if (!mesh.valid.at(i, j)) continue;
            double B, B_t;
            column_interp(m, p, col, mesh.ts[j], B, B_t);
            Frame f{mesh.X.at(i, j), mesh.X_x.at(i, j), mesh.X_t.at(i, j), mesh.n.at(i, j)};
            double eI = first_form_residual(f, B);
            double eO = std::max({std::fabs(dot(f.n, f.Xx)) / B, std::fabs(dot(f.n, f.Xt)),
                                  std::fabs(norm(f.n) - 1.0)});
            r.first_form_sup = std::max(r.first_form_sup, eI);
            r.ortho_sup = std::max(r.ortho_sup, eO);
            sumI += eI;
            sumO += eO;
            ++r.cells;

            double c = mesh.res_comm.at(i, j);
            if (std::isfinite(c)) {
                r.comm_sup = std::max(r.comm_sup, c);
                sumC += c;
                ++comm_cells;
            }
            double K = mesh.K_disc.at(i, j);
            double k = eval_curvature(p, mesh.xs[i], mesh.ts[j]).k;
            if (std::isfinite(K) && k > 0.0) {
                double rel = std::fabs(K + k * k) / (k * k);
                r.curv_rel_sup = std::max(r.curv_rel_sup, rel);
                sumK += rel;
                ++r.curv_cells;
            }
        }
    }
    if (r.cells) {
        r.first_form_mean = sumI / double(r.cells);
        r.ortho_mean = sumO / double(r.cells);
    }
    if (comm_cells) r.comm_mean = sumC / double(comm_cells);
    if (r.curv_cells) r.curv_rel_mean = sumK / double(r.curv_cells);
    return r;
}

Field2<double> angle_defect_curvature(const ImmersionMesh& mesh) {
    size_t nx = mesh.cols(), nt = mesh.rows();
    Field2<double> K(nx, nt, kNan);

    auto angle = [&](Vec3 at, Vec3 a, Vec3 b) {
        Vec3 u = a - at, v = b - at;
        double c = dot(u, v) / (norm(u) * norm(v));
        return std::acos(std::clamp(c, -1.0, 1.0));
    };
    auto area = [&](Vec3 a, Vec3 b, Vec3 c) { return 0.5 * norm(cross(b - a, c - a)); };

    for (size_t i = 1; i + 1 < nx; ++i)
        for (size_t j = 1; j + 1 < nt; ++j) {
            bool ok = true;
            for (size_t ii = i - 1; ii <= i + 1 && ok; ++ii)
                for (size_t jj = j - 1; jj <= j + 1; ++jj)
                    if (!mesh.valid.at(ii, jj)) {
                        ok = false;
                        break;
                    }
            if (!ok) continue;
            Vec3 P = mesh.X.at(i, j);
            // the six incident triangles of the lower-left/upper-right split
            std::array<std::array<Vec3, 2>, 6> tris = {{
                {mesh.X.at(i - 1, j - 1), mesh.X.at(i, j - 1)},
                {mesh.X.at(i - 1, j - 1), mesh.X.at(i - 1, j)},
                {mesh.X.at(i, j - 1), mesh.X.at(i + 1, j)},
                {mesh.X.at(i + 1, j), mesh.X.at(i + 1, j + 1)},
                {mesh.X.at(i + 1, j + 1), mesh.X.at(i, j + 1)},
                {mesh.X.at(i, j + 1), mesh.X.at(i - 1, j)},
            }};
            double defect = 2.0 * M_PI;
            double A = 0.0;
            for (const auto& tr : tris) {
                defect -= angle(P, tr[0], tr[1]);
                A += area(P, tr[0], tr[1]) / 3.0;
            }
            if (A > 0.0) K.at(i, j) = defect / A;
        }
    return K;
}

void ImmersionMesh::write_csv(const std::string& path) const {
    CsvWriter w(path, "x,t,px,py,pz,res_I,res_comm,K_disc");
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < ts.size(); ++j) {
            if (!valid.at(i, j)) continue;
            Vec3 p = X.at(i, j);
            w.raw_row({fmt_double(xs[i]), fmt_double(ts[j]), fmt_double(p.x), fmt_double(p.y),
                       fmt_double(p.z), csv_cell(res_I.at(i, j)), csv_cell(res_comm.at(i, j)),
                       csv_cell(K_disc.at(i, j))});
        }
}

void ImmersionMesh::write_obj(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "# gauge: X = 0 at patch origin, X_x along e1, X_t = e2, n = e3\n";
    size_t nx = xs.size(), nt = ts.size();
    for (size_t j = 0; j < nt; ++j)
        for (size_t i = 0; i < nx; ++i) {
            Vec3 p = X.at(i, j);
            out << "v " << fmt_double(p.x) << " " << fmt_double(p.y) << " " << fmt_double(p.z)
                << "\n";
        }
    auto id = [&](size_t i, size_t j) { return j * nx + i + 1; };
    for (size_t j = 0; j + 1 < nt; ++j)
        for (size_t i = 0; i + 1 < nx; ++i) {
            if (!valid.at(i, j) || !valid.at(i + 1, j) || !valid.at(i + 1, j + 1) ||
                !valid.at(i, j + 1))
                continue;
            // diagonal from (i,j) to (i+1,j+1)
            out << "f " << id(i, j) << " " << id(i + 1, j) << " " << id(i + 1, j + 1) << "\n";
            out << "f " << id(i, j) << " " << id(i + 1, j + 1) << " " << id(i, j + 1) << "\n";
        }
}

void ImmersionMesh::write_ply(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    size_t nx = xs.size(), nt = ts.size();
    size_t nfaces = 0;
    for (size_t j = 0; j + 1 < nt; ++j)
        for (size_t i = 0; i + 1 < nx; ++i)
            if (valid.at(i, j) && valid.at(i + 1, j) && valid.at(i + 1, j + 1) &&
                valid.at(i, j + 1))
                nfaces += 2;
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << nx * nt << "\n";
    out << "property double x\nproperty double y\nproperty double z\n";
    out << "element face " << nfaces << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    for (size_t j = 0; j < nt; ++j)
        for (size_t i = 0; i < nx; ++i) {
            Vec3 p = X.at(i, j);
            out << fmt_double(p.x) << " " << fmt_double(p.y) << " " << fmt_double(p.z) << "\n";
        }
    auto id = [&](size_t i, size_t j) { return j * nx + i; };
    for (size_t j = 0; j + 1 < nt; ++j)
        for (size_t i = 0; i + 1 < nx; ++i) {
            if (!valid.at(i, j) || !valid.at(i + 1, j) || !valid.at(i + 1, j + 1) ||
                !valid.at(i, j + 1))
                continue;
            out << "3 " << id(i, j) << " " << id(i + 1, j) << " " << id(i + 1, j + 1) << "\n";
            out << "3 " << id(i, j) << " " << id(i + 1, j + 1) << " " << id(i, j + 1) << "\n";
        }
}

void export_mesh(const ImmersionMesh& mesh, MeshFormat fmt, const std::string& path) {
    if (mesh.count_valid() == 0) throw std::invalid_argument("export_mesh: empty mesh");
    switch (fmt) {
    case MeshFormat::obj: mesh.write_obj(path); break;
    case MeshFormat::ply: mesh.write_ply(path); break;
    case MeshFormat::csv: mesh.write_csv(path); break;
    }
}

} // namespace gcflow
