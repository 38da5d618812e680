#pragma once

#include "varifolds/errors.hpp"
#include "varifolds/model_space.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace varifolds {

struct BoundaryEdge {
    int axis = 0; // 0 = u, 1 = v; the edge runs along the other axis
    bool at_min = false;
};

/// Rectangular parameter domain [u0,u1] x [v0,v1] with per-axis periodicity,
/// removable chart degeneracies (poles) at axis endpoints, and declared
/// boundary edges for bordered surfaces. For curves (m = 1) only the u axis
/// is meaningful.
struct ParameterDomain {
    double u0 = 0.0, u1 = 1.0;
    double v0 = 0.0, v1 = 1.0;
    bool periodic_u = false, periodic_v = false;
    bool pole_u_min = false, pole_u_max = false;
    bool pole_v_min = false, pole_v_max = false;
    std::vector<BoundaryEdge> boundary_edges;

    double lo(int axis) const { return axis == 0 ? u0 : v0; }
    double hi(int axis) const { return axis == 0 ? u1 : v1; }
    double extent(int axis) const { return hi(axis) - lo(axis); }
    bool periodic(int axis) const { return axis == 0 ? periodic_u : periodic_v; }
    bool pole(int axis, bool at_min) const {
        if (axis == 0) return at_min ? pole_u_min : pole_u_max;
        return at_min ? pole_v_min : pole_v_max;
    }

    void validate(int m) const {
        if (!(u1 > u0)) throw ContractError("ParameterDomain: u interval is empty");
        if (m == 2 && !(v1 > v0)) throw ContractError("ParameterDomain: v interval is empty");
        for (const auto& e : boundary_edges) {
            if (e.axis < 0 || e.axis >= m)
                throw ContractError("ParameterDomain: boundary edge on unused axis");
            if (periodic(e.axis))
                throw ContractError("ParameterDomain: boundary edge on a periodic axis");
            if (pole(e.axis, e.at_min))
                throw ContractError("ParameterDomain: boundary edge at a degenerate pole");
        }
    }

    /// Closed (boundaryless compact) chart: no boundary edges and every
    /// non-periodic axis end carries a removable pole.
    bool is_closed(int m) const {
        if (!boundary_edges.empty()) return false;
        for (int a = 0; a < m; ++a) {
            if (periodic(a)) continue;
            if (!pole(a, true) || !pole(a, false)) return false;
        }
        return true;
    }
};

/// Position and first/second parameter derivatives at one chart point.
struct Jet2 {
    Vec f, fu, fv, fuu, fuv, fvv;
};

/// Parametric immersion of a rectangle (or interval, m = 1) into a model
/// space. Analytic derivative evaluators are optional; a Richardson-
/// extrapolated central-difference jet is the fallback.
struct ParametricImmersion {
    ModelSpace space{3, 0.0};
    int m = 2;
    ParameterDomain domain;
    std::function<Vec(double, double)> eval;
    std::function<Jet2(double, double)> analytic_jet;
    std::vector<std::pair<Vec, int>> multiplicity_hints;
    double fd_step_rel = 1e-4;
    std::string name;

    Vec position(double u, double v) const { return eval(u, v); }

    Jet2 jet(double u, double v) const {
        if (analytic_jet) return analytic_jet(u, v);
        return fd_jet(u, v);
    }

    Jet2 fd_jet(double u, double v) const {
        const int d = space.ambient_dim();
        double hu = fd_step_rel * domain.extent(0);
        double hv = m == 2 ? fd_step_rel * domain.extent(1) : 0.0;
        auto F = [&](double a, double b2) { return eval(a, b2); };
        Jet2 J;
        J.f = F(u, v);
        auto rich1 = [&](auto diff, double h) {
            Vec a = diff(h), b2 = diff(0.5 * h);
            return ((4.0 * b2 - a) / 3.0).eval();
        };
        J.fu = rich1([&](double h) { return ((F(u + h, v) - F(u - h, v)) / (2.0 * h)).eval(); }, hu);
        J.fuu = rich1(
            [&](double h) { return ((F(u + h, v) - 2.0 * J.f + F(u - h, v)) / (h * h)).eval(); },
            hu);
        if (m == 2) {
            J.fv = rich1([&](double h) { return ((F(u, v + h) - F(u, v - h)) / (2.0 * h)).eval(); },
                         hv);
            J.fvv = rich1(
                [&](double h) { return ((F(u, v + h) - 2.0 * J.f + F(u, v - h)) / (h * h)).eval(); },
                hv);
            auto mixed = [&](double s) {
                double a = s * hu, b2 = s * hv;
                return ((F(u + a, v + b2) - F(u + a, v - b2) - F(u - a, v + b2) +
                         F(u - a, v - b2)) /
                        (4.0 * a * b2))
                    .eval();
            };
            Vec c1 = mixed(1.0), c2 = mixed(0.5);
            J.fuv = (4.0 * c2 - c1) / 3.0;
        } else {
            J.fv = Vec::Zero(d);
            J.fvv = Vec::Zero(d);
            J.fuv = Vec::Zero(d);
        }
        return J;
    }

    /// First derivatives only (cheaper than a full jet for area work).
    void d1(double u, double v, Vec& fu, Vec& fv) const {
        if (analytic_jet) {
            Jet2 J = analytic_jet(u, v);
            fu = std::move(J.fu);
            fv = std::move(J.fv);
            return;
        }
        double hu = fd_step_rel * domain.extent(0);
        fu = (eval(u + hu, v) - eval(u - hu, v)) / (2.0 * hu);
        if (m == 2) {
            double hv = fd_step_rel * domain.extent(1);
            fv = (eval(u, v + hv) - eval(u, v - hv)) / (2.0 * hv);
        } else {
            fv = Vec::Zero(space.ambient_dim());
        }
    }
};

/// Pullback metric g_ij = g(d_i f, d_j f) at a chart point (m x m).
inline Mat pullback_metric_from_jet(const ParametricImmersion& imm, const Jet2& J) {
    Mat g(imm.m, imm.m);
    const Vec* d[2] = {&J.fu, &J.fv};
    for (int i = 0; i < imm.m; ++i)
        for (int j = i; j < imm.m; ++j) g(i, j) = g(j, i) = imm.space.form(*d[i], *d[j]);
    return g;
}

inline Mat pullback_metric(const ParametricImmersion& imm, double u, double v) {
    Mat g = pullback_metric_from_jet(imm, imm.jet(u, v));
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (es.eigenvalues().minCoeff() <= 1e-8)
        throw DegenerateImmersionError("pullback_metric: immersion loses rank at (" +
                                       std::to_string(u) + ", " + std::to_string(v) + ")");
    return g;
}

/// Mean curvature vector of the immersed surface inside the model space:
/// the Laplace-Beltrami of the embedding coordinates, projected form-
/// orthogonally onto the tangent space of the quadric. Valid because the
/// quadric is umbilic in its flat ambient space.
inline TangentVector mean_curvature_from_jet(const ParametricImmersion& imm, const Jet2& J) {
    const ModelSpace& S = imm.space;
    Mat g = pullback_metric_from_jet(imm, J);
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (es.eigenvalues().minCoeff() <= 1e-8)
        throw DegenerateImmersionError("mean_curvature: immersion loses rank");
    Mat gi = g.inverse();
    const Vec* d1[2] = {&J.fu, &J.fv};
    const Vec* d2[2][2] = {{&J.fuu, &J.fuv}, {&J.fuv, &J.fvv}};
    Vec lap = Vec::Zero(S.ambient_dim());
    for (int i = 0; i < imm.m; ++i) {
        for (int j = 0; j < imm.m; ++j) {
            // remove the surface-tangential part of the second derivative
            Vec a = *d2[i][j];
            for (int k = 0; k < imm.m; ++k) {
                double coef = 0.0;
                for (int l = 0; l < imm.m; ++l) coef += gi(k, l) * S.form(a, *d1[l]);
                a -= coef * *d1[k];
            }
            lap += gi(i, j) * a;
        }
    }
    Point p{J.f};
    return TangentVector{p, S.project_to_tangent(p, lap)};
}

inline TangentVector mean_curvature(const ParametricImmersion& imm, double u, double v) {
    return mean_curvature_from_jet(imm, imm.jet(u, v));
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules (nodes on [-1,1]), computed once per order by Newton
// iteration on the Legendre recurrence.
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<double> x, w;
};

inline const GaussRule& gauss_rule(int q) {
    static std::vector<GaussRule> cache(32);
    if (q < 1 || q > 31) throw ContractError("gauss_rule: order out of range");
    GaussRule& R = cache[static_cast<size_t>(q)];
    if (!R.x.empty()) return R;
    R.x.resize(static_cast<size_t>(q));
    R.w.resize(static_cast<size_t>(q));
    for (int i = 0; i < q; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (q + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = q * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= q; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = q * (x * p1 - p0) / (x * x - 1.0);
        R.x[static_cast<size_t>(q - 1 - i)] = x;
        R.w[static_cast<size_t>(q - 1 - i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return R;
}

/// Composite tensor quadrature: cells_u x cells_v uniform cells, a
/// cell_order-point Gauss rule per cell and axis.
struct QuadratureSpec {
    int cells_u = 32;
    int cells_v = 32;
    int cell_order = 3;
    int boundary_cells = 64;
};

/// Counts preimage clusters of p under the immersion(s) within tolerance tol,
/// by scanning a fine parameter grid and merging adjacent hits. Returns 0 if
/// no chart point comes within tol of p.
inline int multiplicity_at(const std::vector<const ParametricImmersion*>& charts, const Point& p,
                           double tol, int scan_n = 192) {
    if (!(tol > 0.0)) throw ContractError("multiplicity_at: tol must be positive");
    int clusters = 0;
    for (const auto* immp : charts) {
        const ParametricImmersion& imm = *immp;
        const int nu = scan_n;
        const int nv = imm.m == 2 ? scan_n : 1;
        std::vector<char> hit(static_cast<size_t>(nu * nv), 0);
        for (int i = 0; i < nu; ++i) {
            double u = imm.domain.u0 + (i + 0.5) * imm.domain.extent(0) / nu;
            for (int j = 0; j < nv; ++j) {
                double v = imm.m == 2 ? imm.domain.v0 + (j + 0.5) * imm.domain.extent(1) / nv : 0.0;
                Vec x = imm.eval(u, v);
                double d = distance(imm.space, Point{x}, p);
                if (d <= tol) hit[static_cast<size_t>(i * nv + j)] = 1;
            }
        }
        // connected components over the hit mask (8-neighbourhood, periodic aware)
        std::vector<char> seen(hit.size(), 0);
        std::vector<int> stack;
        for (int s = 0; s < nu * nv; ++s) {
            if (!hit[static_cast<size_t>(s)] || seen[static_cast<size_t>(s)]) continue;
            ++clusters;
            stack.assign(1, s);
            seen[static_cast<size_t>(s)] = 1;
            while (!stack.empty()) {
                int cur = stack.back();
                stack.pop_back();
                int ci = cur / nv, cj = cur % nv;
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        int ni = ci + di, nj = cj + dj;
                        if (imm.domain.periodic_u) ni = (ni + nu) % nu;
                        if (imm.m == 2 && imm.domain.periodic_v) nj = (nj + nv) % nv;
                        if (ni < 0 || ni >= nu || nj < 0 || nj >= nv) continue;
                        int idx = ni * nv + nj;
                        if (hit[static_cast<size_t>(idx)] && !seen[static_cast<size_t>(idx)]) {
                            seen[static_cast<size_t>(idx)] = 1;
                            stack.push_back(idx);
                        }
                    }
                }
            }
        }
    }
    return clusters;
}

inline int multiplicity_at(const ParametricImmersion& imm, const Point& p, double tol) {
    return multiplicity_at(std::vector<const ParametricImmersion*>{&imm}, p, tol);
}

} // namespace varifolds
