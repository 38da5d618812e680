#pragma once

#include "varifolds/comparison.hpp"
#include "varifolds/varifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <tuple>
#include <vector>

namespace varifolds {

/// Controls the adaptive bisection of parameter cells straddling the sphere
/// d = r. eps_rel is the target straddle mass as a fraction of total mass.
struct BallQueryOptions {
    double eps_rel = 1e-4;
    int max_depth = 8;
};

/// A ball-restricted quantity: open/closed values, a bound on the evaluation
/// error, and the unresolved mass in cells straddling d = r.
struct RestrictedValue {
    double open_value = 0.0;
    double closed_value = 0.0;
    double uncertainty = 0.0;
    double straddle_mass = 0.0;
};

/// Per-sample scalars every ball-restricted integrand is built from.
struct NodeScalars {
    double r = 0.0;    // distance to the profile centre
    double w = 0.0;    // quadrature weight x area element
    double absH = 0.0; // |H|_g
    double H2 = 0.0;   // |H|_g^2
    double grH = 0.0;  // g(grad r, H)
};

/// Boundary analogue; grNu = g(grad r, nu) with nu the outward conormal.
struct BoundaryNodeScalars {
    double r = 0.0;
    double w = 0.0;
    double grNu = 0.0;
};

using Integrand = std::function<double(const NodeScalars&)>;
using BoundaryIntegrand = std::function<double(const BoundaryNodeScalars&)>;

/// Distance profile of a sampled varifold around a centre point. Answers
/// ball masses and ball-restricted integrals; cells that straddle the cut
/// sphere are bisected, re-quadrating the source immersion through the
/// varifold's provenance. Straddling leaves contribute a secant-interpolated
/// fraction of their mass, and the reported uncertainty bounds the error.
class MassProfile {
public:
    MassProfile(const SampledVarifold& V, Point p) : V_(&V), p_(std::move(p)) {
        build_interior();
        build_boundary();
    }

    const Point& centre() const { return p_; }
    double total_mass() const { return total_mass_; }
    double total_boundary_weight() const { return total_boundary_; }

    /// Distance from the centre to the nearest boundary atom (inf if none).
    double boundary_clearance() const { return boundary_clearance_; }

    /// Finest length scale resolvable near radius near_r at the given depth.
    double local_resolution(double near_r, int max_depth) const {
        double h = 0.0;
        for (const auto& c : cells_)
            if (c.rlo <= near_r || cells_.size() == 1) h = std::max(h, c.diam);
        if (h == 0.0)
            for (const auto& c : cells_) h = std::max(h, c.diam);
        return V_->charts.empty() ? h : h / std::pow(2.0, max_depth);
    }

    RestrictedValue mass(double r, const BallQueryOptions& opts = {}) {
        static const Integrand one = [](const NodeScalars&) { return 1.0; };
        return integrate(r, std::span<const Integrand>(&one, 1), opts)[0];
    }

    /// Several ball-restricted integrals sharing one cell classification.
    std::vector<RestrictedValue> integrate(double r, std::span<const Integrand> fs,
                                           const BallQueryOptions& opts = {}) {
        std::vector<RestrictedValue> out(fs.size());
        const double eps_abs = opts.eps_rel * std::max(total_mass_, 1e-300);
        for (const auto& c : cells_) {
            if (c.rhi < r) {
                for (size_t k = 0; k < fs.size(); ++k) {
                    double s = 0.0;
                    for (const auto& nd : c.nodes) s += nd.w * fs[k](nd);
                    out[k].open_value += s;
                    out[k].closed_value += s;
                }
            } else if (c.rlo > r) {
                continue;
            } else if (c.chart < 0 || V_->charts.empty()) {
                leaf(c.nodes, c.mass, r, fs, out);
            } else {
                SubCell root{c.u0, c.u1, c.v0, c.v1, c.mass, c.rlo, c.rhi, c.nodes};
                refine(c.chart, root, r, 0, eps_abs, opts.max_depth, fs, out);
            }
        }
        return out;
    }

    std::vector<RestrictedValue> integrate_boundary(double r, std::span<const BoundaryIntegrand> fs,
                                                    const BallQueryOptions& opts = {}) {
        std::vector<RestrictedValue> out(fs.size());
        const double eps_abs = opts.eps_rel * std::max(total_boundary_, 1e-300);
        for (const auto& c : bcells_) {
            if (c.rhi < r) {
                for (size_t k = 0; k < fs.size(); ++k) {
                    double s = 0.0;
                    for (const auto& nd : c.nodes) s += nd.w * fs[k](nd);
                    out[k].open_value += s;
                    out[k].closed_value += s;
                }
            } else if (c.rlo > r) {
                continue;
            } else if (c.chart < 0 || V_->charts.empty()) {
                leaf(c.nodes, c.mass, r, fs, out);
            } else {
                SubBCell root{c.t0, c.t1, c.mass, c.rlo, c.rhi, c.nodes};
                refine_b(c.chart, c.edge, root, r, 0, eps_abs, opts.max_depth, fs, out);
            }
        }
        return out;
    }

private:
    struct Cell {
        int chart = -1;
        double u0 = 0, u1 = 0, v0 = 0, v1 = 0;
        double mass = 0.0;
        double rlo = 0.0, rhi = 0.0;
        double diam = 0.0;
        std::vector<NodeScalars> nodes;
        std::vector<Vec> points;
    };
    struct BCell {
        int chart = -1, edge = -1;
        double t0 = 0, t1 = 0;
        double mass = 0.0;
        double rlo = 0.0, rhi = 0.0;
        std::vector<BoundaryNodeScalars> nodes;
    };
    struct SubCell {
        double u0, u1, v0, v1;
        double mass = 0.0;
        double rlo = 0.0, rhi = 0.0;
        std::vector<NodeScalars> nodes;
    };
    struct SubBCell {
        double t0, t1;
        double mass = 0.0;
        double rlo = 0.0, rhi = 0.0;
        std::vector<BoundaryNodeScalars> nodes;
    };

    NodeScalars node_scalars(const Point& x, double w, const TangentVector& H) const {
        NodeScalars nd;
        nd.r = distance(V_->space, p_, x);
        nd.w = w;
        nd.H2 = V_->space.form(H.components, H.components);
        nd.absH = std::sqrt(std::max(0.0, nd.H2));
        if (nd.r > 1e-13) {
            TangentVector gr = grad_dist(V_->space, p_, x);
            nd.grH = V_->space.form(gr.components, H.components);
        }
        return nd;
    }

    static std::int64_t cell_key(const CellRef& c, size_t fallback) {
        if (c.chart < 0) return -static_cast<std::int64_t>(fallback) - 1;
        return (static_cast<std::int64_t>(c.chart) << 40) | (static_cast<std::int64_t>(c.cu) << 20) |
               static_cast<std::int64_t>(c.cv);
    }

    void build_interior() {
        std::map<std::int64_t, size_t> index;
        for (size_t ai = 0; ai < V_->atoms.size(); ++ai) {
            const Atom& a = V_->atoms[ai];
            auto [it, fresh] = index.try_emplace(cell_key(a.cell, ai), cells_.size());
            if (fresh) {
                Cell c;
                c.chart = a.cell.chart;
                if (a.cell.chart >= 0 && static_cast<size_t>(a.cell.chart) < V_->charts.size()) {
                    const auto& ch = V_->charts[static_cast<size_t>(a.cell.chart)];
                    const auto& I = *ch.immersion;
                    double hu = I.domain.extent(0) / ch.spec.cells_u;
                    c.u0 = I.domain.u0 + a.cell.cu * hu;
                    c.u1 = c.u0 + hu;
                    if (I.m == 2) {
                        double hv = I.domain.extent(1) / ch.spec.cells_v;
                        c.v0 = I.domain.v0 + a.cell.cv * hv;
                        c.v1 = c.v0 + hv;
                    }
                }
                cells_.push_back(std::move(c));
            }
            Cell& c = cells_[it->second];
            c.nodes.push_back(node_scalars(a.point, a.weight, a.H));
            c.points.push_back(a.point.coords);
            c.mass += a.weight;
        }
        for (auto& c : cells_) {
            double rmin = kInf, rmax = 0.0;
            for (const auto& nd : c.nodes) {
                rmin = std::min(rmin, nd.r);
                rmax = std::max(rmax, nd.r);
            }
            double diam = 0.0;
            for (size_t a = 0; a < c.points.size(); ++a)
                for (size_t b = a + 1; b < c.points.size(); ++b)
                    diam = std::max(diam, distance(V_->space, Point{c.points[a]}, Point{c.points[b]}));
            c.diam = 1.35 * diam; // interior Gauss nodes span ~77% of the cell
            double pad = c.chart >= 0 ? 0.5 * c.diam + 1e-14 : c.diam + 1e-12;
            c.rlo = std::max(0.0, rmin - pad);
            c.rhi = rmax + pad;
            c.points.clear();
            c.points.shrink_to_fit();
            total_mass_ += c.mass;
        }
    }

    void build_boundary() {
        std::map<std::int64_t, size_t> index;
        for (size_t bi = 0; bi < V_->boundary.size(); ++bi) {
            const BoundaryAtom& b = V_->boundary[bi];
            std::int64_t key = b.cell.chart < 0
                                   ? -static_cast<std::int64_t>(bi) - 1
                                   : ((static_cast<std::int64_t>(b.cell.chart) << 40) |
                                      (static_cast<std::int64_t>(b.cell.cv) << 20) |
                                      static_cast<std::int64_t>(b.cell.cu));
            auto [it, fresh] = index.try_emplace(key, bcells_.size());
            if (fresh) {
                BCell c;
                c.chart = b.cell.chart;
                c.edge = b.cell.cv;
                if (b.cell.chart >= 0 && static_cast<size_t>(b.cell.chart) < V_->charts.size()) {
                    const auto& ch = V_->charts[static_cast<size_t>(b.cell.chart)];
                    const auto& I = *ch.immersion;
                    const BoundaryEdge& e = I.domain.boundary_edges[static_cast<size_t>(c.edge)];
                    int along = e.axis == 0 ? 1 : 0;
                    double ht = I.domain.extent(along) / ch.spec.boundary_cells;
                    c.t0 = I.domain.lo(along) + b.cell.cu * ht;
                    c.t1 = c.t0 + ht;
                }
                bcells_.push_back(std::move(c));
            }
            BCell& c = bcells_[it->second];
            BoundaryNodeScalars nd;
            nd.r = distance(V_->space, p_, b.point);
            nd.w = b.weight;
            if (nd.r > 1e-13) {
                TangentVector gr = grad_dist(V_->space, p_, b.point);
                nd.grNu = V_->space.form(gr.components, b.conormal.components);
            }
            boundary_clearance_ = std::min(boundary_clearance_, nd.r);
            c.nodes.push_back(nd);
            c.mass += b.weight;
        }
        for (auto& c : bcells_) {
            double rmin = kInf, rmax = 0.0;
            for (const auto& nd : c.nodes) {
                rmin = std::min(rmin, nd.r);
                rmax = std::max(rmax, nd.r);
            }
            double pad = (c.chart >= 0 ? 0.8 : 1.0) * (rmax - rmin) + 1e-12;
            c.rlo = std::max(0.0, rmin - pad);
            c.rhi = rmax + pad;
            total_boundary_ += c.mass;
        }
    }

    /// Straddling leaf: include a secant-interpolated fraction of the cell,
    /// treating exact distance ties per open/closed semantics.
    template <typename Nodes, typename FS>
    void leaf(const Nodes& nodes, double mass, double r, const FS& fs,
              std::vector<RestrictedValue>& out) const {
        double rlo = kInf, rhi = 0.0;
        for (const auto& nd : nodes) {
            rlo = std::min(rlo, nd.r);
            rhi = std::max(rhi, nd.r);
        }
        double frac = rhi > rlo ? std::clamp((r - rlo) / (rhi - rlo), 0.0, 1.0)
                                : (rlo <= r ? 1.0 : 0.0);
        for (size_t k = 0; k < fs.size(); ++k) {
            double s = 0.0, sabs = 0.0, tie = 0.0;
            for (const auto& nd : nodes) {
                double val = nd.w * fs[k](nd);
                s += val;
                sabs += std::abs(val);
                if (nd.r == r) tie += val;
            }
            out[k].open_value += frac * s - frac * tie;
            out[k].closed_value += frac * s + (1.0 - frac) * tie;
            out[k].uncertainty += std::max(frac, 1.0 - frac) * sabs;
            out[k].straddle_mass += mass;
        }
    }

    SubCell make_subcell(int chart, double u0, double u1, double v0, double v1) const {
        const auto& ch = V_->charts[static_cast<size_t>(chart)];
        const ParametricImmersion& I = *ch.immersion;
        const GaussRule& G = gauss_rule(ch.spec.cell_order);
        SubCell s{u0, u1, v0, v1};
        double rmin = kInf, rmax = 0.0;
        std::vector<Vec> sampled;
        auto visit = [&](double u, double v, double wfac) {
            Jet2 J = I.jet(u, v);
            Mat g = pullback_metric_from_jet(I, J);
            double det = g.determinant();
            Point x{J.f};
            NodeScalars nd =
                node_scalars(x, wfac * (det > 0.0 ? std::sqrt(det) : 0.0),
                             mean_curvature_from_jet(I, J));
            rmin = std::min(rmin, nd.r);
            rmax = std::max(rmax, nd.r);
            sampled.push_back(J.f);
            s.mass += nd.w;
            s.nodes.push_back(nd);
        };
        if (I.m == 2) {
            for (size_t gi = 0; gi < G.x.size(); ++gi)
                for (size_t gj = 0; gj < G.x.size(); ++gj)
                    visit(u0 + 0.5 * (1.0 + G.x[gi]) * (u1 - u0),
                          v0 + 0.5 * (1.0 + G.x[gj]) * (v1 - v0),
                          0.25 * (u1 - u0) * (v1 - v0) * G.w[gi] * G.w[gj]);
        } else {
            for (size_t gi = 0; gi < G.x.size(); ++gi)
                visit(u0 + 0.5 * (1.0 + G.x[gi]) * (u1 - u0), 0.0, 0.5 * (u1 - u0) * G.w[gi]);
        }
        double diam = 0.0;
        for (size_t a = 0; a < sampled.size(); ++a)
            for (size_t b = a + 1; b < sampled.size(); ++b)
                diam = std::max(diam, distance(V_->space, Point{sampled[a]}, Point{sampled[b]}));
        double pad = 0.675 * diam + 1e-15;
        s.rlo = std::max(0.0, rmin - pad);
        s.rhi = rmax + pad;
        return s;
    }

    void refine(int chart, const SubCell& s, double r, int depth, double eps_abs, int max_depth,
                std::span<const Integrand> fs, std::vector<RestrictedValue>& out) {
        if (s.rhi < r) {
            for (size_t k = 0; k < fs.size(); ++k) {
                double sum = 0.0;
                for (const auto& nd : s.nodes) sum += nd.w * fs[k](nd);
                out[k].open_value += sum;
                out[k].closed_value += sum;
            }
            return;
        }
        if (s.rlo > r) return;
        if (depth >= max_depth || s.mass < 0.0625 * eps_abs) {
            leaf(s.nodes, s.mass, r, fs, out);
            return;
        }
        if (V_->charts[static_cast<size_t>(chart)].immersion->m == 2) {
            double um = 0.5 * (s.u0 + s.u1), vm = 0.5 * (s.v0 + s.v1);
            const double rect[4][4] = {{s.u0, um, s.v0, vm},
                                       {um, s.u1, s.v0, vm},
                                       {s.u0, um, vm, s.v1},
                                       {um, s.u1, vm, s.v1}};
            for (const auto& q : rect)
                refine(chart, subcell_cached(chart, q[0], q[1], q[2], q[3]), r, depth + 1, eps_abs,
                       max_depth, fs, out);
        } else {
            double um = 0.5 * (s.u0 + s.u1);
            refine(chart, subcell_cached(chart, s.u0, um, 0, 0), r, depth + 1, eps_abs, max_depth,
                   fs, out);
            refine(chart, subcell_cached(chart, um, s.u1, 0, 0), r, depth + 1, eps_abs, max_depth,
                   fs, out);
        }
    }

    const SubCell& subcell_cached(int chart, double u0, double u1, double v0, double v1) {
        auto key = std::make_tuple(chart, u0, u1, v0, v1);
        auto it = subcell_cache_.find(key);
        if (it == subcell_cache_.end())
            it = subcell_cache_.emplace(key, make_subcell(chart, u0, u1, v0, v1)).first;
        return it->second;
    }

    SubBCell make_sub_bcell(int chart, int edge, double t0, double t1) const {
        const auto& ch = V_->charts[static_cast<size_t>(chart)];
        const ParametricImmersion& I = *ch.immersion;
        const BoundaryEdge& e = I.domain.boundary_edges[static_cast<size_t>(edge)];
        const GaussRule& G = gauss_rule(ch.spec.cell_order);
        SubBCell s{t0, t1};
        double rmin = kInf, rmax = 0.0;
        for (size_t gi = 0; gi < G.x.size(); ++gi) {
            double t = t0 + 0.5 * (1.0 + G.x[gi]) * (t1 - t0);
            BoundarySample bs = boundary_sample(I, e, t);
            BoundaryNodeScalars nd;
            nd.r = distance(V_->space, p_, bs.point);
            nd.w = 0.5 * (t1 - t0) * G.w[gi] * bs.edge_speed;
            if (nd.r > 1e-13) {
                TangentVector gr = grad_dist(V_->space, p_, bs.point);
                nd.grNu = V_->space.form(gr.components, bs.conormal.components);
            }
            rmin = std::min(rmin, nd.r);
            rmax = std::max(rmax, nd.r);
            s.mass += nd.w;
            s.nodes.push_back(nd);
        }
        double pad = 0.8 * (rmax - rmin) + 1e-15;
        s.rlo = std::max(0.0, rmin - pad);
        s.rhi = rmax + pad;
        return s;
    }

    void refine_b(int chart, int edge, const SubBCell& s, double r, int depth, double eps_abs,
                  int max_depth, std::span<const BoundaryIntegrand> fs,
                  std::vector<RestrictedValue>& out) {
        if (s.rhi < r) {
            for (size_t k = 0; k < fs.size(); ++k) {
                double sum = 0.0;
                for (const auto& nd : s.nodes) sum += nd.w * fs[k](nd);
                out[k].open_value += sum;
                out[k].closed_value += sum;
            }
            return;
        }
        if (s.rlo > r) return;
        if (depth >= max_depth || s.mass < 0.0625 * eps_abs) {
            leaf(s.nodes, s.mass, r, fs, out);
            return;
        }
        double tm = 0.5 * (s.t0 + s.t1);
        refine_b(chart, edge, make_sub_bcell(chart, edge, s.t0, tm), r, depth + 1, eps_abs,
                 max_depth, fs, out);
        refine_b(chart, edge, make_sub_bcell(chart, edge, tm, s.t1), r, depth + 1, eps_abs,
                 max_depth, fs, out);
    }

    const SampledVarifold* V_;
    Point p_;
    std::vector<Cell> cells_;
    std::vector<BCell> bcells_;
    double total_mass_ = 0.0;
    double total_boundary_ = 0.0;
    double boundary_clearance_ = kInf;
    std::map<std::tuple<int, double, double, double, double>, SubCell> subcell_cache_;
};

enum class BallMode { Open, Closed };

struct MassResult {
    double value = 0.0;
    double uncertainty = 0.0;
    double straddle_mass = 0.0;
};

/// Weight-measure mass of the open or closed ball of radius r around p.
inline MassResult mass_in_ball(const SampledVarifold& V, const Point& p, double r, BallMode mode,
                               const BallQueryOptions& opts = {}) {
    if (!(r > 0.0)) throw DomainError("mass_in_ball: radius must be positive");
    MassProfile prof(V, p);
    RestrictedValue rv = prof.mass(r, opts);
    return MassResult{mode == BallMode::Open ? rv.open_value : rv.closed_value, rv.uncertainty,
                      rv.straddle_mass};
}

// ---------------------------------------------------------------------------
// Density estimation by ratio extrapolation over a decreasing radius ladder
// ---------------------------------------------------------------------------

struct DensityEstimate {
    double value = 0.0;
    std::vector<double> radii;
    std::vector<double> ratios;
    double residual = 0.0; // fit RMS plus propagated mass uncertainty
};

/// Default ladder r_k = r0 2^{-k}, k = 0..5, with
/// r0 = min(0.2 injectivity-scale, 0.1 diameter).
inline std::vector<double> density_radii(const ModelSpace& space, double diameter) {
    double inj = space.injectivity_radius();
    double r0 = std::isfinite(inj) ? std::min(0.2 * inj, 0.1 * diameter) : 0.1 * diameter;
    std::vector<double> out;
    for (int k = 0; k <= 5; ++k) out.push_back(r0 * std::pow(2.0, -k));
    return out;
}

inline constexpr BallQueryOptions kDensityBallOptions{1e-7, 16};

inline DensityEstimate density_estimate(const SampledVarifold& V, const Point& p,
                                        const std::vector<double>& radii) {
    if (radii.size() < 2) throw InputError("density_estimate: need at least two radii");
    for (size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] > radii[i + 1]) || !(radii[i + 1] > 0.0))
            throw InputError("density_estimate: radii must be positive and strictly decreasing");
    if (radii.front() >= V.space.injectivity_radius())
        throw DomainError("density_estimate: largest radius exceeds the injectivity radius");

    MassProfile prof(V, p);
    double eff = prof.local_resolution(radii.front(), kDensityBallOptions.max_depth);
    if (radii.back() < 3.0 * eff)
        throw ResolutionError("density_estimate: smallest radius below 3x the local resolution");

    const double am = comparison::alpha_ball(V.m);
    DensityEstimate est;
    est.radii = radii;
    double unc = 0.0;
    for (double r : radii) {
        RestrictedValue rv = prof.mass(r, kDensityBallOptions);
        double denom = am * std::pow(r, V.m);
        est.ratios.push_back(rv.closed_value / denom);
        unc = std::max(unc, rv.uncertainty / denom);
    }
    const int n = static_cast<int>(radii.size());
    const int cols = n >= 3 ? 3 : 2;
    Mat A(n, cols);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
        double r = radii[static_cast<size_t>(i)];
        A(i, 0) = 1.0;
        A(i, 1) = r;
        if (cols == 3) A(i, 2) = r * r;
        y[i] = est.ratios[static_cast<size_t>(i)];
    }
    Vec coef = A.colPivHouseholderQr().solve(y);
    est.value = coef[0];
    est.residual = std::sqrt((A * coef - y).squaredNorm() / n) + unc;
    return est;
}

} // namespace varifolds
