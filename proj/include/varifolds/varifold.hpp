#pragma once

#include "varifolds/errors.hpp"
#include "varifolds/immersion.hpp"
#include "varifolds/model_space.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace varifolds {

struct CellRef {
    int chart = -1; // -1: unknown provenance (e.g. file-loaded)
    int cu = 0;
    int cv = 0;
};

/// One weighted point-plane sample of the varifold, with its mean-curvature
/// vector and the parameter cell it came from (for refinement).
struct Atom {
    Point point;
    TangentPlane plane;
    double weight = 0.0;
    TangentVector H;
    CellRef cell;
    double density = 1.0;
};

/// Sample of the singular (boundary) part of the first variation: a point on
/// the boundary with outward unit conormal and arclength weight.
struct BoundaryAtom {
    Point point;
    TangentVector conormal;
    double weight = 0.0;
    CellRef cell; // cu: cell index along the edge, cv: edge index
};

struct ChartProvenance {
    std::shared_ptr<const ParametricImmersion> immersion;
    QuadratureSpec spec;
};

/// Finite weighted point-plane measure approximating a varifold, its weight
/// measure, and the singular part of its first variation.
struct SampledVarifold {
    ModelSpace space{3, 0.0};
    int m = 2;
    std::vector<Atom> atoms;
    std::vector<BoundaryAtom> boundary;
    std::vector<ChartProvenance> charts;
    std::vector<std::pair<Vec, int>> multiplicity_hints;
    int dropped_zero_weight = 0;

    double total_weight() const {
        // compensated summation: totals feed tight quadrature tolerances
        double s = 0.0, c = 0.0;
        for (const auto& a : atoms) {
            double y = a.weight - c;
            double t = s + y;
            c = (t - s) - y;
            s = t;
        }
        return s;
    }
    double boundary_weight() const {
        double s = 0.0, c = 0.0;
        for (const auto& a : boundary) {
            double y = a.weight - c;
            double t = s + y;
            c = (t - s) - y;
            s = t;
        }
        return s;
    }
};

namespace detail {

inline TangentPlane orthonormal_plane(const ModelSpace& S, const Point& p, const Jet2& J, int m) {
    Mat seeds(S.ambient_dim(), m);
    seeds.col(0) = J.fu;
    if (m == 2) seeds.col(1) = J.fv;
    return make_tangent_plane(S, p, seeds);
}

inline std::string node_name(int cu, int cv, double u, double v) {
    std::ostringstream os;
    os << "cell (" << cu << ", " << cv << ") at (u, v) = (" << u << ", " << v << ")";
    return os.str();
}

} // namespace detail

/// Outward boundary data at edge parameter t: point, unit conormal (tangent
/// to the surface, form-orthogonal to the edge) and the edge speed |f_t|.
struct BoundarySample {
    Point point;
    TangentVector conormal;
    double edge_speed;
};

inline BoundarySample boundary_sample(const ParametricImmersion& imm, const BoundaryEdge& edge,
                                      double t) {
    const ModelSpace& S = imm.space;
    double u, v;
    if (edge.axis == 0) {
        u = edge.at_min ? imm.domain.u0 : imm.domain.u1;
        v = t;
    } else {
        v = edge.at_min ? imm.domain.v0 : imm.domain.v1;
        u = t;
    }
    Jet2 J = imm.jet(u, v);
    Point p{J.f};
    const Vec& along = edge.axis == 0 ? J.fv : J.fu;
    const Vec& out = edge.axis == 0 ? J.fu : J.fv;
    double speed = std::sqrt(std::max(0.0, S.form(along, along)));
    if (speed <= 0.0) throw DegenerateImmersionError("boundary_sample: edge tangent vanishes");
    Vec nu = S.project_to_tangent(p, out);
    nu -= (S.form(nu, along) / (speed * speed)) * along;
    double nn = std::sqrt(std::max(0.0, S.form(nu, nu)));
    if (nn <= 0.0) throw DegenerateImmersionError("boundary_sample: conormal degenerates");
    nu /= nn;
    if (edge.at_min) nu = -nu; // at_min: outward means decreasing parameter
    return BoundarySample{p, TangentVector{p, nu}, speed};
}

/// Samples the immersion into varifold atoms on a composite tensor Gauss
/// rule: atom weight = quadrature weight x sqrt(det pullback metric).
/// Boundary edges produce conormal atoms with arclength weights.
inline SampledVarifold sample_varifold(std::shared_ptr<const ParametricImmersion> imm,
                                       const QuadratureSpec& spec, int chart_index = 0) {
    const ParametricImmersion& I = *imm;
    I.domain.validate(I.m);
    const ModelSpace& S = I.space;
    SampledVarifold V;
    V.space = S;
    V.m = I.m;
    V.charts.push_back(ChartProvenance{imm, spec});
    for (const auto& h : I.multiplicity_hints) V.multiplicity_hints.push_back(h);
    const GaussRule& G = gauss_rule(spec.cell_order);
    const int ncu = spec.cells_u;
    const int ncv = I.m == 2 ? spec.cells_v : 1;
    const double hu = I.domain.extent(0) / ncu;
    const double hv = I.m == 2 ? I.domain.extent(1) / ncv : 0.0;
    const double quadric_tol = 1e-10 * std::max(1.0, S.b == 0.0 ? 1.0 : 1.0 / std::abs(S.b));
    V.atoms.reserve(static_cast<size_t>(ncu * ncv) * G.x.size() * (I.m == 2 ? G.x.size() : 1));
    for (int cu = 0; cu < ncu; ++cu) {
        for (int cv = 0; cv < ncv; ++cv) {
            for (size_t gi = 0; gi < G.x.size(); ++gi) {
                double u = I.domain.u0 + (cu + 0.5 * (1.0 + G.x[gi])) * hu;
                for (size_t gj = 0; gj < (I.m == 2 ? G.x.size() : size_t{1}); ++gj) {
                    double v = I.m == 2 ? I.domain.v0 + (cv + 0.5 * (1.0 + G.x[gj])) * hv : 0.0;
                    Jet2 J = I.jet(u, v);
                    if (!J.f.allFinite() || !J.fu.allFinite() || !J.fv.allFinite())
                        throw DegenerateImmersionError("sample_varifold: non-finite value at " +
                                                       detail::node_name(cu, cv, u, v));
                    if (S.b != 0.0 && S.quadric_residual(J.f) > quadric_tol)
                        throw DomainError("sample_varifold: immersion leaves the quadric at " +
                                          detail::node_name(cu, cv, u, v));
                    Mat g = pullback_metric_from_jet(I, J);
                    Eigen::SelfAdjointEigenSolver<Mat> es(g);
                    if (es.eigenvalues().minCoeff() <= 1e-8)
                        throw DegenerateImmersionError("sample_varifold: rank-deficient metric at " +
                                                       detail::node_name(cu, cv, u, v));
                    double sqrtdet = std::sqrt(g.determinant());
                    double w = 0.5 * hu * G.w[gi] * sqrtdet;
                    if (I.m == 2) w *= 0.5 * hv * G.w[gj];
                    Point p{J.f};
                    Atom a;
                    a.point = p;
                    a.plane = detail::orthonormal_plane(S, p, J, I.m);
                    a.weight = w;
                    a.H = mean_curvature_from_jet(I, J);
                    a.cell = CellRef{chart_index, cu, cv};
                    if (!(a.weight > 0.0)) {
                        ++V.dropped_zero_weight;
                        continue;
                    }
                    V.atoms.push_back(std::move(a));
                }
            }
        }
    }
    for (size_t ei = 0; ei < I.domain.boundary_edges.size(); ++ei) {
        const BoundaryEdge& e = I.domain.boundary_edges[ei];
        int along_axis = e.axis == 0 ? 1 : 0;
        double t0 = I.domain.lo(along_axis), t1 = I.domain.hi(along_axis);
        double ht = (t1 - t0) / spec.boundary_cells;
        for (int c = 0; c < spec.boundary_cells; ++c) {
            for (size_t gi = 0; gi < G.x.size(); ++gi) {
                double t = t0 + (c + 0.5 * (1.0 + G.x[gi])) * ht;
                BoundarySample bs = boundary_sample(I, e, t);
                BoundaryAtom ba;
                ba.point = bs.point;
                ba.conormal = bs.conormal;
                ba.weight = 0.5 * ht * G.w[gi] * bs.edge_speed;
                ba.cell = CellRef{chart_index, c, static_cast<int>(ei)};
                if (!(ba.weight > 0.0)) {
                    ++V.dropped_zero_weight;
                    continue;
                }
                V.boundary.push_back(std::move(ba));
            }
        }
    }
    return V;
}

/// Concatenates varifolds over the same model space; densities add.
inline SampledVarifold union_varifolds(const std::vector<SampledVarifold>& parts) {
    if (parts.empty()) throw InputError("union_varifolds: empty union");
    SampledVarifold V;
    V.space = parts[0].space;
    V.m = parts[0].m;
    for (const auto& part : parts) {
        if (part.space.n != V.space.n || part.space.b != V.space.b || part.m != V.m)
            throw ContractError("union_varifolds: incompatible model spaces");
        int chart_offset = static_cast<int>(V.charts.size());
        for (const auto& c : part.charts) V.charts.push_back(c);
        for (Atom a : part.atoms) {
            if (a.cell.chart >= 0) a.cell.chart += chart_offset;
            V.atoms.push_back(std::move(a));
        }
        for (BoundaryAtom b : part.boundary) {
            if (b.cell.chart >= 0) b.cell.chart += chart_offset;
            V.boundary.push_back(std::move(b));
        }
        for (const auto& h : part.multiplicity_hints) V.multiplicity_hints.push_back(h);
        V.dropped_zero_weight += part.dropped_zero_weight;
    }
    return V;
}

// ---------------------------------------------------------------------------
// Integrals over the sampled measures
// ---------------------------------------------------------------------------

template <typename F>
double integrate_weight(const SampledVarifold& V, F&& phi) {
    double s = 0.0;
    for (size_t i = 0; i < V.atoms.size(); ++i) {
        double val = phi(V.atoms[i].point);
        if (!std::isfinite(val))
            throw InputError("integrate_weight: non-finite integrand at atom #" + std::to_string(i));
        s += V.atoms[i].weight * val;
    }
    return s;
}

template <typename F>
double integrate_varifold(const SampledVarifold& V, F&& k) {
    double s = 0.0;
    for (size_t i = 0; i < V.atoms.size(); ++i) {
        double val = k(V.atoms[i].point, V.atoms[i].plane);
        if (!std::isfinite(val))
            throw InputError("integrate_varifold: non-finite integrand at atom #" +
                             std::to_string(i));
        s += V.atoms[i].weight * val;
    }
    return s;
}

inline double area(const SampledVarifold& V) { return V.total_weight(); }

/// Willmore energy (1/4) integral of |H|^2 over the weight measure.
inline double willmore_energy(const SampledVarifold& V) {
    double s = 0.0;
    for (const auto& a : V.atoms) {
        double h2 = V.space.form(a.H.components, a.H.components);
        s += a.weight * h2;
    }
    return 0.25 * s;
}

inline double total_mean_curvature(const SampledVarifold& V) {
    double s = 0.0;
    for (const auto& a : V.atoms) s += a.weight * V.space.norm(a.H);
    return s;
}

/// Upper bound for the total variation of the first variation:
/// integral of |H| plus the total boundary weight. Exact whenever the mean
/// curvature term and the boundary term do not cancel.
inline double total_variation_bound(const SampledVarifold& V) {
    return total_mean_curvature(V) + V.boundary_weight();
}

struct VectorField {
    std::function<TangentVector(const Point&)> at;
};

/// First variation via the representation
/// dV(X) = -sum w g(X, H) + sum_boundary w g(X, nu).
inline double first_variation_analytic(const SampledVarifold& V, const VectorField& X) {
    double s = 0.0;
    for (const auto& a : V.atoms) {
        TangentVector x = X.at(a.point);
        s -= a.weight * V.space.form(x.components, a.H.components);
    }
    for (const auto& b : V.boundary) {
        TangentVector x = X.at(b.point);
        s += b.weight * V.space.form(x.components, b.conormal.components);
    }
    return s;
}

/// Area of the immersion under the same composite rule, first derivatives
/// only (no mean curvature needed).
inline double immersed_area(const ParametricImmersion& I, const QuadratureSpec& spec) {
    const GaussRule& G = gauss_rule(spec.cell_order);
    const int ncu = spec.cells_u;
    const int ncv = I.m == 2 ? spec.cells_v : 1;
    const double hu = I.domain.extent(0) / ncu;
    const double hv = I.m == 2 ? I.domain.extent(1) / ncv : 0.0;
    double total = 0.0;
    Vec fu, fv;
    for (int cu = 0; cu < ncu; ++cu) {
        for (int cv = 0; cv < ncv; ++cv) {
            for (size_t gi = 0; gi < G.x.size(); ++gi) {
                double u = I.domain.u0 + (cu + 0.5 * (1.0 + G.x[gi])) * hu;
                for (size_t gj = 0; gj < (I.m == 2 ? G.x.size() : size_t{1}); ++gj) {
                    double v = I.m == 2 ? I.domain.v0 + (cv + 0.5 * (1.0 + G.x[gj])) * hv : 0.0;
                    I.d1(u, v, fu, fv);
                    double det;
                    if (I.m == 2) {
                        double a0 = I.space.form(fu, fu), a1 = I.space.form(fu, fv),
                               a2 = I.space.form(fv, fv);
                        det = a0 * a2 - a1 * a1;
                    } else {
                        det = I.space.form(fu, fu);
                    }
                    if (!(det > 0.0))
                        throw DegenerateImmersionError("immersed_area: degenerate metric");
                    double w = 0.5 * hu * G.w[gi] * std::sqrt(det);
                    if (I.m == 2) w *= 0.5 * hv * G.w[gj];
                    total += w;
                }
            }
        }
    }
    return total;
}

/// d/dt Area(exp_f(t X(f))) at t = 0 by a central difference of width t.
inline double first_variation_numeric(const ParametricImmersion& I, const VectorField& X,
                                      double t, const QuadratureSpec& spec) {
    if (!(t > 0.0)) throw ContractError("first_variation_numeric: step must be positive");
    auto deformed = [&](double s) {
        ParametricImmersion D;
        D.space = I.space;
        D.m = I.m;
        D.domain = I.domain;
        D.fd_step_rel = I.fd_step_rel;
        const ParametricImmersion* base = &I;
        const ModelSpace space = I.space;
        auto field = X.at;
        D.eval = [base, space, field, s](double u, double v) {
            Point p{base->eval(u, v)};
            TangentVector x = field(p);
            return exp_map(space, p, TangentVector{p, s * x.components}).coords;
        };
        return D;
    };
    double ap = immersed_area(deformed(t), spec);
    double am = immersed_area(deformed(-t), spec);
    return (ap - am) / (2.0 * t);
}

// ---------------------------------------------------------------------------
// Extrinsic diameter with coarse-to-fine pruning over parameter cells
// ---------------------------------------------------------------------------

struct DiameterEstimate {
    double value = 0.0;    // lower estimate: max pairwise atom distance
    double mesh_gap = 0.0; // bound on how far the true supremum can exceed it
};

inline DiameterEstimate extrinsic_diameter(const SampledVarifold& V) {
    DiameterEstimate out;
    if (V.atoms.size() < 2) return out;
    struct Group {
        Vec rep;
        std::vector<int> members;
        double radius = 0.0;
        double diam = 0.0;
    };
    // group atoms by provenance cell; ungrouped atoms stand alone
    std::vector<Group> groups;
    {
        std::vector<std::pair<long long, int>> keys;
        keys.reserve(V.atoms.size());
        for (size_t i = 0; i < V.atoms.size(); ++i) {
            const CellRef& c = V.atoms[i].cell;
            long long key = c.chart < 0
                                ? -(static_cast<long long>(i) + 1)
                                : ((static_cast<long long>(c.chart) << 40) |
                                   (static_cast<long long>(c.cu) << 20) | static_cast<long long>(c.cv));
            keys.emplace_back(key, static_cast<int>(i));
        }
        std::sort(keys.begin(), keys.end());
        for (size_t i = 0; i < keys.size();) {
            size_t j = i;
            Group g;
            while (j < keys.size() && keys[j].first == keys[i].first) {
                g.members.push_back(keys[j].second);
                ++j;
            }
            g.rep = V.atoms[static_cast<size_t>(g.members[g.members.size() / 2])].point.coords;
            for (int idx : g.members) {
                double d = distance(V.space, Point{g.rep}, V.atoms[static_cast<size_t>(idx)].point);
                g.radius = std::max(g.radius, d);
            }
            // sampled nodes span ~0.775 of the cell per axis; inflate to cover it
            g.diam = 2.6 * g.radius;
            g.radius *= 1.3;
            groups.push_back(std::move(g));
            i = j;
        }
    }
    for (const auto& g : groups) out.mesh_gap = std::max(out.mesh_gap, g.diam);

    const size_t ng = groups.size();
    double best = 0.0;
    std::vector<std::pair<int, int>> survivors;
    for (size_t i = 0; i < ng; ++i) {
        for (size_t j = i; j < ng; ++j) {
            double d = distance(V.space, Point{groups[i].rep}, Point{groups[j].rep});
            best = std::max(best, d);
            if (d + groups[i].radius + groups[j].radius > best)
                survivors.emplace_back(static_cast<int>(i), static_cast<int>(j));
        }
    }
    for (const auto& [gi, gj] : survivors) {
        const Group& A = groups[static_cast<size_t>(gi)];
        const Group& B = groups[static_cast<size_t>(gj)];
        double dd = distance(V.space, Point{A.rep}, Point{B.rep});
        if (dd + A.radius + B.radius <= best) continue;
        for (int ia : A.members) {
            for (int ib : B.members) {
                double d = distance(V.space, V.atoms[static_cast<size_t>(ia)].point,
                                    V.atoms[static_cast<size_t>(ib)].point);
                best = std::max(best, d);
            }
        }
    }
    out.value = best;
    return out;
}

// ---------------------------------------------------------------------------
// Columnar serialization (bit-exact via 17 significant digits)
// ---------------------------------------------------------------------------

namespace detail {
inline void put(std::ostream& os, double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
}
inline void put_vec(std::ostream& os, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        os << ' ';
        put(os, v[i]);
    }
}
inline Vec get_vec(std::istream& is, int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i)
        if (!(is >> v[i])) throw InputError("varifold file: truncated vector");
    return v;
}
} // namespace detail

inline void write_varifold(const SampledVarifold& V, std::ostream& os) {
    os << "varifolds-sampled-v1\n";
    os << "space " << V.space.n << ' ';
    detail::put(os, V.space.b);
    os << "\nm " << V.m << '\n';
    os << "atoms " << V.atoms.size() << '\n';
    for (const auto& a : V.atoms) {
        std::ostringstream row;
        detail::put_vec(row, a.point.coords);
        for (int c = 0; c < V.m; ++c) detail::put_vec(row, a.plane.frame.col(c));
        row << ' ';
        detail::put(row, a.weight);
        detail::put_vec(row, a.H.components);
        os << row.str().substr(1) << '\n';
    }
    os << "boundary " << V.boundary.size() << '\n';
    for (const auto& b : V.boundary) {
        std::ostringstream row;
        detail::put_vec(row, b.point.coords);
        detail::put_vec(row, b.conormal.components);
        row << ' ';
        detail::put(row, b.weight);
        os << row.str().substr(1) << '\n';
    }
    os << "hints " << V.multiplicity_hints.size() << '\n';
    for (const auto& [pt, k] : V.multiplicity_hints) {
        std::ostringstream row;
        detail::put_vec(row, pt);
        os << row.str().substr(1) << ' ' << k << '\n';
    }
}

inline SampledVarifold read_varifold(std::istream& is) {
    std::string tag;
    if (!(is >> tag) || tag != "varifolds-sampled-v1")
        throw InputError("varifold file: bad header");
    int n = 0, m = 0;
    double b = 0.0;
    if (!(is >> tag >> n >> b) || tag != "space") throw InputError("varifold file: bad space line");
    if (!(is >> tag >> m) || tag != "m") throw InputError("varifold file: bad m line");
    SampledVarifold V{ModelSpace(n, b)};
    V.m = m;
    const int d = V.space.ambient_dim();
    size_t count = 0;
    if (!(is >> tag >> count) || tag != "atoms") throw InputError("varifold file: bad atoms line");
    V.atoms.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        Atom a;
        a.point = Point{detail::get_vec(is, d)};
        Mat frame(d, m);
        for (int c = 0; c < m; ++c) frame.col(c) = detail::get_vec(is, d);
        a.plane = TangentPlane{a.point, frame};
        if (!(is >> a.weight)) throw InputError("varifold file: truncated atom row");
        a.H = TangentVector{a.point, detail::get_vec(is, d)};
        V.atoms.push_back(std::move(a));
    }
    if (!(is >> tag >> count) || tag != "boundary")
        throw InputError("varifold file: bad boundary line");
    for (size_t i = 0; i < count; ++i) {
        BoundaryAtom ba;
        ba.point = Point{detail::get_vec(is, d)};
        ba.conormal = TangentVector{ba.point, detail::get_vec(is, d)};
        if (!(is >> ba.weight)) throw InputError("varifold file: truncated boundary row");
        V.boundary.push_back(std::move(ba));
    }
    if (!(is >> tag >> count) || tag != "hints") throw InputError("varifold file: bad hints line");
    for (size_t i = 0; i < count; ++i) {
        Vec pt = detail::get_vec(is, d);
        int k = 0;
        if (!(is >> k)) throw InputError("varifold file: truncated hint row");
        V.multiplicity_hints.emplace_back(std::move(pt), k);
    }
    return V;
}

/// Applies an ambient isometry to every sample; provenance charts are
/// wrapped so refinement stays consistent with the transformed data.
inline SampledVarifold apply_isometry(const SampledVarifold& V, const Isometry& iso) {
    SampledVarifold W = V;
    for (auto& a : W.atoms) {
        a.point.coords = iso.apply(a.point.coords);
        a.plane.base = a.point;
        a.plane.frame = iso.linear * a.plane.frame;
        a.H.base = a.point;
        a.H.components = iso.apply_vector(a.H.components);
    }
    for (auto& b : W.boundary) {
        b.point.coords = iso.apply(b.point.coords);
        b.conormal.base = b.point;
        b.conormal.components = iso.apply_vector(b.conormal.components);
    }
    for (auto& [pt, k] : W.multiplicity_hints) pt = iso.apply(pt);
    for (auto& chart : W.charts) {
        auto base = chart.immersion;
        auto moved = std::make_shared<ParametricImmersion>(*base);
        moved->eval = [base, iso](double u, double v) { return iso.apply(base->eval(u, v)); };
        if (base->analytic_jet) {
            moved->analytic_jet = [base, iso](double u, double v) {
                Jet2 J = base->analytic_jet(u, v);
                J.f = iso.apply(J.f);
                J.fu = iso.apply_vector(J.fu);
                J.fv = iso.apply_vector(J.fv);
                J.fuu = iso.apply_vector(J.fuu);
                J.fuv = iso.apply_vector(J.fuv);
                J.fvv = iso.apply_vector(J.fvv);
                return J;
            };
        }
        for (auto& [pt, k] : moved->multiplicity_hints) pt = iso.apply(pt);
        chart.immersion = moved;
    }
    return W;
}

} // namespace varifolds
