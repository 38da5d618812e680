#pragma once

#include "varifolds/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace varifolds {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerance for clamping acos/acosh arguments back into their domain.
// Larger violations are treated as genuine domain errors.
inline constexpr double kClampTol = 1e-12;

struct Point {
    Vec coords;
};

struct TangentVector {
    Point base;
    Vec components;
};

/// m orthonormal tangent vectors at a common base point, stored column-wise.
struct TangentPlane {
    Point base;
    Mat frame; // ambient_dim x m
    int m() const { return static_cast<int>(frame.cols()); }
};

/// One of the three constant-curvature model spaces: R^n (b = 0), the sphere
/// S^n(b) of radius 1/sqrt(b) as a quadric in R^{n+1} (b > 0), or the upper
/// hyperboloid sheet in Minkowski space R^{1,n} (b < 0).
struct ModelSpace {
    int n = 3;      // intrinsic dimension
    double b = 0.0; // sectional curvature

    ModelSpace(int dim, double curvature) : n(dim), b(curvature) {
        if (n < 2) throw ContractError("ModelSpace: dimension must be >= 2");
        if (!std::isfinite(b)) throw ContractError("ModelSpace: curvature must be finite");
    }

    int ambient_dim() const { return b == 0.0 ? n : n + 1; }
    bool lorentzian() const { return b < 0.0; }

    double injectivity_radius() const { return b > 0.0 ? kPi / std::sqrt(b) : kInf; }

    /// Ambient bilinear form: Euclidean for b >= 0, Lorentzian (-,+,...,+)
    /// with the time coordinate first for b < 0.
    double form(const Vec& x, const Vec& y) const {
        double s = x.dot(y);
        if (lorentzian()) s -= 2.0 * x[0] * y[0];
        return s;
    }

    /// Residual of the defining quadric equation <x,x> = 1/b (0 for b = 0).
    double quadric_residual(const Vec& x) const {
        if (b == 0.0) return 0.0;
        return std::abs(form(x, x) - 1.0 / b);
    }

    /// Conditioning scale for quadric-residual comparisons.
    double quadric_scale(const Vec& x) const {
        return std::max({1.0, b == 0.0 ? 1.0 : 1.0 / std::abs(b), x.squaredNorm()});
    }

    Point point(Vec coords) const {
        if (coords.size() != ambient_dim())
            throw ContractError("point: coordinate size does not match ambient dimension");
        if (!coords.allFinite()) throw ContractError("point: non-finite coordinates");
        if (b != 0.0 && quadric_residual(coords) > 1e-12 * quadric_scale(coords))
            throw DomainError("point: coordinates do not satisfy the quadric equation");
        if (b < 0.0 && coords[0] <= 0.0)
            throw DomainError("point: hyperboloid points must lie on the upper sheet (x0 > 0)");
        return Point{std::move(coords)};
    }

    /// Projects an ambient vector onto the tangent space at p (form-orthogonal
    /// to the quadric normal). Identity map for b = 0.
    Vec project_to_tangent(const Point& p, const Vec& w) const {
        if (b == 0.0) return w;
        return w - b * form(w, p.coords) * p.coords;
    }

    TangentVector tangent(const Point& p, Vec components) const {
        if (components.size() != ambient_dim())
            throw ContractError("tangent: component size does not match ambient dimension");
        if (b != 0.0) {
            double t = std::abs(form(components, p.coords));
            double scale = std::max(1.0, components.norm() * p.coords.norm());
            if (t > 1e-9 * scale)
                throw ContractError("tangent: vector is not form-orthogonal to the base point");
        }
        return TangentVector{p, std::move(components)};
    }

    double metric(const TangentVector& v, const TangentVector& w) const {
        return form(v.components, w.components);
    }

    double norm(const TangentVector& v) const {
        double s = form(v.components, v.components);
        return s <= 0.0 ? 0.0 : std::sqrt(s);
    }
};

namespace detail {

inline double clamped_acos(double x) {
    if (x > 1.0) {
        if (x > 1.0 + kClampTol) throw DomainError("acos argument exceeds domain beyond tolerance");
        x = 1.0;
    } else if (x < -1.0) {
        if (x < -1.0 - kClampTol) throw DomainError("acos argument exceeds domain beyond tolerance");
        x = -1.0;
    }
    return std::acos(x);
}

inline double clamped_acosh(double x) {
    if (x < 1.0) {
        if (x < 1.0 - kClampTol) throw DomainError("acosh argument below domain beyond tolerance");
        x = 1.0;
    }
    return std::acosh(x);
}

inline void check_same_base(const ModelSpace& space, const Point& p, const Point& q,
                            const char* what) {
    double scale = std::max(1.0, p.coords.norm());
    if ((p.coords - q.coords).norm() > 1e-9 * scale) throw ContractError(what);
    (void)space;
}

} // namespace detail

/// Geodesic distance between two points of the model space.
inline double distance(const ModelSpace& space, const Point& p, const Point& q) {
    if (space.b != 0.0) {
        if (space.quadric_residual(p.coords) > 1e-12 * space.quadric_scale(p.coords) ||
            space.quadric_residual(q.coords) > 1e-12 * space.quadric_scale(q.coords))
            throw DomainError("distance: point does not lie on the model-space quadric");
    }
    if (space.b == 0.0) return (p.coords - q.coords).norm();
    double sb = std::sqrt(std::abs(space.b));
    double arg = space.b * space.form(p.coords, q.coords);
    if (space.b > 0.0) return detail::clamped_acos(arg) / sb;
    return detail::clamped_acosh(arg) / sb;
}

/// Geodesic starting at p with initial velocity v, evaluated at time 1.
inline Point exp_map(const ModelSpace& space, const Point& p, const TangentVector& v) {
    detail::check_same_base(space, p, v.base, "exp: tangent vector based at a different point");
    if (space.b == 0.0) return Point{p.coords + v.components};
    double len = space.norm(v);
    if (len == 0.0) return p;
    Vec u = v.components / len;
    double sb = std::sqrt(std::abs(space.b));
    if (space.b > 0.0)
        return Point{std::cos(sb * len) * p.coords + std::sin(sb * len) / sb * u};
    return Point{std::cosh(sb * len) * p.coords + std::sinh(sb * len) / sb * u};
}

/// Inverse of exp_map inside the injectivity radius.
inline TangentVector log_map(const ModelSpace& space, const Point& p, const Point& q) {
    if (space.b == 0.0) return TangentVector{p, q.coords - p.coords};
    double d = distance(space, p, q);
    if (space.b > 0.0) {
        double c = space.b * space.form(p.coords, q.coords);
        if (c <= -1.0 + kClampTol)
            throw SingularityError("log: points are antipodal (cut locus)");
    }
    Vec w = q.coords - space.b * space.form(p.coords, q.coords) * p.coords;
    double wn = std::sqrt(std::max(0.0, space.form(w, w)));
    if (wn == 0.0 || d == 0.0) return TangentVector{p, Vec::Zero(space.ambient_dim())};
    return TangentVector{p, (d / wn) * w};
}

/// Gradient at q of the distance function r = d(p, .), as a unit tangent
/// vector at q pointing away from p.
inline TangentVector grad_dist(const ModelSpace& space, const Point& p, const Point& q) {
    double d = distance(space, p, q);
    if (d == 0.0) throw SingularityError("grad_dist: q coincides with the base point p");
    TangentVector back = log_map(space, q, p);
    return TangentVector{q, -back.components / d};
}

/// exp_p applied to the radial direction towards u scaled to length t.
inline Point geodesic_point(const ModelSpace& space, const Point& p, const Vec& unit_dir,
                            double t) {
    return exp_map(space, p, TangentVector{p, unit_dir * t});
}

/// Radial Hessian factor ct_b(r): sqrt(b) cot(sqrt(b) r) for b > 0, 1/r for
/// b = 0, sqrt(|b|) coth(sqrt(|b|) r) for b < 0.
inline double radial_hessian_factor(const ModelSpace& space, double r) {
    if (r <= 0.0) throw DomainError("radial_hessian_factor: r must be positive");
    if (space.b == 0.0) return 1.0 / r;
    double sb = std::sqrt(std::abs(space.b));
    if (space.b > 0.0) {
        if (sb * r >= kPi) throw DomainError("radial_hessian_factor: r beyond injectivity radius");
        return sb / std::tan(sb * r);
    }
    return sb / std::tanh(sb * r);
}

/// Div_T(r grad r) at q for r = d(p, .), evaluated in closed form:
/// |grad^T r|^2 + r ct_b(r) (m - |grad^T r|^2).
inline double div_T_r_grad_r(const ModelSpace& space, const Point& p, const Point& q,
                             const TangentPlane& T) {
    detail::check_same_base(space, q, T.base, "div_T_r_grad_r: plane based away from q");
    const int m = T.m();
    Mat gram = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) gram(i, j) = space.form(T.frame.col(i), T.frame.col(j));
    if ((gram - Mat::Identity(m, m)).cwiseAbs().maxCoeff() > 1e-8)
        throw ContractError("div_T_r_grad_r: frame is not orthonormal");
    double r = distance(space, p, q);
    if (r == 0.0) throw SingularityError("div_T_r_grad_r: q coincides with p");
    TangentVector gr = grad_dist(space, p, q);
    double tangential_sq = 0.0;
    for (int i = 0; i < m; ++i) {
        double c = space.form(gr.components, T.frame.col(i));
        tangential_sq += c * c;
    }
    return tangential_sq + r * radial_hessian_factor(space, r) * (m - tangential_sq);
}

/// Orthonormalises ambient direction seeds into a tangent plane at p.
inline TangentPlane make_tangent_plane(const ModelSpace& space, const Point& p,
                                       const Mat& seeds) {
    const int m = static_cast<int>(seeds.cols());
    Mat frame(space.ambient_dim(), m);
    int got = 0;
    for (int i = 0; i < m; ++i) {
        Vec v = space.project_to_tangent(p, seeds.col(i));
        for (int j = 0; j < got; ++j) v -= space.form(v, frame.col(j)) * frame.col(j);
        double nv = std::sqrt(std::max(0.0, space.form(v, v)));
        if (nv < 1e-12) throw ContractError("make_tangent_plane: seed directions are degenerate");
        frame.col(got++) = v / nv;
    }
    return TangentPlane{p, frame};
}

/// An ambient isometry x -> A x + t of the model space. For b != 0 the
/// translation part is zero and A preserves the quadric form.
struct Isometry {
    Mat linear;
    Vec translation;

    Vec apply(const Vec& x) const { return linear * x + translation; }
    Vec apply_vector(const Vec& v) const { return linear * v; }
    Point apply(const Point& p) const { return Point{apply(p.coords)}; }
};

/// Draws a random isometry (uniform rotation, Lorentz boost+rotation, or
/// rigid motion) from the identity component of the isometry group.
inline Isometry random_isometry(const ModelSpace& space, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int d = space.ambient_dim();
    if (!space.lorentzian()) {
        Mat A(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) A(i, j) = gauss(rng);
        Eigen::HouseholderQR<Mat> qr(A);
        Mat Q = qr.householderQ();
        Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < d; ++i)
            if (R(i, i) < 0) Q.col(i) = -Q.col(i);
        Vec t = Vec::Zero(d);
        if (space.b == 0.0)
            for (int i = 0; i < d; ++i) t[i] = gauss(rng);
        return Isometry{Q, t};
    }
    // Lorentz case: exponentiate a random element of the Lorentz algebra,
    // A = G B with B antisymmetric, G = diag(-1, 1, ..., 1).
    Mat B0(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) B0(i, j) = gauss(rng);
    Mat B = 0.5 * (B0 - B0.transpose());
    Mat A = B;
    A.row(0) = -B.row(0);
    // scale down so the series converges quickly and boosts stay moderate
    A *= 0.5;
    Mat L = Mat::Identity(d, d);
    Mat term = Mat::Identity(d, d);
    for (int k = 1; k <= 40; ++k) {
        term = term * A / static_cast<double>(k);
        L += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    return Isometry{L, Vec::Zero(d)};
}

} // namespace varifolds
