#pragma once

// Test-only oracles, independent of the library implementation paths they
// cross-check: RK4 geodesic integration, finite-difference derivatives of the
// distance function, and simple random samplers.

#include "varifolds/model_space.hpp"

#include <cmath>
#include <random>

namespace oracles {

using varifolds::ModelSpace;
using varifolds::Point;
using varifolds::TangentVector;
using varifolds::Vec;

/// Integrates the geodesic equation x'' = -b g(x', x') x of the quadric
/// embedding with RK4 steps and returns the endpoint after unit time.
inline Vec rk4_geodesic(const ModelSpace& S, const Vec& x0, const Vec& v0, int steps = 2000) {
    Vec x = x0, v = v0;
    double h = 1.0 / steps;
    auto acc = [&](const Vec& xx, const Vec& vv) { return (-S.b * S.form(vv, vv) * xx).eval(); };
    for (int i = 0; i < steps; ++i) {
        Vec k1x = v, k1v = acc(x, v);
        Vec k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x, k2x);
        Vec k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x, k3x);
        Vec k4x = v + h * k3v, k4v = acc(x + h * k3x, k4x);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return x;
}

/// Random point of the model space: Gaussian coordinates normalised onto the
/// quadric (upper sheet for b < 0), plain Gaussian for b = 0.
inline Point random_point(const ModelSpace& S, std::mt19937_64& rng, double spread = 1.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec x(S.ambient_dim());
    for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
    if (S.b == 0.0) return Point{(spread * x).eval()};
    if (S.b > 0.0) {
        x /= x.norm() * std::sqrt(S.b);
        return S.point(x);
    }
    // b < 0: pick a random tangent direction at the apex and shoot
    double R = 1.0 / std::sqrt(-S.b);
    Vec apex = Vec::Zero(S.ambient_dim());
    apex[0] = R;
    Vec dir = Vec::Zero(S.ambient_dim());
    for (int i = 1; i < dir.size(); ++i) dir[i] = g(rng);
    dir /= dir.norm();
    std::uniform_real_distribution<double> u(0.0, spread);
    return varifolds::exp_map(S, S.point(apex), TangentVector{S.point(apex), (u(rng) * dir).eval()});
}

/// Random unit tangent vector at p.
inline TangentVector random_unit_tangent(const ModelSpace& S, const Point& p,
                                         std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        Vec w(S.ambient_dim());
        for (int i = 0; i < w.size(); ++i) w[i] = g(rng);
        Vec t = S.project_to_tangent(p, w);
        double n2 = S.form(t, t);
        if (n2 > 1e-12) return TangentVector{p, (t / std::sqrt(n2)).eval()};
    }
}

} // namespace oracles
