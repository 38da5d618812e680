#pragma once

#include "varifolds/errors.hpp"
#include "varifolds/model_space.hpp"

#include <cmath>

namespace varifolds::comparison {

enum class Regime { SeriesNearZero, ClosedForm };

struct ComparisonValue {
    double value;
    Regime regime;
};

// Below this value of x = sqrt(b) r the closed forms of (1 - x cot x)/x^k
// lose digits to cancellation and the truncated series (through the x^6
// numerator term) is used instead. At 3e-2 both branches stay within 5e-13
// of the true value, so the crossover is continuous well below 1e-12.
inline constexpr double kSeriesSwitch = 3e-2;

namespace detail {

// 1 - x cot x = x^2/3 + x^4/45 + 2 x^6/945 + x^8/4725 + 2 x^10/93555 + ...
inline double one_minus_xcotx_series(double x) {
    double x2 = x * x;
    return x2 * (1.0 / 3.0 + x2 * (1.0 / 45.0 + x2 * (2.0 / 945.0)));
}

inline void check_positive_curvature(double b, const char* who) {
    if (!(b > 0.0)) throw DomainError(std::string(who) + ": requires b > 0");
}

inline double scaled_arg(double b, double r, const char* who) {
    if (r < 0.0) throw DomainError(std::string(who) + ": requires r >= 0");
    double x = std::sqrt(b) * r;
    if (x >= kPi) throw DomainError(std::string(who) + ": sqrt(b) r must lie below pi");
    return x;
}

} // namespace detail

/// a_b(r) = sqrt(b) r cot(sqrt(b) r), continuously extended by a_b(0) = 1.
inline ComparisonValue a_b_info(double b, double r) {
    detail::check_positive_curvature(b, "a_b");
    double x = detail::scaled_arg(b, r, "a_b");
    if (x < kSeriesSwitch)
        return {1.0 - detail::one_minus_xcotx_series(x), Regime::SeriesNearZero};
    return {x / std::tan(x), Regime::ClosedForm};
}

inline double a_b(double b, double r) { return a_b_info(b, r).value; }

/// (1 - a_b(r)) / r^2; limit b/3 at r = 0.
inline ComparisonValue c_quad_info(double b, double r) {
    detail::check_positive_curvature(b, "c_quad");
    double x = detail::scaled_arg(b, r, "c_quad");
    if (x < kSeriesSwitch) {
        double x2 = x * x;
        // (1 - x cot x)/x^2 scaled by b
        return {b * (1.0 / 3.0 + x2 * (1.0 / 45.0 + x2 * (2.0 / 945.0))),
                Regime::SeriesNearZero};
    }
    return {(1.0 - x / std::tan(x)) / (r * r), Regime::ClosedForm};
}

inline double c_quad(double b, double r) { return c_quad_info(b, r).value; }

/// (1 - a_b(r)) / r; limit 0 at r = 0.
inline ComparisonValue c_lin_info(double b, double r) {
    detail::check_positive_curvature(b, "c_lin");
    double x = detail::scaled_arg(b, r, "c_lin");
    if (x < kSeriesSwitch) {
        double x2 = x * x;
        return {std::sqrt(b) * x * (1.0 / 3.0 + x2 * (1.0 / 45.0 + x2 * (2.0 / 945.0))),
                Regime::SeriesNearZero};
    }
    return {(1.0 - x / std::tan(x)) / r, Regime::ClosedForm};
}

inline double c_lin(double b, double r) { return c_lin_info(b, r).value; }

namespace detail {
inline void check_negative_curvature(double b, const char* who) {
    if (!(b < 0.0)) throw DomainError(std::string(who) + ": requires b < 0");
}
} // namespace detail

/// s_b(t) = sinh(sqrt(|b|) t)/sqrt(|b|) for b < 0.
inline double s_b(double b, double t) {
    detail::check_negative_curvature(b, "s_b");
    if (t < 0.0) throw DomainError("s_b: requires t >= 0");
    double sb = std::sqrt(-b);
    return std::sinh(sb * t) / sb;
}

/// c_b(t) = s_b'(t) = cosh(sqrt(|b|) t).
inline double c_b(double b, double t) {
    detail::check_negative_curvature(b, "c_b");
    if (t < 0.0) throw DomainError("c_b: requires t >= 0");
    return std::cosh(std::sqrt(-b) * t);
}

/// phi(t) = |b| / (c_b(t) - 1). Diverges like 2/t^2 at zero; callers needing
/// the t -> 0 behaviour must use the limit forms instead of evaluating here.
inline double phi(double b, double t) {
    detail::check_negative_curvature(b, "phi");
    if (t <= 0.0) throw DomainError("phi: requires t > 0");
    if (t < 1e-8) throw DomainError("phi: t below 1e-8; use the limit forms");
    double y = std::sqrt(-b) * t;
    double sh = std::sinh(0.5 * y);
    return (-b) / (2.0 * sh * sh); // cosh y - 1 = 2 sinh^2(y/2), no cancellation
}

/// Analytic derivative phi'(t) = -|b|^{3/2} sinh(sqrt(|b|) t)/(c_b - 1)^2.
inline double phi_prime(double b, double t) {
    detail::check_negative_curvature(b, "phi_prime");
    if (t <= 0.0) throw DomainError("phi_prime: requires t > 0");
    if (t < 1e-8) throw DomainError("phi_prime: t below 1e-8; use the limit forms");
    double ab = -b;
    double y = std::sqrt(ab) * t;
    double sh = std::sinh(0.5 * y);
    double den = 2.0 * sh * sh;
    return -ab * std::sqrt(ab) * std::sinh(y) / (den * den);
}

/// t_b(r) = 2/r for b >= 0 and 2 sqrt(|b|) coth(sqrt(|b|) r / 2) for b < 0.
inline double t_b(double b, double r) {
    if (r <= 0.0) throw DomainError("t_b: requires r > 0");
    if (b >= 0.0) return 2.0 / r;
    double sb = std::sqrt(-b);
    return 2.0 * sb / std::tanh(0.5 * sb * r);
}

/// Volume alpha(m) of the unit ball in R^m.
inline double alpha_ball(int m) {
    if (m < 1) throw ContractError("alpha_ball: m must be >= 1");
    return std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

/// Sobolev constant C(m) = 5^m 2^{1/m} / alpha(m)^{1/m}.
inline double sobolev_constant(int m) {
    if (m < 1) throw ContractError("sobolev_constant: m must be >= 1");
    return std::pow(5.0, m) * std::pow(2.0 / alpha_ball(m), 1.0 / m);
}

/// Area bound C(i, b) = min{rho0^2/(2 + b rho0^2), pi^3/(9 b)} with
/// rho0 = min{i, pi/(2 sqrt(b))}; 1/0 is read as infinity, 0*inf as 0.
inline double area_bound_C(double i, double b) {
    if (!(i > 0.0)) throw DomainError("area_bound_C: requires i > 0");
    if (b < 0.0) throw DomainError("area_bound_C: requires b >= 0");
    double rho0 = b > 0.0 ? std::min(i, 0.5 * kPi / std::sqrt(b)) : i;
    double first = std::isinf(rho0) ? kInf : rho0 * rho0 / (2.0 + b * rho0 * rho0);
    double second = b == 0.0 ? kInf : kPi * kPi * kPi / (9.0 * b);
    return std::min(first, second);
}

/// Lower bound (1 + sqrt(1 - 4 b)) / (2 r) for the radial Hessian under
/// asymptotic curvature decay K_r <= b / r^2 with 0 < b <= 1/4.
inline double radial_hessian_lower_bound(double b, double r) {
    if (!(b > 0.0 && b <= 0.25)) throw DomainError("radial_hessian_lower_bound: b must lie in (0, 1/4]");
    if (!(r > 0.0)) throw DomainError("radial_hessian_lower_bound: requires r > 0");
    return (1.0 + std::sqrt(1.0 - 4.0 * b)) / (2.0 * r);
}

} // namespace varifolds::comparison
