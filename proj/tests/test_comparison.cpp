#include "varifolds/comparison.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace varifolds;
using namespace varifolds::comparison;

namespace {

// extended-precision reference implementations (straight formulas)
long double a_ref(long double x) { return x == 0.0L ? 1.0L : x * std::cos(x) / std::sin(x); }
long double c_quad_ref(long double x) { return (1.0L - a_ref(x)) / (x * x); }
long double c_lin_ref(long double x) { return (1.0L - a_ref(x)) / x; }

} // namespace

TEST_CASE("a_b: endpoints, pi/3 value, positivity, monotone decrease") {
    CHECK(a_b(1.0, 0.0) == 1.0);
    CHECK(a_b(1.0, kPi / 3) == Catch::Approx(kPi / (3 * std::sqrt(3.0))).epsilon(1e-12));
    CHECK(a_b(4.0, kPi / 6) == Catch::Approx(kPi / (3 * std::sqrt(3.0))).epsilon(1e-12));

    double prev = 2.0;
    for (int i = 0; i <= 10000; ++i) {
        double x = i * (kPi - 1e-9) / 10000.0;
        double v = a_b(1.0, x);
        if (x < kPi / 2) CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-15);
        if (x <= kPi / 3) CHECK(v >= 0.5 - 1e-12);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(a_b(1.0, kPi), DomainError);
    CHECK_THROWS_AS(a_b(1.0, -0.1), DomainError);
    CHECK_THROWS_AS(a_b(0.0, 0.5), DomainError);
}

TEST_CASE("a_b series consistency near zero") {
    // a_b(r) = 1 - b r^2/3 - (b r^2)^2/45 + O((b r^2)^3)
    for (double b : {1.0, 0.3, 4.0}) {
        for (double r : {1e-4, 1e-3, 1e-2}) {
            double br2 = b * r * r;
            double model = 1.0 - br2 / 3.0 - br2 * br2 / 45.0;
            CHECK(std::abs(a_b(b, r) - model) < 1e-2 * br2 * br2 * br2 + 1e-15);
        }
    }
}

TEST_CASE("c_quad: limit b/3, endpoint 4/pi^2, monotone on a dense grid") {
    for (double b : {1.0, 0.25, 7.5}) {
        CHECK(c_quad(b, 0.0) == Catch::Approx(b / 3.0).epsilon(1e-14));
        double r_half = kPi / (2 * std::sqrt(b));
        CHECK(c_quad(b, r_half) == Catch::Approx(b * 4.0 / (kPi * kPi)).epsilon(1e-12));
    }
    double prev = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        double x = i * 3.1 / 10000.0;
        double v = c_quad(1.0, x);
        CHECK(v > prev);
        if (x <= kPi / 2) {
            CHECK(v >= 1.0 / 3.0 - 1e-14);
            CHECK(v <= 4.0 / (kPi * kPi) + 1e-14);
        }
        prev = v;
    }
}

TEST_CASE("c_lin: limit 0, endpoint 2/pi, algebraic identity with a_b") {
    CHECK(c_lin(1.0, 0.0) == 0.0);
    for (double b : {1.0, 0.09, 16.0}) {
        double r_half = kPi / (2 * std::sqrt(b));
        CHECK(c_lin(b, r_half) == Catch::Approx(std::sqrt(b) * 2.0 / kPi).epsilon(1e-12));
    }
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1e-6, 3.1);
    for (int i = 0; i < 1000; ++i) {
        double r = u(rng);
        CHECK(std::abs(c_lin(1.0, r) * r - (1.0 - a_b(1.0, r))) < 1e-14);
    }
    double prev = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        double x = i * 3.1 / 10000.0;
        double v = c_lin(1.0, x);
        CHECK(v > prev - 1e-18);
        prev = v;
    }
}

TEST_CASE("series/closed-form crossover is continuous to 1e-12") {
    for (double b : {1.0, 0.5, 3.0}) {
        double r_switch = kSeriesSwitch / std::sqrt(b);
        for (double f : {0.999999, 1.000001}) {
            double r = f * r_switch;
            CHECK(std::abs(a_b(b, r) - static_cast<double>(a_ref(std::sqrt(b) * r))) < 1e-12);
            CHECK(std::abs(c_quad(b, r) - static_cast<double>(b * c_quad_ref(std::sqrt(b) * r))) <
                  1e-12 * b);
            CHECK(std::abs(c_lin(b, r) -
                           static_cast<double>(std::sqrt(b) * c_lin_ref(std::sqrt(b) * r))) <
                  1e-12 * std::sqrt(b));
        }
        CHECK(a_b_info(b, 0.5 * r_switch).regime == Regime::SeriesNearZero);
        CHECK(a_b_info(b, 2.0 * r_switch).regime == Regime::ClosedForm);
    }
}

TEST_CASE("comparison functions agree with the extended-precision oracle") {
    std::mt19937_64 rng(222);
    std::uniform_real_distribution<double> u(0.08, 3.0);
    for (int i = 0; i < 2000; ++i) {
        double x = u(rng);
        CHECK(std::abs(a_b(1.0, x) - static_cast<double>(a_ref(x))) < 1e-13);
        CHECK(std::abs(c_quad(1.0, x) - static_cast<double>(c_quad_ref(x))) < 1e-13);
        CHECK(std::abs(c_lin(1.0, x) - static_cast<double>(c_lin_ref(x))) < 1e-13);
    }
}

TEST_CASE("s_b, c_b, phi: base values, unit-curvature case, phi identity") {
    CHECK(c_b(-1.0, 0.0) == 1.0);
    std::mt19937_64 rng(333);
    // the identity is exact but its evaluation cancels like phi*eps, so keep
    // t away from the phi blow-up at zero
    std::uniform_real_distribution<double> u(0.05, 5.0);
    for (int i = 0; i < 500; ++i) {
        double t = u(rng);
        CHECK(s_b(-1.0, t) == Catch::Approx(std::sinh(t)).epsilon(1e-14));
        for (double b : {-1.0, -0.3, -4.0}) {
            double lhs = 2.0 * phi(b, t) * c_b(b, t) + phi_prime(b, t) * s_b(b, t);
            CHECK(std::abs(lhs - (-b)) < 1e-12 * std::abs(b) + 1e-12);
        }
    }
    // sigma^2 |b| / (c_b - 1) -> 2 as sigma -> 0
    for (double b : {-1.0, -2.5}) {
        double prev_gap = 1e9;
        for (double s : {1e-2, 1e-3, 1e-4}) {
            double val = s * s * (-b) / (c_b(b, s) - 1.0);
            double gap = std::abs(val - 2.0);
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
        CHECK(prev_gap < 1e-7);
    }
    // finite-difference phi' agrees with the analytic derivative
    for (double t : {0.3, 1.0, 2.7}) {
        double h = 1e-6;
        double fd = (phi(-1.0, t + h) - phi(-1.0, t - h)) / (2 * h);
        CHECK(fd == Catch::Approx(phi_prime(-1.0, t)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(phi(-1.0, 0.0), DomainError);
    CHECK_THROWS_AS(phi(-1.0, 1e-9), DomainError);
    CHECK_THROWS_AS(s_b(1.0, 1.0), DomainError);
}

TEST_CASE("t_b: flat value, asymptote, b->0- limit, lower bound 2/r") {
    CHECK(t_b(0.0, 2.0) == Catch::Approx(1.0));
    CHECK(t_b(-1.0, 1e6) == Catch::Approx(2.0).epsilon(1e-6));
    // the negative-curvature branch tends to 4/r as b -> 0- (coth(y) ~ 1/y),
    // twice the flat-branch value 2/r
    double r = 1.0;
    double prev_gap = 1e9;
    for (double b : {-1e-2, -1e-4, -1e-6}) {
        double gap = std::abs(t_b(b, r) - 4.0 / r);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-6);
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(1e-3, 10.0);
    for (int i = 0; i < 200; ++i) {
        double rr = u(rng);
        for (double b : {0.0, 2.0, -0.5, -3.0}) CHECK(t_b(b, rr) >= 2.0 / rr - 1e-12);
    }
    CHECK_THROWS_AS(t_b(-1.0, 0.0), DomainError);
}

TEST_CASE("sobolev_constant: m = 1, 2 and monotonicity") {
    CHECK(sobolev_constant(1) == Catch::Approx(5.0).epsilon(1e-14));
    CHECK(sobolev_constant(2) == Catch::Approx(25.0 * std::sqrt(2.0) / std::sqrt(kPi)).epsilon(1e-14));
    CHECK(alpha_ball(2) == Catch::Approx(kPi).epsilon(1e-15));
    CHECK(alpha_ball(3) == Catch::Approx(4.0 * kPi / 3.0).epsilon(1e-14));
    double prev = 0.0;
    for (int m = 1; m <= 10; ++m) {
        double c = sobolev_constant(m);
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("area_bound_C: conventions and direct values") {
    CHECK(std::isinf(area_bound_C(kInf, 0.0)));
    CHECK(area_bound_C(1.0, 0.0) == Catch::Approx(0.5).epsilon(1e-15));
    double rho0 = kPi / 2;
    double expected = std::min(rho0 * rho0 / (2 + rho0 * rho0), kPi * kPi * kPi / 9.0);
    CHECK(area_bound_C(kInf, 1.0) == Catch::Approx(expected).epsilon(1e-15));
    CHECK_THROWS_AS(area_bound_C(0.0, 1.0), DomainError);
}

TEST_CASE("radial_hessian_lower_bound: endpoint values") {
    CHECK(radial_hessian_lower_bound(0.25, 2.0) == Catch::Approx(0.25).epsilon(1e-15));
    CHECK(radial_hessian_lower_bound(3.0 / 16.0, 1.0) == Catch::Approx(0.75).epsilon(1e-15));
    CHECK(radial_hessian_lower_bound(1e-12, 1.0) == Catch::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(radial_hessian_lower_bound(0.3, 1.0), DomainError);
    CHECK_THROWS_AS(radial_hessian_lower_bound(0.2, 0.0), DomainError);
}
