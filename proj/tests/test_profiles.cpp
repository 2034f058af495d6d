#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blowup/profiles.hpp"

using namespace blowup;

TEST_CASE("W values and stationary equation") {
    CHECK(W(0.0) == 1.0);
    CHECK(std::abs(W(std::sqrt(3.0)) - 1.0 / std::sqrt(2.0)) < 1e-15);
    auto w = W_profile();
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        double R = 0.01 * std::pow(5000.0, i / 2000.0);
        double res = w.eval_deriv(R, 2) + 2.0 / R * w.eval_deriv(R, 1) + std::pow(w.eval(R), 5);
        worst = std::max(worst, std::abs(res));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("operator D on W") {
    auto w = W_profile();
    auto dw = scaling_op_D(w);
    auto ddw = scaling_op_D(dw);
    CHECK(dw.eval(0.0) == 0.5);
    for (int i = 0; i <= 500; ++i) {
        double R = 50.0 * i / 500.0;
        CHECK(std::abs(dw.eval(R) - 0.5 * closed::phi1(R)) <= 1e-12);
        double s = R * R / 3;
        double ref = (9 - 30 * R * R + R * R * R * R) / (36 * std::pow(1 + s, 2.5));
        CHECK(std::abs(ddw.eval(R) - ref) <= 1e-12);
    }
}

TEST_CASE("fundamental systems") {
    auto [p1, p2] = L0_fundamental();
    auto [t1, t2] = L0_tilde_fundamental();
    auto l1 = L0_apply(p1), l2 = L0_apply(p2);
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        double R = 0.1 * std::pow(500.0, i / 1000.0);
        worst = std::max({worst, std::abs(l1.eval(R)), std::abs(l2.eval(R))});
    }
    CHECK(worst <= 1e-9);
    for (double R : {0.5, 1.0, 5.0, 20.0}) {
        double wr = t1.eval_deriv(R, 1) * t2.eval(R) - t1.eval(R) * t2.eval_deriv(R, 1);
        CHECK(std::abs(wr - 1.0) <= 1e-10);
    }
    CHECK(t1.eval(0.0) == 0.0);
    CHECK(t1.eval_deriv(0.0, 1) == 1.0);
    CHECK_THROWS_AS(p2.eval(0.0), DomainError);
}

TEST_CASE("hand derivatives agree with central differences") {
    auto [t1, t2] = L0_tilde_fundamental();
    for (auto* f : {&t1, &t2}) {
        for (double R : {0.3, 1.7, 12.0}) {
            double h = 1e-5;
            double fd = (f->eval(R + h) - f->eval(R - h)) / (2 * h);
            CHECK(std::abs(fd - f->eval_deriv(R, 1)) < 1e-7);
            double fd2 = (f->eval_deriv(R + h, 1) - f->eval_deriv(R - h, 1)) / (2 * h);
            CHECK(std::abs(fd2 - f->eval_deriv(R, 2)) < 1e-7);
        }
    }
}

TEST_CASE("bulk error factors") {
    ScalingParams z{3.5, 0.0, 0.1};
    auto fz = bulk_error_factors(z, 0.0);
    CHECK(fz.omega1.order() == 0);
    CHECK(fz.omega1.eval(0.2) == doctest::Approx(4.5 / 2).epsilon(1e-15));
    CHECK(fz.omega2.eval(0.2) == doctest::Approx(4.5 * 4.5 / 36).epsilon(1e-15));
    CHECK(fz.g1.eval(0.0) == 1.0);
    CHECK(fz.g2.eval(0.0) == 9.0);

    ScalingParams p{3.5, 0.02, 0.1};
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        double t = 1e-3 * std::pow(400.0, i / 49.0);
        for (int j = 0; j < 50; ++j) {
            double R = 0.05 + 30.0 * j / 49.0;
            double a = bulk_error_e0(p, t, R), b = bulk_error_e0_direct(p, t, R);
            worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
        }
    }
    CHECK(worst <= 1e-10);
}

// R^2 <R>^-3 holds as R -> infinity; at R = 0 the error is omega1 + 9 omega2, not O(R^2).
TEST_CASE("bulk error bound shape R^2 <R>^-3 for large R") {
    ScalingParams p{3.5, 0.02, 0.1};
    double sup = 0.0;
    for (double t : {0.1, 0.01, 0.001})
        for (int i = 0; i <= 400; ++i) {
            double R = std::pow(1e7, i / 400.0);
            double n = std::abs(t * t / std::sqrt(lambda_of(p, t)) * bulk_error_e0(p, t, R));
            double br = std::sqrt(1 + R * R);
            sup = std::max(sup, n * br * br * br / (R * R));
        }
    CHECK(std::isfinite(sup));
    CHECK(sup < 100.0);
}
