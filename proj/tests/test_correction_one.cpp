#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blowup/correction_one.hpp"

using namespace blowup;

namespace {

const CorrectionProfile& F1() {
    static CorrectionProfile c = solve_L0(g1_profile());
    return c;
}
const CorrectionProfile& F2() {
    static CorrectionProfile c = solve_L0(g2_profile());
    return c;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// mpmath values, tests/oracles/correction_one_oracle.py
struct Ref {
    double R, f;
};
const Ref kRef1[] = {{0.01, 0.000016665833365408849618}, {0.5, 0.036916489422731368896},
                     {2, 0.14744836902469143919},       {10, -3.137603530472146793},
                     {100, -76.473410674539782639},     {1000, -854.52702430845726072}};
const Ref kRef2[] = {{0.01, 0.00014997750111007300112}, {0.5, 0.25008129962373687227},
                     {2, -4.3374657956935299894},       {10, -15.848235710048740226},
                     {100, 597.68285921904464994},      {1000, 7587.3162599702894819}};

}  // namespace

TEST_CASE("values against multiprecision quadrature") {
    for (auto r : kRef1) CHECK(rel(F1().f.eval(r.R), r.f) < 1e-11);
    for (auto r : kRef2) CHECK(rel(F2().f.eval(r.R), r.f) < 1e-11);
    CHECK(F1().quad_error < 1e-12);
    CHECK(F2().quad_error < 1e-12);
}

TEST_CASE("fitted heads") {
    CHECK(rel(F1().head.b1, -0.86602540378443864676) < 1e-9);
    CHECK(rel(F1().head.b2, 11.780972450961724644) < 1e-9);
    CHECK(rel(F2().head.b1, 7.7942286340599478209) < 1e-9);
    CHECK(rel(F2().head.b2, -212.0575041173110436) < 1e-9);
    // the head is half the limit of R g
    CHECK(rel(F1().head.b1, -std::sqrt(3.0) / 2) < 1e-9);
    CHECK(rel(F2().head.b1, 9 * std::sqrt(3.0) / 2) < 1e-9);
    CHECK(F1().fit_residual < 1e-10);
    CHECK(F2().fit_residual < 1e-10);
}

TEST_CASE("large R law") {
    for (const auto* c : {&F1(), &F2()}) {
        double worst = 0.0;
        for (int i = 0; i <= 400; ++i) {
            double R = 10.0 * std::pow(1e4, i / 400.0);
            worst = std::max(worst, std::abs(c->tail_deriv(R, 0)) * R / std::log(R));
            // derivatives of the remainder decay one power faster each
            CHECK(std::abs(c->tail_deriv(R, 1)) * R * R / std::log(R) < 1e4);
            CHECK(std::abs(c->tail_deriv(R, 2)) * R * R * R / std::log(R) < 1e5);
        }
        CHECK(worst < 1e3);
    }
}

TEST_CASE("behaviour at the origin") {
    for (const auto* c : {&F1(), &F2()}) {
        CHECK(c->f.eval(0.0) == 0.0);
        CHECK(c->f.eval_deriv(0.0, 1) == 0.0);
        double a2 = c->near_zero;
        for (double R : {1e-4, 1e-3, 5e-3}) CHECK(rel(c->f.eval(R) / (R * R), a2) < 2 * R);
    }
    // f'' + 2f'/R = g at R = 0 gives 6 a2 = g(0)
    CHECK(rel(F1().near_zero, 1.0 / 6) < 1e-14);
    CHECK(rel(F2().near_zero, 9.0 / 6) < 1e-14);
}

TEST_CASE("L0 f = g from the interpolant") {
    auto g1 = g1_profile(), g2 = g2_profile();
    for (int j = 0; j < 2; ++j) {
        const auto& c = j == 0 ? F1() : F2();
        const auto& g = j == 0 ? g1 : g2;
        double worst = 0.0;
        for (std::size_t p = 0; p < c.f_interp.panels.size(); ++p) {
            const auto& s = c.f_interp.panels[p];
            auto d1 = s.derivative();
            auto d2 = d1.derivative();
            for (int i = 1; i < 8; ++i) {
                double R = s.a + (s.b - s.a) * i / 8.0;
                double res = d2.eval(R) + 2.0 / R * d1.eval(R) + closed::potential(R) * s.eval(R) - g.eval(R);
                worst = std::max(worst, std::abs(res));
            }
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("stored derivatives agree with the interpolant and across regimes") {
    const auto& c = F1();
    for (double R : {0.02, 0.3, 3.0, 40.0, 900.0}) {
        const auto& s = c.f_interp.panels[c.f_interp.locate(R)];
        CHECK(std::abs(c.f.eval_deriv(R, 1) - s.derivative().eval(R)) < 1e-9);
    }
    for (int k = 0; k <= 3; ++k) {
        double lo = c.f.eval_deriv(c.r_cap * (1 - 1e-12), k), hi = c.f.eval_deriv(c.r_cap * (1 + 1e-12), k);
        CHECK(std::abs(lo - hi) <= 1e-7 * std::max(1.0, std::abs(lo)));
    }
    double a = c.f.eval_deriv(1e-2 * (1 - 1e-12), 2), b = c.f.eval_deriv(1e-2 * (1 + 1e-12), 2);
    CHECK(std::abs(a - b) < 1e-11);
}

TEST_CASE("D acts on the head as 3/2 and 1/2") {
    auto h = F1().head.under_D();
    CHECK(h.b1 == 1.5 * F1().head.b1);
    CHECK(h.b2 == 0.5 * F1().head.b2);
    auto Df = scaling_op_D(F1().f);
    double R = 3000.0;
    CHECK(std::abs(Df.eval(R) - (h.b1 * R + h.b2)) < 0.05);
}

TEST_CASE("leading error coefficients at eps0 = 0") {
    ScalingParams p;
    p.eps0 = 0.0;
    AsymptoticHead h1{-std::sqrt(3.0) / 2, 15 * M_PI / 4}, h2{9 * std::sqrt(3.0) / 2, -67.5 * M_PI};
    auto [c1, c2] = leading_error_coeffs(p, h1, h2);
    CHECK(rel(c1.eval(0.1), -0.45669308402695006763) < 1e-13);
    CHECK(rel(c2.eval(0.1), -1652.5575027892012968) < 1e-13);
    CHECK(c1.reality_defect() < 1e-14);
}

TEST_CASE("leading error coefficients are real and bounded for eps0 > 0") {
    ScalingParams p;
    auto [c1, c2] = leading_error_coeffs(p, F1().head, F2().head);
    CHECK(c1.reality_defect() < 1e-12);
    CHECK(c2.reality_defect() < 1e-12);
    for (double t : {0.4, 0.1, 0.01, 1e-4}) {
        CHECK(std::isfinite(c1.eval(t)));
        CHECK(std::abs(c1.eval(t) + 0.4567) < 0.1);
    }
}

TEST_CASE("first correction") {
    ScalingParams p;
    auto fc = build_first_correction(p);
    double t = 0.05, r = 1e-6;
    double l = lambda_of(p, t), mu = t * l;
    double direct = std::sqrt(l) / (mu * mu) *
                    (fc.omega1.eval(t) * fc.f1.f.eval(r * l) + fc.omega2.eval(t) * fc.f2.f.eval(r * l));
    CHECK(v1(fc, t, r) == direct);
    CHECK_THROWS_AS(v1(fc, t, -1.0), DomainError);
    CHECK_THROWS_AS(v1(fc, 0.7, 1.0), DomainError);
    CHECK_THROWS_AS(solve_L0(g1_profile(), SolveL0Options{.r_series = -1}), ValidationError);
}
