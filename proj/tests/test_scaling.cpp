#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "blowup/scaling.hpp"

using namespace blowup;
using cplx = std::complex<double>;

static double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TEST_CASE("lambda pure power and vanishing sine") {
    ScalingParams p{3.5, 0.0, 0.1};
    CHECK(lambda_of(p, 0.25) == 512.0);
    ScalingParams q{3.5, 0.01, 0.1};
    double t = std::exp(-std::numbers::pi);
    CHECK(rel(lambda_of(q, t), std::exp(4.5 * std::numbers::pi)) < 1e-14);
}

TEST_CASE("lambda against multiprecision values") {
    ScalingParams p{3.5, 0.02, 0.1};
    // tests/oracles/scaling_oracle.py
    CHECK(rel(lambda_of(p, 0.1), 32096.82919324028403953894) < 1e-14);
    CHECK(rel(lambda_of(p, 0.3), 229.6478492832672761289751) < 1e-14);
    CHECK(rel(lambda_of(p, 0.05), 717624.7689736252446631683) < 1e-14);
    CHECK(rel(lambda_of(p, 0.001), 31994775029116.66674475115) < 1e-13);
}

TEST_CASE("domain errors") {
    ScalingParams p;
    CHECK_THROWS_AS(lambda_of(p, 0.0), DomainError);
    CHECK_THROWS_AS(lambda_of(p, 0.5), DomainError);
    CHECK_THROWS_AS(kappa_of(p, -1.0), DomainError);
}

TEST_CASE("kappa and nu_eff") {
    ScalingParams p{3.5, 0.02, 0.1};
    const double pi = std::numbers::pi;
    CHECK(rel(kappa_of(p, std::exp(-2 * pi)), 3.52) < 1e-15);
    CHECK(std::abs(kappa_of(p, std::exp(-pi / 2 - 2 * pi)) - 3.5) < 1e-15);
    double prev = 1.0;
    for (double t : {1e-2, 1e-4, 1e-8}) {
        double d = std::abs(nu_eff(p, t) - p.nu);
        CHECK(d <= p.eps0 / std::abs(std::log(t)) + 1e-16);
        CHECK(p.eps0 / std::abs(std::log(t)) < prev);
        prev = p.eps0 / std::abs(std::log(t));
    }
    CHECK(rel(mu_of(p, 0.1), 0.1 * lambda_of(p, 0.1)) < 1e-15);
}

TEST_CASE("log-derivative identity t lambda'/lambda = -(1+kappa)") {
    ScalingParams p{3.5, 0.02, 0.1};
    for (int k = 0; k < 20; ++k) {
        double t = 0.001 * std::pow(400.0, k / 19.0);
        double h = 1e-5 * t;
        double d = (lambda_of(p, t + h) - lambda_of(p, t - h)) / (2 * h);
        CHECK(rel(t * d / lambda_of(p, t), -(1.0 + kappa_of(p, t))) < 1e-8);
    }
}

TEST_CASE("admissible algebra") {
    ScalingParams p{3.5, 0.02, 0.1};
    double eb = p.eps_tilde(1);
    AdmissibleFn k = AdmissibleFn::kappa(p, eb, 40);
    const double pi = std::numbers::pi;

    SUBCASE("tdt of kappa is -eps0 sin log t") {
        AdmissibleFn d = adm_tdt(k);
        double h = 0.5 * p.eps0 / eb;
        CHECK(std::abs(d.coeff(1, 0) - cplx(0, h)) < 1e-15);
        CHECK(std::abs(d.coeff(1, 1) - cplx(0, -h)) < 1e-15);
        CHECK(std::abs(d.coeff(0, 0)) == 0.0);
        for (double t : {0.3, 0.01, 1e-5}) CHECK(std::abs(d.eval(t) + p.eps0 * std::sin(std::log(t))) < 1e-14);
    }
    SUBCASE("t^i times t^-i is one") {
        AdmissibleFn a(0.5, 4), b(0.5, 4);
        a.set(1, 0, 1.0 / 0.5);  // t^i
        b.set(1, 1, 1.0 / 0.5);  // t^-i
        AdmissibleFn c = adm_mul(a, b);
        for (double t : {0.3, 0.01}) CHECK(std::abs(c.eval_complex(t) - cplx(1.0)) < 1e-14);
        CHECK(std::abs(c.coeff(2, 1) - cplx(4.0)) < 1e-15);
    }
    SUBCASE("kappa squared at e^{-2 pi}") {
        AdmissibleFn k2 = adm_mul(k, k);
        CHECK(rel(k2.eval(std::exp(-2 * pi)), 3.52 * 3.52) < 1e-14);
    }
    SUBCASE("closed-form agreement to 1e-12 relative") {
        AdmissibleFn k2 = k * k, dk = adm_tdt(k);
        for (int i = 0; i < 200; ++i) {
            double t = 1e-8 * std::pow(0.49 / 1e-8, i / 199.0);
            double kc = kappa_of(p, t);
            CHECK(rel(k.eval(t), kc) < 1e-12);
            CHECK(rel(k2.eval(t), kc * kc) < 1e-12);
            double dkc = -p.eps0 * std::sin(std::log(t));
            CHECK(std::abs(dk.eval(t) - dkc) <= 1e-12 * std::abs(kc));
            CHECK(std::abs(k2.eval_complex(t).imag()) < 1e-12);
        }
        CHECK(k2.reality_defect() < 1e-15);
    }
    SUBCASE("add and incompatible bases") {
        AdmissibleFn s = adm_add(k, k);
        CHECK(rel(s.eval(0.2), 2 * kappa_of(p, 0.2)) < 1e-14);
        AdmissibleFn other = AdmissibleFn::kappa(p, p.eps_tilde(2), 40);
        CHECK_THROWS_AS(k + other, ValidationError);
    }
    SUBCASE("truncation overflow") {
        AdmissibleFn a = AdmissibleFn::kappa(p, eb, 3);
        AdmissibleFn b = a * a * a;
        CHECK(b.order() == 3);
        CHECK_THROWS_AS(b * a, NumericalError);
    }
    SUBCASE("eps0 = 0 collapses to constants") {
        ScalingParams z{3.5, 0.0, 0.1};
        AdmissibleFn kz = AdmissibleFn::kappa(z, 0.0, 40);
        AdmissibleFn c = (kz + 1.0) * (kz + 1.0) - adm_tdt(kz);
        CHECK(c.order() == 0);
        CHECK(c.eval(0.37) == 4.5 * 4.5);
    }
}
