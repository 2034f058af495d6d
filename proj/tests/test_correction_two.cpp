#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "blowup/correction_two.hpp"
#include "blowup/profiles.hpp"

using namespace blowup;

namespace {

const SecondCorrection& SC() {
    static SecondCorrection sc = build_second_correction(ScalingParams{});
    return sc;
}

RecursionParams level0_params(double nu, bool linear, double c = 1.0) {
    RecursionParams rp;
    rp.nu_tilde = nu;
    rp.eps_tilde = 0.0;
    rp.c = AdmissibleFn::constant(0.0, 4, c);
    rp.linear_forcing = linear;
    return rp;
}

LevelEntry random_entry(std::mt19937& rng, int deg) {
    std::normal_distribution<double> nd;
    LevelEntry e;
    for (auto* s : {&e.H0, &e.H1, &e.H2}) {
        s->a = 0.0;
        s->b = 1.0;
        for (int k = 0; k <= deg; ++k) s->c.push_back(cplx(nd(rng), nd(rng)) / double(1 + k * k));
    }
    return e;
}

}  // namespace

TEST_CASE("recursion right-hand side") {
    CoefficientTable empty(0);
    auto rp = level0_params(4.75, false, 2.5);
    auto [R, Rp] = recursion_rhs(empty, 0, 0, rp, 0.3);
    CHECK(R == cplx(2.5));
    CHECK(Rp == cplx(0.0));
    rp.linear_forcing = true;
    CHECK(recursion_rhs(empty, 0, 0, rp, 0.3).first == cplx(0.75));

    RecursionParams z = level0_params(2.0, false, 0.0);
    CoefficientTable zeros(2);
    for (int n = 0; n <= 2; ++n) {
        zeros.level(n).resize(n + 1);
        for (auto& e : zeros.level(n))
            for (auto* s : {&e.H0, &e.H1, &e.H2}) s->c.assign(5, cplx{});
    }
    for (int m = 0; m <= 2; ++m) CHECK(std::abs(recursion_rhs(zeros, 2, m, z, 0.4).first) == 0.0);

    // conjugation symmetry on a random table that has it
    std::mt19937 rng(7);
    CoefficientTable tb(3);
    for (int n = 0; n <= 2; ++n) {
        auto& lev = tb.level(n);
        lev.resize(n + 1);
        for (int m = 0; 2 * m <= n; ++m) lev[m] = random_entry(rng, 12);
        for (int m = 0; 2 * m < n; ++m) lev[n - m] = lev[m].conj();
        if (n % 2 == 0) lev[n / 2] = lev[n / 2];  // middle entry must be real for symmetry
    }
    for (int n = 0; n <= 2; n += 2)
        for (auto* s : {&tb.level(n)[n / 2].H0, &tb.level(n)[n / 2].H1, &tb.level(n)[n / 2].H2})
            for (auto& v : s->c) v = v.real();
    tb.level(3).resize(4);
    RecursionParams rr;
    rr.nu_tilde = 2.2;
    rr.eps_tilde = 0.1;
    rr.c = AdmissibleFn(0.1, 10);
    std::normal_distribution<double> nd;
    for (int n = 0; n <= 3; ++n)
        for (int m = 0; 2 * m <= n; ++m) {
            cplx v(nd(rng), 2 * m == n ? 0.0 : nd(rng));
            rr.c.set(n, m, v);
            rr.c.set(n, n - m, std::conj(v));
        }
    rr.linear_forcing = true;
    for (double a : {0.05, 0.37, 0.81, 1.0})
        for (int m = 0; m <= 3; ++m) {
            auto x = recursion_rhs(tb, 3, m, rr, a), y = recursion_rhs(tb, 3, 3 - m, rr, a);
            CHECK(std::abs(x.first - std::conj(y.first)) < 1e-12 * (1 + std::abs(x.first)));
            CHECK(std::abs(x.second - std::conj(y.second)) < 1e-12 * (1 + std::abs(x.second)));
        }
}

TEST_CASE("level solve against the series and an ODE integrator") {
    // tests/oracles/correction_two_oracle.py
    auto cst = build_table(level0_params(4.75, false)).entry(0, 0);
    auto lin = build_table(level0_params(1.25, true)).entry(0, 0);
    for (double a : {1e-3, 5e-3, 2e-2}) {
        double s2 = a * a / 6 + 77.0 / 1920 * std::pow(a, 4);
        CHECK(std::abs(cst.g(a).real() - s2) < 1e-3 * std::pow(a, 6) + 1e-14 * s2);
        double s3 = a * a * a / 12 + 77.0 / 5760 * std::pow(a, 5) + 209.0 / 49152 * std::pow(a, 7);
        CHECK(std::abs(lin.g(a).real() - s3) < 1e-2 * std::pow(a, 9) + 1e-12 * s3);
        CHECK(std::abs(cst.g(a).imag()) == 0.0);
    }
    struct P {
        double a, g, gp;
    };
    const P pc[] = {{0.05, 0.00041691731491061539812, 0.016686718414262913389},
                    {0.2, 0.0067308218570056637131, 0.067949655529311902092},
                    {0.5, 0.044170351413665013186, 0.18668472522915245649},
                    {0.8, 0.12304511666022609118, 0.34843484230170631923},
                    {0.95, 0.18294484859923062941, 0.45332620796852038991}};
    const P pl[] = {{0.05, 0.000010420847509579413797, 0.00062541821745696869886},
                    {0.2, 0.00067099983014380239387, 0.010108892732245973656},
                    {0.5, 0.010871758168548622497, 0.06721928324796842244},
                    {0.8, 0.04831693621795881011, 0.19998850960168536178},
                    {0.95, 0.087170063554467774453, 0.33185925155401181172}};
    for (auto p : pc) {
        CHECK(std::abs(cst.g(p.a).real() - p.g) < 1e-12 * std::abs(p.g) + 1e-15);
        CHECK(std::abs(cst.g(p.a, 1).real() - p.gp) < 1e-11 * std::abs(p.gp));
    }
    for (auto p : pl) {
        CHECK(std::abs(lin.g(p.a).real() - p.g) < 1e-11 * std::abs(p.g));
        CHECK(std::abs(lin.g(p.a, 1).real() - p.gp) < 1e-10 * std::abs(p.gp));
    }
    CHECK(cst.g(0.0) == cplx(0.0));
    CHECK(cst.g(0.0, 1) == cplx(0.0));

    auto zero = solve_level(3, [](double) { return std::pair<cplx, cplx>{}; }, 2.0);
    for (double v : zero.sup) CHECK(v == 0.0);
    CHECK_THROWS_AS(build_table(level0_params(0.9, false)), ValidationError);
}

TEST_CASE("q series structure") {
    ScalingParams p0;
    p0.eps0 = 0.0;
    auto fc = build_first_correction(p0);
    auto [c1, c2] = leading_error_coeffs(p0, fc.f1.head, fc.f2.head);
    auto q = build_q(2, p0, c2);
    CHECK(q.table.N() == 0);
    CHECK(q.eval(0.4, 0.1) == q.eval(0.4, 0.003));

    for (const QSeries* s : {&SC().q1, &SC().q2}) {
        for (double t : {0.09, 0.01, 1e-3, 1e-5}) {
            CHECK(s->eval(0.0, t) == 0.0);
            CHECK(s->eval(0.0, t, 1) == 0.0);
        }
        CHECK(s->growth.tail_bound < 1e-8);
        CHECK(s->growth.C0 * s->rp.eps_tilde < 0.9);
        for (int n = 0; n <= s->table.N(); ++n)
            for (int m = 0; m <= n; ++m) {
                auto e = s->table.entry(n, m);
                CHECK(std::abs(e.g(0.0)) == 0.0);
                CHECK(std::abs(e.g(0.0, 1)) == 0.0);
            }
    }
    CHECK_THROWS_AS(build_q(3, ScalingParams{}, c1), ValidationError);
    CHECK_THROWS_AS(build_q(2, ScalingParams{}, c1), ValidationError);  // wrong base
}

TEST_CASE("q1 levels: |g''|/a bounded near 0") {
    const auto& tb = SC().q1.table;
    for (int n = 0; n <= 6; ++n) {
        double worst = 0.0, ref = 0.0;
        for (int m = 0; m <= n; ++m) {
            for (int i = 1; i <= 100; ++i) {
                double a = 0.5 * i / 100.0;
                worst = std::max(worst, std::abs(tb.entry(n, m).g(a, 2)) / a);
            }
            ref = std::max(ref, tb.entry(n, m).sup[2]);
        }
        CHECK(worst < 20.0 * ref + 1e-300);
    }
}

TEST_CASE("q solves the reduced equation (finite differences in a and t)") {
    for (const QSeries* q : {&SC().q1, &SC().q2}) {
        double nu = q->rp.nu_tilde, ep = q->rp.eps_tilde;
        double worst = 0.0, scale = 0.0;
        for (int it = 0; it < 20; ++it) {
            double t = 0.09 * std::pow(1e-4, it / 19.0);
            double lt = std::log(t);
            double beta = nu + 2 * ep * std::cos(lt), tbp = -2 * ep * std::sin(lt);
            for (int ia = 0; ia < 50; ++ia) {
                double a = 0.02 + 0.88 * ia / 49.0;
                const double ha = 1e-3, hs = 1e-3;
                auto Q = [&](double da, double ds) { return q->eval(a + da, t * std::exp(ds)); };
                auto d1 = [&](auto f, double h) {
                    return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h);
                };
                auto d2 = [&](auto f, double h) {
                    return (-f(-2 * h) + 16 * f(-h) - 30 * f(0) + 16 * f(h) - f(2 * h)) / (12 * h * h);
                };
                double q0 = Q(0, 0);
                double qa = d1([&](double h) { return Q(h, 0); }, ha);
                double qaa = d2([&](double h) { return Q(h, 0); }, ha);
                double qs = d1([&](double h) { return Q(0, h); }, hs);  // t q_t
                double qss = d2([&](double h) { return Q(0, h); }, hs);
                double qas = d1([&](double h) { return d1([&](double g) { return Q(g, h); }, ha); }, hs);
                double t2qtt = qss - qs;
                double L = (1 - a * a) * qaa + (2 * (beta - 1) * a + 2 / a) * qa - (beta * beta - beta + tbp) * q0 -
                           (t2qtt + 2 * beta * qs) + 2 * a * qas;
                double c = q->forcing(a, t);
                worst = std::max(worst, std::abs(L - c));
                scale = std::max(scale, std::abs(c));
            }
        }
        MESSAGE("q", q->j, " residual ", worst / scale);
        CHECK(worst <= 1e-6 * scale);
    }
}

TEST_CASE("v2 and u2") {
    const auto& sc = SC();
    const auto& p = sc.params;
    for (double t : {0.09, 0.01, 1e-3}) CHECK(v2(sc, t, 0.0) == 0.0);
    CHECK_THROWS_AS(v2(sc, 0.05, 0.06), DomainError);
    CHECK_THROWS_AS(v2(sc, 0.05, -1e-9), DomainError);

    auto W = W_profile();
    for (double t : {0.09, 0.02, 0.005}) {
        double lam = lambda_of(p, t), mu = t * lam, sl = std::sqrt(lam);
        double worst_v = 0.0, worst_u = 0.0;
        for (int i = 1; i <= 200; ++i) {
            double r = t * i / 200.0, a = r / t, R = r * lam;
            worst_v = std::max(worst_v, std::abs(v2(sc, t, r)) * mu * mu / (sl * a * a * (1 + R)));
            worst_u = std::max(worst_u, std::abs(u2(sc, t, r) / sl - W.eval(R)) * mu * mu / R);
        }
        MESSAGE("t=", t, " v2 ratio ", worst_v, " u2 ratio ", worst_u);
        CHECK(worst_v < 1e4);
        CHECK(worst_u < 1e4);
    }
}

TEST_CASE("v2 regression at eps0 = 0") {
    ScalingParams p0;
    p0.eps0 = 0.0;
    auto sc = build_second_correction(p0);
    std::ifstream in(std::string(BLOWUP_FIXTURE_DIR) + "/v2_eps0_zero.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        double t, r, v;
        char c;
        ss >> t >> c >> r >> c >> v;
        CHECK(std::abs(v2(sc, t, r) - v) <= 1e-9 * std::abs(v));
        ++rows;
    }
    CHECK(rows == 10);
}

TEST_CASE("derivative bounds for v2 on r <= t/2") {
    const auto& sc = SC();
    const auto& p = sc.params;
    std::vector<double> per_t;
    for (double t : {0.08, 0.008, 0.0008}) {
        double lam = lambda_of(p, t), mu = t * lam;
        double worst = 0.0;
        for (int i = 1; i <= 40; ++i) {
            double r = 0.5 * t * i / 40.0, a = r / t, R = r * lam;
            double norm = mu * mu / (std::sqrt(lam) * a * a * (1 + R));
            for (int l = 0; l <= 2; ++l) {
                double h = 1e-3 * t;
                auto f = [&](double s) { return v2_dr(sc, t + s, r, l); };
                double d0 = f(0), d1 = (f(h) - f(-h)) / (2 * h), d2 = (f(h) - 2 * d0 + f(-h)) / (h * h);
                double rl = std::pow(r, l);
                worst = std::max({worst, std::abs(rl * d0) * norm, std::abs(t * rl * d1) * norm,
                                  std::abs(t * t * rl * d2) * norm});
            }
        }
        per_t.push_back(worst);
    }
    MESSAGE("derivative bound ratios ", per_t[0], " ", per_t[1], " ", per_t[2]);
    for (double w : per_t) CHECK(std::isfinite(w));
    CHECK(per_t[2] < 3 * per_t[0]);
    CHECK(per_t[1] < 3 * per_t[0]);
}

TEST_CASE("extension beyond the cone") {
    const auto& sc = SC();
    CHECK(bump_B1(0.5, 0.1) == 1.0);
    CHECK(bump_B1(1.2, 0.1) == 0.0);
    CHECK(std::abs(bump_B1(1.05, 0.1) - 0.5) < 1e-15);
    for (double t : {0.08, 0.01}) {
        double in = u2(sc, t, t), out = extend_beyond_cone(sc, t, t * (1 + 1e-15));
        CHECK(std::abs(in - out) <= 1e-13 * std::abs(in));
        CHECK(extend_beyond_cone(sc, t, (1 + 2 * sc.b1) * t) == 0.0);
        // one-sided derivatives from outside equal the interior values at r = t
        for (int l = 0; l <= 2; ++l) {
            double o = extend_dr(sc, t, t * (1 + 1e-15), l), i = u2_dr(sc, t, t, l);
            CHECK(std::abs(o - i) <= 1e-9 * std::abs(i));
        }
        // the interior second derivative is continuous up to the cone
        double e2 = u2_dr(sc, t, t, 2);
        // Hoelder-1/4 at the cone: the gap should shrink like d^(1/4)
        double prev = INFINITY;
        for (double d : {1e-2, 1e-4, 1e-6, 1e-8}) {
            double gap = std::abs(u2_dr(sc, t, t * (1 - d), 2) - e2);
            CHECK(gap < prev / 2.5);
            prev = gap;
        }
        // analytic derivatives of the extension against central differences
        for (double x : {1.02, 1.05, 1.08}) {
            double r = x * t, h = 1e-5 * t;
            for (int l = 0; l <= 1; ++l) {
                double fd = (extend_dr(sc, t, r + h, l) - extend_dr(sc, t, r - h, l)) / (2 * h);
                CHECK(std::abs(fd - extend_dr(sc, t, r, l + 1)) < 1e-6 * std::abs(extend_dr(sc, t, r, l + 1)) + 1e-9);
            }
        }
    }
    CHECK_THROWS_AS(extend_beyond_cone(sc, 0.05, 0.05), DomainError);
}
