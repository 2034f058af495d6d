#include "blowup/correction_two.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "blowup/profiles.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

namespace {
const cplx I1{0.0, 1.0};
}

void RecursionParams::validate() const {
    if (!(nu_tilde > 1.0)) throw ValidationError("recursion: nu_tilde must exceed 1");
    if (!std::isfinite(eps_tilde)) throw ValidationError("recursion: eps_tilde not finite");
    if (N < 0 || degree < 8) throw ValidationError("recursion: bad truncation");
    if (c.eps_tilde() != eps_tilde) throw ValidationError("recursion: forcing written in a different base");
}

double a_to_y(double a) { return 1.0 - std::pow(1.0 - a, 0.25); }
double y_to_a(double y) {
    double u = 1.0 - y;
    return 1.0 - u * u * u * u;
}

cplx LevelEntry::g(double a, int k) const {
    double y = a_to_y(a);
    switch (k) {
        case 0: return a * a * H0.eval(y);
        case 1: return a * H1.eval(y);
        case 2: return H2.eval(y);
        default: break;
    }
    if (a >= 1.0) throw DomainError("g: derivatives above 2 need a < 1");
    double u = 1.0 - a;
    double y1 = 0.25 * std::pow(u, -0.75), y2 = 0.1875 * std::pow(u, -1.75);
    if (k == 3) return dH2.eval(y) * y1;
    if (k == 4) return ddH2.eval(y) * y1 * y1 + dH2.eval(y) * y2;
    throw ValidationError("g: derivative order above 4");
}

void LevelEntry::g012(double y, double a, cplx out[3]) const {
    // the three series share length and interval, so one Clenshaw loop
    double t = 2.0 * y - 1.0, t2 = 2.0 * t;
    cplx b1[3]{}, b2[3]{};
    std::size_t n = H0.c.size();
    for (std::size_t k = n; k-- > 1;) {
        cplx x0 = t2 * b1[0] - b2[0] + H0.c[k];
        cplx x1 = t2 * b1[1] - b2[1] + H1.c[k];
        cplx x2 = t2 * b1[2] - b2[2] + H2.c[k];
        b2[0] = b1[0];
        b2[1] = b1[1];
        b2[2] = b1[2];
        b1[0] = x0;
        b1[1] = x1;
        b1[2] = x2;
    }
    out[0] = a * a * (t * b1[0] - b2[0] + H0.c[0]);
    out[1] = a * (t * b1[1] - b2[1] + H1.c[0]);
    out[2] = t * b1[2] - b2[2] + H2.c[0];
}

LevelEntry LevelEntry::conj() const {
    LevelEntry e = *this;
    for (auto* s : {&e.H0, &e.H1, &e.H2, &e.dH2, &e.ddH2})
        for (auto& v : s->c) v = std::conj(v);
    return e;
}

std::pair<cplx, cplx> recursion_rhs(const CoefficientTable& tb, int n, int m, const RecursionParams& rp, double a) {
    double k = n - 2 * m, nu = rp.nu_tilde;
    cplx al1 = 1.0 + I1 - 2.0 * nu - 2.0 * I1 * k;
    cplx al2 = 1.0 - I1 - 2.0 * nu - 2.0 * I1 * k;
    cplx R = 0.0, Rp = 0.0;
    double y = a_to_y(a);
    cplx v[3];
    auto get = [&](int nn, int mm) -> bool {
        if (!tb.has(nn, mm)) return false;
        tb.entry(nn, mm).g012(y, a, v);
        return true;
    };
    if (n >= 1) {
        for (int d = 0; d <= 1; ++d) {
            if (!get(n - 1, m - d)) continue;
            cplx al = d == 0 ? al1 : al2;
            R += -2.0 * a * v[1] - al * v[0];
            Rp += -2.0 * v[1] - 2.0 * a * v[2] - al * v[1];
        }
    }
    if (n >= 2) {
        for (int d = 0; d <= 2; ++d) {
            if (!get(n - 2, m - d)) continue;
            double w = d == 1 ? 2.0 : 1.0;
            R += w * v[0];
            Rp += w * v[1];
        }
    }
    if (n <= rp.c.order()) {
        cplx c = rp.c.coeff(n, m);
        if (rp.linear_forcing) {
            R += c * a;
            Rp += c;
        } else {
            R += c;
        }
    }
    return {R, Rp};
}

LevelEntry solve_level(int k, const RhsFn& rhs, double nu_tilde, int degree) {
    const cplx s = nu_tilde + 1.0 + I1 * double(k);
    const int N = degree;
    auto y = lobatto_points(N, 0.0, 1.0);
    std::vector<double> a(N + 1);
    for (int i = 0; i <= N; ++i) a[i] = y_to_a(y[i]);
    a[0] = 0.0;
    a[N] = 1.0;

    // P(a) = int_0^a x (1+x)^{-s} R dx
    const GLRule& g8 = gauss_legendre(8);
    std::vector<cplx> P(N + 1, 0.0);
    for (int i = 0; i < N; ++i) {
        double c = 0.5 * (a[i] + a[i + 1]), h = 0.5 * (a[i + 1] - a[i]);
        cplx acc = 0.0;
        for (std::size_t q = 0; q < g8.x.size(); ++q) {
            double x = c + h * g8.x[q];
            acc += g8.w[q] * x * std::exp(-s * std::log1p(x)) * rhs(x).first;
        }
        P[i + 1] = P[i] + h * acc;
    }

    // I = (1-a)^{s-1} int_0^a x (1-x)^{-s} R dx and K = d I/da, swept in z = -log(1-x)
    const GLRule& g16 = gauss_legendre(16);
    std::vector<cplx> Iv(N + 1, 0.0), Kv(N + 1, 0.0);
    const double wmax = std::min(2.0, 8.0 / std::abs(s));
    cplx I = 0.0, K = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
        double z0 = -4.0 * std::log1p(-y[i]), z1 = -4.0 * std::log1p(-y[i + 1]);
        int np = std::max(1, static_cast<int>(std::ceil((z1 - z0) / wmax)));
        double hz = (z1 - z0) / np;
        cplx eI = std::exp(-(s - 1.0) * hz), eK = std::exp(-(s - 2.0) * hz);
        for (int p = 0; p < np; ++p) {
            double zl = z0 + p * hz, zr = zl + hz, c = 0.5 * (zl + zr);
            cplx sI = 0.0, sK = 0.0;
            for (std::size_t q = 0; q < g16.x.size(); ++q) {
                double z = c + 0.5 * hz * g16.x[q];
                double x = -std::expm1(-z);
                auto [R, Rp] = rhs(x);
                sI += g16.w[q] * x * R * std::exp(-(s - 1.0) * (zr - z));
                sK += g16.w[q] * (R + x * Rp) * std::exp(-(s - 2.0) * (zr - z));
            }
            I = eI * I + 0.5 * hz * sI;
            K = eK * K + 0.5 * hz * sK;
        }
        Iv[i + 1] = I;
        Kv[i + 1] = K;
    }
    auto [R1, R1p] = rhs(1.0);
    Iv[N] = R1 / (s - 1.0);
    Kv[N] = (R1 + R1p) / (s - 2.0);

    std::vector<cplx> h0(N + 1), h1(N + 1), h2(N + 1);
    LevelEntry e;
    cplx R0 = rhs(0.0).first;
    h0[0] = R0 / 6.0;
    h1[0] = R0 / 3.0;
    h2[0] = R0 / 3.0;
    for (int i = 1; i <= N; ++i) {
        double ai = a[i];
        cplx Ri = i == N ? R1 : rhs(ai).first;
        cplx sp1 = std::exp((s - 1.0) * std::log1p(ai));
        cplx g;
        if (ai <= 0.25) {
            // the two terms cancel to O(a); integrate the difference of kernels instead
            const GLRule& g30 = gauss_legendre(30);
            double c = 0.5 * ai;
            cplx acc = 0.0;
            for (std::size_t q = 0; q < g30.x.size(); ++q) {
                double x = c + c * g30.x[q];
                double l1 = std::log1p(ai) - std::log1p(x), l2 = std::log1p(-ai) - std::log1p(-x);
                cplx ker = 2.0 * std::exp(0.5 * s * (l1 + l2)) * std::sinh(0.5 * s * (l1 - l2));
                acc += g30.w[q] * x * rhs(x).first * ker;
            }
            g = c * acc / (2.0 * s * ai);
        } else {
            g = ((1.0 + ai) * sp1 * P[i] - (1.0 - ai) * Iv[i]) / (2.0 * s * ai);
        }
        cplx agp = 0.5 * (sp1 * P[i] + Iv[i]);
        cplx agpp = 0.5 * ((s - 1.0) * sp1 / (1.0 + ai) * P[i] + ai * Ri / (1.0 + ai) + Kv[i]);
        cplx gp = (agp - g) / ai;
        cplx gpp = (agpp - 2.0 * gp) / ai;
        h0[i] = g / (ai * ai);
        h1[i] = gp / ai;
        h2[i] = gpp;
    }
    for (int i = 0; i <= N; ++i) {
        double ai = a[i];
        e.sup[0] = std::max(e.sup[0], std::abs(h0[i]) * ai * ai);
        e.sup[1] = std::max(e.sup[1], std::abs(h1[i]) * ai);
        e.sup[2] = std::max(e.sup[2], std::abs(h2[i]));
    }
    for (double v : e.sup)
        if (!std::isfinite(v)) throw NumericalError("solve_level: quadrature failure near a = 1");
    e.H0 = cheb_from_values(h0, 0.0, 1.0);
    e.H1 = cheb_from_values(h1, 0.0, 1.0);
    e.H2 = cheb_from_values(h2, 0.0, 1.0);
    e.dH2 = e.H2.derivative();
    e.ddH2 = e.dH2.derivative();
    return e;
}

CoefficientTable build_table(const RecursionParams& rp) {
    rp.validate();
    int N = rp.eps_tilde == 0.0 ? 0 : rp.N;
    CoefficientTable tb(N);
    for (int n = 0; n <= N; ++n) {
        auto& lev = tb.level(n);
        lev.resize(n + 1);
        std::vector<std::future<LevelEntry>> jobs;
        for (int m = 0; 2 * m <= n; ++m) {
            jobs.push_back(std::async(std::launch::async, [&tb, &rp, n, m] {
                RhsFn rhs = [&](double x) { return recursion_rhs(tb, n, m, rp, x); };
                return solve_level(n - 2 * m, rhs, rp.nu_tilde, rp.degree);
            }));
        }
        for (int m = 0; 2 * m <= n; ++m) lev[m] = jobs[m].get();
        for (int m = 0; 2 * m < n; ++m) lev[n - m] = lev[m].conj();
    }
    return tb;
}

GrowthReport growth_of(const CoefficientTable& tb, double eps) {
    GrowthReport r;
    int N = tb.N();
    for (int n = 0; n <= N; ++n) {
        double mx = 0.0;
        for (int m = 0; m <= n; ++m)
            for (double v : tb.entry(n, m).sup) mx = std::max(mx, v);
        r.level_max.push_back(mx);
        r.roots.push_back(n == 0 ? mx : std::pow(mx, 1.0 / n));
    }
    if (N == 0) return r;
    r.C0_root = r.roots.back();
    int lo = std::min(10, N / 2);
    // exp of the least-squares slope of log level_max on [lo, hi]
    auto fit = [&](int hi) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
        for (int n = lo; n <= hi; ++n) {
            double ly = std::log(std::max(r.level_max[n], 1e-300));
            sx += n;
            sy += ly;
            sxx += double(n) * n;
            sxy += n * ly;
            cnt += 1;
        }
        return cnt > 1 ? std::exp((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx)) : r.roots[hi];
    };
    r.C0_slope = fit(N);
    double fmin = r.C0_slope, fmax = r.C0_slope;
    for (int hi = std::min(N, 2 * lo); hi <= N; ++hi) {
        double c = fit(hi);
        fmin = std::min(fmin, c);
        fmax = std::max(fmax, c);
    }
    r.drift = (fmax - fmin) / r.C0_slope;
    double cmax = 0.0;
    for (int n = lo; n <= N; ++n) cmax = std::max(cmax, r.roots[n]);
    r.C0 = std::max(cmax, r.C0_slope);
    double x = r.C0 * std::abs(eps);
    r.tail_bound = x < 1.0 ? std::pow(x, N + 1) / (1.0 - x) : INFINITY;
    return r;
}

double QSeries::eval(double a, double t, int l, int k) const {
    if (a < 0.0 || a > 1.0) throw DomainError("q: a outside [0, 1]");
    double lt = std::log(t), eps = rp.eps_tilde;
    double floor = 1e-22 * std::max(growth.level_max.empty() ? 0.0 : growth.level_max[0], 1e-300);
    double sum = 0.0, en = 1.0;
    for (int n = 0; n <= table.N(); ++n) {
        if (n > 0) en *= eps;
        if (en * growth.level_max[n] < floor) break;
        for (int m = 0; m <= n; ++m) {
            double kk = n - 2 * m;
            cplx ph = std::exp(I1 * kk * lt);
            for (int i = 0; i < k; ++i) ph *= I1 * kk;
            sum += en * (table.entry(n, m).g(a, l) * ph).real();
        }
    }
    return sum;
}

double QSeries::forcing(double a, double t) const { return rp.c.eval(t) * (rp.linear_forcing ? a : 1.0); }

QSeries build_q(int j, const ScalingParams& p, const AdmissibleFn& c_j, int N, int degree) {
    if (j != 1 && j != 2) throw ValidationError("build_q: j must be 1 or 2");
    QSeries q;
    q.j = j;
    q.rp.nu_tilde = p.nu_tilde(j);
    q.rp.eps_tilde = p.eps_tilde(j);
    q.rp.c = c_j;
    q.rp.linear_forcing = j == 1;
    q.rp.N = N;
    q.rp.degree = degree;
    q.table = build_table(q.rp);
    q.growth = growth_of(q.table, q.rp.eps_tilde);
    if (q.growth.C0 * std::abs(q.rp.eps_tilde) >= 0.9)
        throw NumericalError("build_q: series unsafe, C0*eps = " + std::to_string(q.growth.C0 * q.rp.eps_tilde));
    return q;
}

SecondCorrection build_second_correction(const ScalingParams& p, int N) {
    p.validate();
    SecondCorrection sc;
    sc.params = p;
    sc.fc = build_first_correction(p);
    auto [c1, c2] = leading_error_coeffs(p, sc.fc.f1.head, sc.fc.f2.head);
    auto f1 = std::async(std::launch::async, [&] { return build_q(1, p, c1, N); });
    sc.q2 = build_q(2, p, c2, N);
    sc.q1 = f1.get();
    return sc;
}

namespace {
void check_interior(double t, double r) {
    check_time(t);
    if (r < 0.0 || r > t * (1.0 + 1e-14)) throw DomainError("interior branch needs 0 <= r <= t");
}
}  // namespace

double v2_dr(const SecondCorrection& sc, double t, double r, int l) {
    check_interior(t, r);
    double lam = lambda_of(sc.params, t), mu = t * lam, a = std::min(r / t, 1.0);
    double s = std::sqrt(lam) * std::pow(t, -l);
    return s * (sc.q1.eval(a, t, l) / mu + sc.q2.eval(a, t, l) / (mu * mu));
}

double v2(const SecondCorrection& sc, double t, double r) { return v2_dr(sc, t, r, 0); }

double u2_dr(const SecondCorrection& sc, double t, double r, int l) {
    check_interior(t, r);
    if (l < 0 || l > 2) throw ValidationError("u2_dr: order above 2");
    const auto& p = sc.params;
    double lam = lambda_of(p, t), mu = t * lam, R = r * lam, sl = std::sqrt(lam), ll = std::pow(lam, l);
    static const RadialProfile w = W_profile();
    double u0l = sl * ll * w.eval_deriv(R, l);
    double v1l = sl / (mu * mu) * ll *
                 (sc.fc.omega1.eval(t) * sc.fc.f1.f.eval_deriv(R, l) + sc.fc.omega2.eval(t) * sc.fc.f2.f.eval_deriv(R, l));
    return u0l + v1l + v2_dr(sc, t, r, l);
}

double u2(const SecondCorrection& sc, double t, double r) { return u2_dr(sc, t, r, 0); }

double bump_B1(double x, double b1, int deriv) {
    if (!(b1 > 0.0)) throw ValidationError("bump width must be positive");
    if (x <= 1.0) return deriv == 0 ? 1.0 : 0.0;
    if (x >= 1.0 + b1) return 0.0;
    double s = (x - 1.0) / b1;
    switch (deriv) {
        case 0: return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        case 1: return -30.0 * s * s * (1.0 - s) * (1.0 - s) / b1;
        case 2: return -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (b1 * b1);
        default: throw ValidationError("bump_B1: derivative order");
    }
}

double extend_dr(const SecondCorrection& sc, double t, double r, int l) {
    check_time(t);
    if (!(r > t)) throw DomainError("extension is for r > t");
    if (l < 0 || l > 2) throw ValidationError("extend_dr: order above 2");
    double x = r / t;
    if (x >= 1.0 + sc.b1) return 0.0;
    double d = r - t, u0v = u2(sc, t, t), u1v = u2_dr(sc, t, t, 1), u2v = u2_dr(sc, t, t, 2);
    double P[3] = {u0v + d * u1v + 0.5 * d * d * u2v, u1v + d * u2v, u2v};
    double B[3] = {bump_B1(x, sc.b1), bump_B1(x, sc.b1, 1) / t, bump_B1(x, sc.b1, 2) / (t * t)};
    switch (l) {
        case 0: return P[0] * B[0];
        case 1: return P[1] * B[0] + P[0] * B[1];
        default: return P[2] * B[0] + 2.0 * P[1] * B[1] + P[0] * B[2];
    }
}

double extend_beyond_cone(const SecondCorrection& sc, double t, double r) { return extend_dr(sc, t, r, 0); }

double u2_full(const SecondCorrection& sc, double t, double r) {
    return r <= t ? u2(sc, t, r) : extend_beyond_cone(sc, t, r);
}

}  // namespace blowup
