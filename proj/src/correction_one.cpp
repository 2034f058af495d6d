#include "blowup/correction_one.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "blowup/quadrature.hpp"

namespace blowup {

std::size_t PiecewiseCheb::locate(double x) const {
    auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    std::size_t i = (it == breaks.begin()) ? 0 : static_cast<std::size_t>(it - breaks.begin()) - 1;
    return std::min(i, panels.size() - 1);
}

namespace {

using J4 = Jet<4>;

template <class T>
T tail_basis_sum(const std::vector<double>& c, const T& R) {
    using std::log;
    T iR = 1.0 / R, lR = log(R);
    T iR2 = iR * iR;
    return c[0] * iR + c[1] * iR2 + c[2] * iR2 * iR + c[3] * iR2 * iR2 + c[4] * lR * iR + c[5] * lR * iR2 * iR;
}

struct L0Data {
    RadialProfile g;
    PiecewiseCheb I1, I2;
    std::vector<double> series;
    double r_series = 0.0, r_cap = 0.0;
    AsymptoticHead head;
    std::vector<double> tail;

    // derivatives 0..4 of f
    std::array<double, 5> derivs(double R) const {
        std::array<double, 5> out{};
        if (R < r_series) {
            for (int k = 0; k <= 4; ++k) {
                double s = 0.0;
                for (int n = k; n < static_cast<int>(series.size()); ++n) {
                    double fall = 1.0;
                    for (int i = 0; i < k; ++i) fall *= (n - i);
                    s += fall * series[n] * std::pow(R, n - k);
                }
                out[k] = s;
            }
            return out;
        }
        if (R > r_cap) {
            J4 r = J4::var(R);
            J4 v = head.b1 * r + head.b2 + tail_basis_sum(tail, r);
            for (int k = 0; k <= 4; ++k) out[k] = v.d(k);
            return out;
        }
        double i1 = I1.eval(R), i2 = I2.eval(R);
        PJet r = PJet::var(R);
        PJet A = closed::phit1(r), B = closed::phit2(r);
        double Q0 = R * g.fn(R, 0);
        double Q1 = R * g.fn(R, 1) + g.fn(R, 0);
        double Q2 = R * g.fn(R, 2) + 2.0 * g.fn(R, 1);
        double h[5];
        for (int k = 0; k <= 4; ++k) h[k] = A.d(k) * i2 - B.d(k) * i1;
        h[2] += Q0;
        h[3] += Q1;
        h[4] += Q2 + (A.d(3) * B.d(0) - B.d(3) * A.d(0)) * Q0;
        out[0] = h[0] / R;
        for (int k = 1; k <= 4; ++k) out[k] = (h[k] - k * out[k - 1]) / R;
        return out;
    }
};

}  // namespace

double CorrectionProfile::tail_deriv(double R, int k) const {
    if (R > r_cap && k >= 0 && k <= 4) return tail_basis_sum(tail, J4::var(R)).d(k);
    double v = f.eval_deriv(R, k);
    if (k == 0) return v - head.b1 * R - head.b2;
    if (k == 1) return v - head.b1;
    return v;
}

CorrectionProfile solve_L0(const RadialProfile& g, const SolveL0Options& opt) {
    if (opt.r_series <= 0 || opt.r_cap <= opt.r_series || opt.panel_ratio <= 1.0)
        throw ValidationError("solve_L0: bad options");
    auto data = std::make_shared<L0Data>();
    data->g = g;
    data->r_series = opt.r_series;
    data->r_cap = opt.r_cap;

    auto integrand = [&g](double x) {
        double gx = g.fn(x, 0);
        return std::pair<double, double>{closed::phit1(x) * x * gx, closed::phit2(x) * x * gx};
    };
    auto integrate = [&](const GLRule& rule, double a, double b) {
        double c = 0.5 * (a + b), h = 0.5 * (b - a), s1 = 0.0, s2 = 0.0;
        for (std::size_t k = 0; k < rule.x.size(); ++k) {
            auto [u, v] = integrand(c + h * rule.x[k]);
            s1 += rule.w[k] * u;
            s2 += rule.w[k] * v;
        }
        return std::pair<double, double>{s1 * h, s2 * h};
    };
    const GLRule& gl20 = gauss_legendre(20);
    const GLRule& gl30 = gauss_legendre(30);

    std::vector<double> br{opt.r_series};
    while (br.back() < opt.r_cap) br.push_back(std::min(br.back() * opt.panel_ratio, opt.r_cap));

    CorrectionProfile out;
    auto [c1, c2] = integrate(gl30, 0.0, opt.r_series);
    PiecewiseCheb fi;
    fi.breaks = br;
    data->I1.breaks = br;
    data->I2.breaks = br;
    double qerr = 0.0;
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
        double lo = br[p], hi = br[p + 1];
        auto x = lobatto_points(opt.degree, lo, hi);
        std::vector<double> v1(x.size()), v2(x.size()), fv(x.size());
        v1[0] = c1;
        v2[0] = c2;
        for (std::size_t j = 1; j < x.size(); ++j) {
            auto [d1, d2] = integrate(gl20, x[j - 1], x[j]);
            v1[j] = v1[j - 1] + d1;
            v2[j] = v2[j - 1] + d2;
        }
        auto [e1, e2] = integrate(gl30, lo, hi);
        double s1 = v1.back() - c1, s2 = v2.back() - c2;
        qerr = std::max({qerr, std::abs(e1 - s1) / std::max(std::abs(v1.back()), 1e-300),
                         std::abs(e2 - s2) / std::max(std::abs(v2.back()), 1e-300)});
        for (std::size_t j = 0; j < x.size(); ++j)
            fv[j] = (closed::phit1(x[j]) * v2[j] - closed::phit2(x[j]) * v1[j]) / x[j];
        data->I1.panels.push_back(cheb_from_values(v1, lo, hi));
        data->I2.panels.push_back(cheb_from_values(v2, lo, hi));
        fi.panels.push_back(cheb_from_values(fv, lo, hi));
        c1 = v1.back();
        c2 = v2.back();
    }
    if (!std::isfinite(qerr) || qerr > 1e-10)
        throw NumericalError("solve_L0: quadrature not converged, estimate " + std::to_string(qerr));

    // Taylor series at 0: a_{n+2} (n+2)(n+3) + sum v_i a_{n-i} = g_n
    {
        constexpr int K = 8;
        Jet<K> pot = closed::potential(Jet<K>::var(0.0));
        int kg = std::min(g.max_order, 6);
        std::vector<double> gn(kg + 1);
        double fact = 1.0;
        for (int n = 0; n <= kg; ++n) {
            if (n > 0) fact *= n;
            gn[n] = g.fn(0.0, n) / fact;
        }
        std::vector<double> a(kg + 3, 0.0);
        for (int n = 0; n <= kg; ++n) {
            double s = gn[n];
            for (int i = 0; i <= n; ++i) s -= pot.c[i] * a[n - i];
            a[n + 2] = s / ((n + 2.0) * (n + 3.0));
        }
        data->series = a;
    }

    // head fit on [fit_lo, fit_hi]
    {
        const int M = 240, P = 2 + kTailTerms;
        Eigen::MatrixXd A(M, P);
        Eigen::VectorXd y(M);
        auto fval = [&](double R) {
            return (closed::phit1(R) * data->I2.eval(R) - closed::phit2(R) * data->I1.eval(R)) / R;
        };
        for (int i = 0; i < M; ++i) {
            double R = opt.fit_lo * std::pow(opt.fit_hi / opt.fit_lo, i / (M - 1.0));
            double iR = 1.0 / R, l = std::log(R);
            double row[P] = {R, 1.0, iR, iR * iR, iR * iR * iR, iR * iR * iR * iR, l * iR, l * iR * iR * iR};
            for (int j = 0; j < P; ++j) A(i, j) = row[j];
            y(i) = fval(R);
        }
        Eigen::VectorXd scale = A.colwise().maxCoeff().cwiseMax(A.colwise().minCoeff().cwiseAbs());
        Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
        Eigen::VectorXd sol = As.colPivHouseholderQr().solve(y).cwiseQuotient(scale);
        out.fit_residual = (A * sol - y).cwiseAbs().maxCoeff();
        data->head = {sol(0), sol(1)};
        data->tail.assign(sol.data() + 2, sol.data() + P);
    }

    out.head = data->head;
    out.tail = data->tail;
    out.near_zero = data->series.size() > 2 ? data->series[2] : 0.0;
    out.series = data->series;
    out.quad_error = qerr;
    out.r_cap = opt.r_cap;
    out.f_interp = std::move(fi);
    out.f.name = "f[" + g.name + "]";
    out.f.max_order = 4;
    out.f.fn = [data](double R, int k) { return data->derivs(R)[k]; };
    return out;
}

OpCoeffs second_order_coeffs(const AdmissibleFn& omega, const AdmissibleFn& kappa) {
    auto A = [&](const AdmissibleFn& w) { return kappa * w * 2.0 + adm_tdt(w); };
    AdmissibleFn B = (kappa + 1.0) * -1.0;
    AdmissibleFn Aw = A(omega), Bw = B * omega;
    return {A(Aw) - Aw, B * Aw + A(Bw) - Bw, B * Bw};
}

FirstCorrection build_first_correction(const ScalingParams& p, const SolveL0Options& opt) {
    FirstCorrection fc;
    fc.params = p;
    fc.f1 = solve_L0(g1_profile(), opt);
    fc.f2 = solve_L0(g2_profile(), opt);
    double eb = p.eps_tilde(1);
    fc.omega1 = omega1_fn(p, eb);
    fc.omega2 = omega2_fn(p, eb);
    AdmissibleFn k = AdmissibleFn::kappa(p, eb, 40);
    fc.op1 = second_order_coeffs(fc.omega1, k);
    fc.op2 = second_order_coeffs(fc.omega2, k);
    return fc;
}

double v1(const FirstCorrection& fc, double t, double r) {
    if (r < 0.0) throw DomainError("v1: negative radius");
    double l = lambda_of(fc.params, t), mu = t * l, R = r * l;
    return std::sqrt(l) / (mu * mu) * (fc.omega1.eval(t) * fc.f1.f.eval(R) + fc.omega2.eval(t) * fc.f2.f.eval(R));
}

std::pair<AdmissibleFn, AdmissibleFn> leading_error_coeffs(const ScalingParams& p, const AsymptoticHead& h1,
                                                           const AsymptoticHead& h2) {
    auto build = [&](int j) {
        double eb = p.eps_tilde(j);
        AdmissibleFn k = AdmissibleFn::kappa(p, eb, 40);
        OpCoeffs o1 = second_order_coeffs(omega1_fn(p, eb), k);
        OpCoeffs o2 = second_order_coeffs(omega2_fn(p, eb), k);
        // D acts on the head R as 3/2 and on the constant as 1/2
        double d = (j == 1) ? 1.5 : 0.5;
        double b1 = (j == 1) ? h1.b1 : h1.b2;
        double b2 = (j == 1) ? h2.b1 : h2.b2;
        AdmissibleFn m1 = o1.P0 + o1.P1 * d + o1.P2 * (d * d);
        AdmissibleFn m2 = o2.P0 + o2.P1 * d + o2.P2 * (d * d);
        return m1 * b1 + m2 * b2;
    };
    return {build(1), build(2)};
}

}  // namespace blowup
