#include "blowup/residual.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "blowup/profiles.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

namespace {

void check_inside(double t, double r) {
    check_time(t);
    if (r < 0.0 || r > t * (1.0 + 1e-14)) throw DomainError("residual: need 0 <= r <= t");
}

double quintic_diff(double u, double v) {
    // (u + v)^5 - u^5 without cancellation
    double u2 = u * u;
    return v * (5 * u2 * u2 + v * (10 * u2 * u + v * (10 * u2 + v * (5 * u + v))));
}

}  // namespace

E2Parts e2_parts(const SecondCorrection& sc, double t, double r, bool with_v2) {
    check_inside(t, r);
    const auto& fc = sc.fc;
    double lam = lambda_of(sc.params, t), mu = t * lam, R = r * lam, a = std::min(r / t, 1.0);
    double mu2 = mu * mu;
    E2Parts out;
    const CorrectionProfile* fs[2] = {&fc.f1, &fc.f2};
    const OpCoeffs* ops[2] = {&fc.op1, &fc.op2};
    double fval[2];
    for (int j = 0; j < 2; ++j) {
        double h0 = fs[j]->tail_deriv(R, 0), h1 = fs[j]->tail_deriv(R, 1), h2 = fs[j]->tail_deriv(R, 2);
        double Dh = 0.5 * h0 + R * h1, DDh = 0.25 * h0 + 2.0 * R * h1 + R * R * h2;
        out.tails += ops[j]->P0.eval(t) * h0 + ops[j]->P1.eval(t) * Dh + ops[j]->P2.eval(t) * DDh;
        fval[j] = fs[j]->f.eval(R);
    }
    out.tails /= mu2;
    double W0 = W(R);
    double V1 = (fc.omega1.eval(t) * fval[0] + fc.omega2.eval(t) * fval[1]) / mu2;
    out.nonlin_v1 = mu2 * V1 * V1 * (10 * W0 * W0 * W0 + V1 * (10 * W0 * W0 + V1 * (5 * W0 + V1)));
    if (with_v2) {
        double V2 = sc.q1.eval(a, t) / mu + sc.q2.eval(a, t) / mu2;
        out.nonlin_v2 = mu2 * quintic_diff(W0 + V1, V2);
    }
    return out;
}

double e2_normalized(const SecondCorrection& sc, double t, double r, bool with_v2) {
    return e2_parts(sc, t, r, with_v2).total();
}

double e2_analytic(const SecondCorrection& sc, double t, double r, bool with_v2) {
    return std::sqrt(lambda_of(sc.params, t)) / (t * t) * e2_normalized(sc, t, r, with_v2);
}

double e2_finite_difference(const SecondCorrection& sc, double t, double r, double hr_scale, double ht_frac) {
    double lam = lambda_of(sc.params, t);
    double hr = hr_scale * (r + 1.0 / lam), ht = t * ht_frac;
    if (r <= 0.0 || r + 4 * hr > t - 4 * ht) throw DomainError("finite-difference stencil leaves the cone interior");
    // radial fields are even in r, so the stencil may reflect through the origin
    auto w = [&](double tt, double rr) {
        rr = std::abs(rr);
        return v1(sc.fc, tt, rr) + v2(sc, tt, rr);
    };
    static constexpr double c2[5] = {-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
    static constexpr double c1[5] = {0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
    double w0 = w(t, r);
    double wrr = c2[0] * w0, wr = 0.0, wtt = c2[0] * w0;
    for (int k = 1; k < 5; ++k) {
        double p = w(t, r + k * hr), m = w(t, r - k * hr);
        wrr += c2[k] * (p + m);
        wr += c1[k] * (p - m);
        wtt += c2[k] * (w(t + k * ht, r) + w(t - k * ht, r));
    }
    wrr /= hr * hr;
    wr /= hr;
    wtt /= ht * ht;
    double e0 = bulk_error_e0_direct(sc.params, t, r * lam);
    return e0 + wtt - wrr - 2.0 * wr / r - quintic_diff(u0(sc.params, t, r), w0);
}

double e2_fd_agreement(const SecondCorrection& sc, double t, int n) {
    if (n < 2) throw ValidationError("e2_fd_agreement: need n >= 2");
    double lam = lambda_of(sc.params, t), mu = t * lam;
    double lo = 0.01, hi = 0.9 * mu;
    if (!(hi > lo)) throw ValidationError("e2_fd_agreement: mu(t) too small");
    std::vector<std::future<double>> jobs;
    for (int i = 0; i < n; ++i) {
        double r = lo * std::pow(hi / lo, i / (n - 1.0)) / lam;
        jobs.push_back(std::async(std::launch::async, [&sc, t, r] {
            double an = e2_analytic(sc, t, r);
            return std::abs(e2_finite_difference(sc, t, r) - an) / std::abs(an);
        }));
    }
    double worst = 0.0;
    for (auto& j : jobs) worst = std::max(worst, j.get());
    return worst;
}

double e2_extended(const SecondCorrection& sc, double t, double r) {
    if (r < 0.0) throw DomainError("e2_extended: r < 0");
    if (r <= t) return e2_analytic(sc, t, r);
    double lam = lambda_of(sc.params, t), R = r * lam, mu = t * lam;
    auto env = [](double x) { return std::log(x + 2.0) / (x + 1.0); };
    return e2_analytic(sc, t, t) * env(R) / env(mu);
}

double e2_envelope_ratio(const SecondCorrection& sc, double t, double R) {
    double lam = lambda_of(sc.params, t), mu = t * lam;
    double r = std::min(R / lam, t);
    return std::abs(e2_normalized(sc, t, r)) * mu * mu * (R + 1.0) / std::log(R + 2.0);
}

namespace {

SliceReport scan_slice(const SecondCorrection& sc, double t, int n) {
    SliceReport s;
    s.t = t;
    double lam = lambda_of(sc.params, t), mu = t * lam;
    std::vector<double> R(n), v(n);
    R[0] = 0.0;
    double lo = std::min(1e-3, 0.5 * mu);
    for (int i = 1; i < n; ++i) R[i] = lo * std::pow(mu / lo, (i - 1.0) / (n - 2.0));
    R[n - 1] = mu;
    for (int i = 0; i < n; ++i) v[i] = e2_envelope_ratio(sc, t, R[i]);
    std::vector<double> sorted = v;
    std::nth_element(sorted.begin(), sorted.begin() + 9 * n / 10, sorted.end());
    double cut = sorted[9 * n / 10];
    int best = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    s.sup = v[best];
    s.argmax_R = R[best];
    for (int i = 0; i < n; ++i) {
        if (v[i] < cut) continue;
        double a = R[std::max(i - 1, 0)], b = R[std::min(i + 1, n - 1)];
        for (int k = 1; k < 16; ++k) {
            double x = a + (b - a) * k / 16.0;
            double val = e2_envelope_ratio(sc, t, x);
            if (val > s.sup) {
                s.sup = val;
                s.argmax_R = x;
            }
        }
    }
    s.boundary_peak = s.argmax_R <= R[1] || s.argmax_R >= R[n - 2];

    for (int i = 0; i <= 64; ++i) {
        double r = (i / 64.0) / lam;
        s.sup_small_R = std::max(s.sup_small_R, std::abs(e2_normalized(sc, t, std::min(r, t))) * mu * mu);
    }

    // one derivative of the analytic assembly, by central differences
    const double d = 1e-4;
    for (int i = 0; i < 128; ++i) {
        double Rv = 0.01 * std::pow(mu * (1 - 4 * d) / 0.01, i / 127.0);
        double r = Rv / lam;
        double env = std::sqrt(lam) / (t * t) / (mu * mu) * std::log(Rv + 2.0) / (Rv + 1.0);
        double tdt = (e2_analytic(sc, t * (1 + d), r) - e2_analytic(sc, t * (1 - d), r)) / (2 * d);
        double rdr = (e2_analytic(sc, t, r * (1 + d)) - e2_analytic(sc, t, r * (1 - d))) / (2 * d);
        s.sup_tdt = std::max(s.sup_tdt, std::abs(tdt) / env);
        s.sup_rdr = std::max(s.sup_rdr, std::abs(rdr) / env);
    }
    auto [ein, eout] = energies(sc, t);
    s.e_in = ein;
    s.e_out = eout;
    return s;
}

}  // namespace

ResidualReport certify_e2_bound(const SecondCorrection& sc, const std::vector<double>& t_list, int R_resolution) {
    if (t_list.empty()) throw ValidationError("certify: empty time list");
    if (R_resolution < 16) throw ValidationError("certify: R resolution too small");
    for (std::size_t i = 0; i < t_list.size(); ++i) {
        check_time(t_list[i]);
        if (t_list[i] >= sc.params.t0) throw ValidationError("certify: times must lie below t0");
        if (i > 0 && !(t_list[i] < t_list[i - 1])) throw ValidationError("certify: times must decrease");
    }
    std::vector<std::future<SliceReport>> jobs;
    for (double t : t_list)
        jobs.push_back(std::async(std::launch::async, [&sc, t, R_resolution] { return scan_slice(sc, t, R_resolution); }));
    ResidualReport rep;
    rep.bounded = true;
    for (auto& j : jobs) {
        rep.slices.push_back(j.get());
        const auto& s = rep.slices.back();
        rep.sup_bound = std::max(rep.sup_bound, s.sup);
        if (!std::isfinite(s.sup)) rep.bounded = false;
    }
    for (std::size_t i = 0; i < rep.slices.size(); ++i)
        for (std::size_t k = i + 1; k < rep.slices.size(); ++k) {
            if (rep.slices[k].t < rep.slices[i].t / 10 * (1 - 1e-12)) break;
            double q = rep.slices[k].sup / rep.slices[i].sup;
            rep.decade_ratios.push_back(q);
            if (!(q <= 3.0)) rep.bounded = false;
        }
    return rep;
}

EnergyParts energy_parts(const Field& u, const Field& u_r, double t, double r0, double r1, double length_scale) {
    EnergyParts e;
    if (!(r1 > r0) || !(length_scale > 0.0)) return e;
    const GLRule& gl = gauss_legendre(20);
    const double ht = 1e-5 * t;
    double a = r0, w = length_scale;
    while (a < r1) {
        double b = std::min(a + w, r1);
        double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            double r = c + h * gl.x[q];
            double uv = u(t, r), ur = u_r(t, r);
            double ut = (u(t + ht, r) - u(t - ht, r)) / (2 * ht);
            double wq = gl.w[q] * h * r * r;
            e.grad_r += wq * ur * ur;
            e.grad_t += wq * ut * ut;
            e.potential += wq * std::pow(uv, 6);
        }
        a = b;
        w *= 2.0;
    }
    return e;
}

double energy_integral(const Field& u, const Field& u_r, double t, double r0, double r1, double length_scale) {
    return energy_parts(u, u_r, t, r0, r1, length_scale).total();
}

std::pair<EnergyParts, EnergyParts> energy_split(const SecondCorrection& sc, double t) {
    double lam = lambda_of(sc.params, t);
    Field u = [&sc](double tt, double r) { return u2_full(sc, tt, r); };
    Field ur_in = [&sc](double tt, double r) { return u2_dr(sc, tt, r, 1); };
    Field ur_out = [&sc](double tt, double r) { return extend_dr(sc, tt, r, 1); };
    return {energy_parts(u, ur_in, t, 0.0, t, 1.0 / lam),
            energy_parts(u, ur_out, t, t * (1 + 1e-14), (1 + sc.b1) * t, sc.b1 * t / 16)};
}

std::pair<double, double> energies(const SecondCorrection& sc, double t) {
    auto [in, out] = energy_split(sc, t);
    return {in.total(), out.total()};
}

double interior_nonlinear_ratio(const SecondCorrection& sc, double t, int k) {
    if (k < 0 || k > 4) throw ValidationError("interior_nonlinear_ratio: k in 0..4");
    double lam = lambda_of(sc.params, t), mu = t * lam, mu2 = mu * mu;
    double worst = 0.0;
    for (int i = 0; i <= 256; ++i) {
        double R = std::pow(mu, i / 256.0), r = std::min(R / lam, t), a = r / t;
        double V1 = (sc.fc.omega1.eval(t) * sc.fc.f1.f.eval(R) + sc.fc.omega2.eval(t) * sc.fc.f2.f.eval(R)) / mu2;
        double U1 = W(R) + V1;
        double V2 = sc.q1.eval(a, t) / mu + sc.q2.eval(a, t) / mu2;
        worst = std::max(worst, mu2 * std::abs(std::pow(U1, k) * std::pow(V2, 5 - k)) * R * mu2);
    }
    return worst;
}

}  // namespace blowup
