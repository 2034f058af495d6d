#include "blowup/spectral.hpp"

#include <algorithm>
#include <array>
#include <boost/math/constants/constants.hpp>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <memory>
#include <numeric>

#include "blowup/chebyshev.hpp"
#include "blowup/errors.hpp"
#include "blowup/parallel.hpp"
#include "blowup/quadrature.hpp"
#include "blowup/simd.hpp"

namespace blowup {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 2>;
using cplx = std::complex<double>;
constexpr double kPi = boost::math::constants::pi<double>();

void SpectralConfig::validate() const {
    if (!(ode_tol > 0 && ode_tol < 1e-4)) throw ValidationError("spectral: ode_tol out of range");
    if (!(xi_min > 0 && xi_max > xi_min)) throw ValidationError("spectral: need 0 < xi_min < xi_max");
    if (n_xi < 8) throw ValidationError("spectral: n_xi < 8");
    if (!(R_max > 5 && dR > 0 && dR <= 0.1 && R_max / dR < 1e6)) throw ValidationError("spectral: bad R grid");
    if (!(k_panel > 0 && k_panel <= 1)) throw ValidationError("spectral: k_panel in (0, 1]");
}

double potential_V(double R) {
    double s = 1.0 + R * R / 3.0;
    return 5.0 / (s * s);
}

double far_radius(double xi) { return std::max(60.0, 30.0 / std::sqrt(std::abs(xi))); }

namespace {

struct Sys {
    double xi;
    bool pot;
    void operator()(const State& y, State& dy, double R) const {
        dy[0] = y[1];
        dy[1] = -(xi + (pot ? potential_V(R) : 0.0)) * y[0];
    }
};

// Same equation run toward smaller R: s = R0 - R.
struct SysBack {
    double xi, R0;
    bool pot;
    void operator()(const State& y, State& dy, double s) const {
        double R = R0 - s;
        dy[0] = -y[1];
        dy[1] = (xi + (pot ? potential_V(R) : 0.0)) * y[0];
    }
};

template <class S, class Obs>
void run(const S& sys, State& y, std::vector<double>& times, double tol, double scale, Obs obs) {
    auto stepper = ode::make_controlled(tol * scale, tol, ode::runge_kutta_fehlberg78<State>());
    double dt = std::min(1e-3, (times.size() > 1 ? times[1] - times[0] : 1e-3));
    if (dt <= 0) dt = 1e-3;
    try {
        ode::integrate_times(stepper, sys, y, times.begin(), times.end(), dt, obs, ode::max_step_checker(2000000));
    } catch (const std::runtime_error& e) {
        throw NumericalError(std::string("spectral ODE: step-size failure: ") + e.what());
    }
}

double amp_scale(double xi) { return std::min(1.0, 1.0 / std::sqrt(std::abs(xi) + 1e-300)); }

// phi, phi' at ascending R (R >= 0)
PhiSamples shoot(double xi, const std::vector<double>& R, const SpectralConfig& cfg) {
    PhiSamples out;
    out.phi.resize(R.size());
    out.dphi.resize(R.size());
    if (R.empty()) return out;
    for (std::size_t i = 1; i < R.size(); ++i)
        if (!(R[i] > R[i - 1])) throw ValidationError("eigenfunction: R must be strictly ascending");
    if (R[0] < 0) throw ValidationError("eigenfunction: R < 0");
    std::vector<double> times;
    times.reserve(R.size() + 1);
    std::size_t off = 0;
    if (R[0] > 0) {
        times.push_back(0.0);
        off = 1;
    }
    times.insert(times.end(), R.begin(), R.end());
    State y{0.0, 1.0};
    if (times.size() == 1) {
        out.phi[0] = 0.0;
        out.dphi[0] = 1.0;
        return out;
    }
    std::size_t idx = 0;
    run(Sys{xi, cfg.potential}, y, times, cfg.ode_tol, amp_scale(xi), [&](const State& s, double) {
        if (idx >= off) {
            out.phi[idx - off] = s[0];
            out.dphi[idx - off] = s[1];
        }
        ++idx;
    });
    return out;
}

Amplitude amplitude_from(double xi, double Rf, double p, double dp, bool pot) {
    double k = std::sqrt(xi);
    Amplitude A;
    A.R_far = Rf;
    // a e^{ikR} = (phi + phi'/(ik)) / 2
    A.a = std::exp(cplx(0.0, -k * Rf)) * cplx(p, -dp / k) * 0.5;
    A.match_error = pot ? potential_V(Rf) / xi : 0.0;
    return A;
}

double rho_from(double xi, cplx a) { return 1.0 / (4.0 * kPi * std::norm(a) * std::sqrt(xi)); }

double decay_functional_tol(double xi, const SpectralConfig& cfg, double tol) {
    if (!(xi < 0)) throw DomainError("decay functional: need xi < 0");
    double k = std::sqrt(-xi), Rf = far_radius(xi);
    SpectralConfig c = cfg;
    c.ode_tol = tol;
    auto s = shoot(xi, {Rf}, c);
    double p = s.phi[0], dp = s.dphi[0];
    return (dp + k * p) / std::hypot(p, dp);
}

double bracket_root(double lo, double hi, const SpectralConfig& cfg, double tol) {
    auto f = [&](double x) { return decay_functional_tol(x, cfg, tol); };
    double flo = f(lo), fhi = f(hi);
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), it);
    return 0.5 * (r.first + r.second);
}

// Uniform R grid with trapezoid weights.
void make_R_grid(const SpectralConfig& cfg, std::vector<double>& R, std::vector<double>& w) {
    std::size_t n = static_cast<std::size_t>(std::llround(cfg.R_max / cfg.dR)) + 1;
    double h = cfg.R_max / static_cast<double>(n - 1);
    R.resize(n);
    w.assign(n, h);
    for (std::size_t i = 0; i < n; ++i) R[i] = h * static_cast<double>(i);
    w.front() = w.back() = 0.5 * h;
}

double japanese(double x) { return std::sqrt(1.0 + x * x); }

}  // namespace

PhiSamples eigenfunction(double xi, const std::vector<double>& R, const SpectralConfig& cfg) {
    if (!std::isfinite(xi)) throw ValidationError("eigenfunction: xi not finite");
    return shoot(xi, R, cfg);
}

Amplitude match_amplitude(double xi, const SpectralConfig& cfg) {
    if (!(xi > 0)) throw DomainError("match_amplitude: need xi > 0");
    double Rf = far_radius(xi);
    auto s = shoot(xi, {Rf}, cfg);
    return amplitude_from(xi, Rf, s.phi[0], s.dphi[0], cfg.potential);
}

double spectral_density(double xi, const SpectralConfig& cfg) {
    if (!(xi > 0)) return 0.0;
    return rho_from(xi, match_amplitude(xi, cfg).a);
}

double decay_functional(double xi, const SpectralConfig& cfg) { return decay_functional_tol(xi, cfg, cfg.ode_tol); }

int BoundState::agreement_digits() const {
    double rel = std::abs(xi_d - xi_d_coarse) / std::abs(xi_d);
    if (rel == 0) return 16;
    return static_cast<int>(std::floor(-std::log10(rel)));
}

BoundState find_xi_d(const SpectralConfig& cfg) {
    cfg.validate();
    if (!cfg.potential) throw ValidationError("find_xi_d: the free problem has no bound state");
    BoundState B;
    const int n = 400;
    std::vector<double> grid(n), val(n);
    for (int i = 0; i < n; ++i) grid[i] = -25.0 * std::pow(1e-3 / 25.0, i / double(n - 1));
    parallel_for(n, [&](std::size_t i) { val[i] = decay_functional(grid[i], cfg); });
    int first = -1;
    for (int i = 0; i + 1 < n; ++i)
        if ((val[i] < 0) != (val[i + 1] < 0)) {
            ++B.sign_changes;
            if (first < 0) first = i;
        }
    if (first < 0) throw ValidationError("find_xi_d: no sign change of the decay functional on (-25, 0)");
    B.xi_d = bracket_root(grid[first], grid[first + 1], cfg, cfg.ode_tol);
    B.xi_d_coarse = bracket_root(grid[first], grid[first + 1], cfg, cfg.ode_tol * 100);

    // forward solution up to R_m, decaying solution integrated back from far out beyond it
    double k = std::sqrt(-B.xi_d);
    std::vector<double> R, w;
    make_R_grid(cfg, R, w);
    B.R = R;
    B.phi_d.assign(R.size(), 0.0);
    const double Rm = 3.0;
    std::size_t im = 0;
    while (im + 1 < R.size() && R[im + 1] <= Rm) ++im;
    std::vector<double> head(R.begin(), R.begin() + im + 1);
    auto fw = shoot(B.xi_d, head, cfg);
    for (std::size_t i = 0; i <= im; ++i) B.phi_d[i] = fw.phi[i];

    double Rbig = std::max(cfg.R_max, 40.0 / k) + 10.0;
    std::vector<double> s_times{0.0};
    for (std::size_t i = R.size(); i-- > im;) s_times.push_back(Rbig - R[i]);
    State y{1.0, -k};
    std::vector<double> back(R.size(), 0.0), dback(R.size(), 0.0);
    std::size_t idx = 0;
    run(SysBack{B.xi_d, Rbig, true}, y, s_times, cfg.ode_tol, 1e-300, [&](const State& s, double) {
        if (idx > 0) {
            std::size_t i = R.size() - idx;
            back[i] = s[0];
            dback[i] = s[1];
        }
        ++idx;
    });
    double c = fw.phi[im] / back[im];
    for (std::size_t i = im + 1; i < R.size(); ++i) B.phi_d[i] = c * back[i];
    double slope_mismatch = std::abs(fw.dphi[im] - c * dback[im]) / std::abs(fw.dphi[im]);
    if (!(slope_mismatch < 1e-5)) throw NumericalError("find_xi_d: bound state splice mismatch");

    B.norm2 = 0.0;
    for (std::size_t i = 0; i < R.size(); ++i) B.norm2 += w[i] * B.phi_d[i] * B.phi_d[i];
    B.decay_const = std::abs(B.phi_d.back()) * std::exp(k * R.back());
    std::size_t mid = R.size() / 2;
    B.decay_const_mid = std::abs(B.phi_d[mid]) * std::exp(k * R[mid]);
    return B;
}

double SpectralData::rho_at(double x) const {
    if (!(x > 0)) return 0.0;
    const double lo = xi.front(), hi = xi.back();
    if (x < lo) return rho.front() * std::sqrt(lo / x);
    if (x > hi) return rho.back() * std::sqrt(x / hi);
    return std::exp(log_rho(std::log(x)));
}

void SpectralData::refresh_spline() {
    std::vector<double> lr(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) lr[i] = std::log(rho[i]);
    double h = (std::log(xi.back()) - std::log(xi.front())) / double(rho.size() - 1);
    auto sp = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(lr.data(), lr.size(),
                                                                                          std::log(xi.front()), h);
    log_rho = [sp](double u) { return (*sp)(u); };
}

SpectralData build_spectral(const SpectralConfig& cfg) {
    cfg.validate();
    SpectralData sd;
    sd.cfg = cfg;
    if (cfg.potential) sd.bound = find_xi_d(cfg);

    // density table on the log grid
    int n = cfg.n_xi;
    sd.xi.resize(n);
    sd.rho.resize(n);
    sd.a_amp.resize(n);
    for (int i = 0; i < n; ++i) sd.xi[i] = cfg.xi_min * std::pow(cfg.xi_max / cfg.xi_min, i / double(n - 1));
    parallel_for(n, [&](std::size_t i) {
        auto A = match_amplitude(sd.xi[i], cfg);
        sd.a_amp[i] = A.a;
        sd.rho[i] = rho_from(sd.xi[i], A.a);
    });
    sd.refresh_spline();

    make_R_grid(cfg, sd.R, sd.wR);
    if (!cfg.potential) {
        sd.bound.R = sd.R;
        sd.bound.phi_d.assign(sd.R.size(), 0.0);
    }

    // k nodes: Gauss-Legendre panels on [0, sqrt(xi_max)]; rho dxi = 2 k rho dk is regular at 0
    const auto& gl = gauss_legendre(8);
    double kmax = std::sqrt(cfg.xi_max);
    int panels = static_cast<int>(std::ceil(kmax / cfg.k_panel));
    double hp = kmax / panels;
    std::vector<double> glw;
    for (int p = 0; p < panels; ++p)
        for (std::size_t j = 0; j < gl.x.size(); ++j) {
            sd.k.push_back(hp * (p + 0.5 + 0.5 * gl.x[j]));
            glw.push_back(0.5 * hp * gl.w[j]);
        }
    std::size_t nk = sd.k.size(), nR = sd.R.size();
    sd.rho_k.resize(nk);
    sd.wk.resize(nk);
    sd.phi.assign(nk * nR, 0.0);
    parallel_for(nk, [&](std::size_t j) {
        double kk = sd.k[j], x = kk * kk, Rf = far_radius(x);
        std::vector<double> times(sd.R.begin(), sd.R.end());
        if (Rf > times.back()) times.push_back(Rf);
        auto s = shoot(x, times, cfg);
        std::copy(s.phi.begin(), s.phi.begin() + nR, sd.phi.begin() + j * nR);
        std::size_t last = times.size() - 1;
        double pf = s.phi[last], dpf = s.dphi[last];
        if (Rf <= sd.R.back()) {
            auto t2 = shoot(x, {Rf}, cfg);
            pf = t2.phi[0];
            dpf = t2.dphi[0];
        }
        sd.rho_k[j] = rho_from(x, amplitude_from(x, Rf, pf, dpf, cfg.potential).a);
        sd.wk[j] = glw[j] * 2.0 * kk * sd.rho_k[j];
    });
    sd.phiT.assign(nR * nk, 0.0);
    for (std::size_t j = 0; j < nk; ++j)
        for (std::size_t i = 0; i < nR; ++i) sd.phiT[i * nk + j] = sd.phi[j * nR + i];
    return sd;
}

Transform forward_transform(const SpectralData& sd, const std::vector<double>& f) {
    if (f.size() != sd.R.size()) throw ValidationError("forward_transform: f must live on the R grid");
    std::vector<double> fw(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) fw[i] = sd.wR[i] * f[i];
    Transform F;
    F.f_c.resize(sd.k.size());
    simd::matvec(sd.phi.data(), sd.k.size(), sd.R.size(), fw.data(), F.f_c.data());
    F.f_d = sd.cfg.potential ? simd::dot(sd.bound.phi_d.data(), fw.data(), fw.size()) : 0.0;
    double all = 0, tail = 0;
    std::size_t per = 8, nk = sd.k.size();
    for (std::size_t j = 0; j < nk; ++j) {
        double e = sd.wk[j] * F.f_c[j] * F.f_c[j];
        all += e;
        if (j + per >= nk) tail += e;
    }
    F.truncation = all > 0 ? std::sqrt(tail / all) : 0.0;
    return F;
}

std::vector<double> inverse_transform(const SpectralData& sd, const Transform& F) {
    if (F.f_c.size() != sd.k.size()) throw ValidationError("inverse_transform: size mismatch");
    std::vector<double> c(sd.k.size()), out(sd.R.size());
    for (std::size_t j = 0; j < c.size(); ++j) c[j] = sd.wk[j] * F.f_c[j];
    simd::matvec(sd.phiT.data(), sd.R.size(), sd.k.size(), c.data(), out.data());
    if (sd.cfg.potential) {
        double s = F.f_d / sd.bound.norm2;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * sd.bound.phi_d[i];
    }
    return out;
}

double spectral_inner(const SpectralData& sd, const Transform& F, const Transform& G) {
    double s = sd.cfg.potential ? F.f_d * G.f_d / sd.bound.norm2 : 0.0;
    for (std::size_t j = 0; j < sd.k.size(); ++j) s += sd.wk[j] * F.f_c[j] * G.f_c[j];
    return s;
}

double diagonalization_error(const SpectralData& sd, const std::vector<double>& f) {
    static constexpr double c2[5] = {-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
    std::size_t n = f.size();
    if (n != sd.R.size()) throw ValidationError("diagonalization_error: f must live on the R grid");
    double h = sd.R[1] - sd.R[0];
    // odd reflection at 0, zero beyond R_max
    auto at = [&](long i) -> double {
        if (i < 0) return -f[static_cast<std::size_t>(-i)];
        if (i >= static_cast<long>(n)) return 0.0;
        return f[static_cast<std::size_t>(i)];
    };
    std::vector<double> Lf(n);
    for (std::size_t i = 0; i < n; ++i) {
        long li = static_cast<long>(i);
        double d2 = c2[0] * f[i];
        for (int m = 1; m < 5; ++m) d2 += c2[m] * (at(li + m) + at(li - m));
        Lf[i] = -d2 / (h * h) - (sd.cfg.potential ? potential_V(sd.R[i]) : 0.0) * f[i];
    }
    auto A = forward_transform(sd, Lf), B = forward_transform(sd, f);
    double num = 0, den = 0;
    for (std::size_t j = 0; j < sd.k.size(); ++j) {
        double xb = sd.k[j] * sd.k[j] * B.f_c[j];
        num += sd.wk[j] * (A.f_c[j] - xb) * (A.f_c[j] - xb);
        den += sd.wk[j] * xb * xb;
    }
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

double round_trip_error(const SpectralData& sd, const std::vector<double>& f) {
    auto g = inverse_transform(sd, forward_transform(sd, f));
    double num = 0, den = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        num += sd.wR[i] * (g[i] - f[i]) * (g[i] - f[i]);
        den += sd.wR[i] * f[i] * f[i];
    }
    return den > 0 ? std::sqrt(num / den) : 0.0;
}

// ---- parametrix ----

namespace {

KernelValues kernels_with(const SpectralData& sd, double ktau, double ksig, double dt, double tau, double sigma,
                          double xi) {
    KernelValues K;
    double w = ktau / ksig;
    double amp = std::pow(w, 1.5) * std::sqrt(sd.rho_at(w * w * xi) / sd.rho_at(xi));
    double ph = ktau * std::sqrt(xi) * dt;
    K.H_c = amp * std::sin(ph) / std::sqrt(xi);
    K.H_hat_c = amp * std::cos(ph);
    if (sd.cfg.potential) {
        double q = std::sqrt(std::abs(sd.xi_d()));
        K.H_d = -0.5 / q * std::exp(-q * std::abs(tau - sigma));
    }
    return K;
}

}  // namespace

KernelValues parametrix_kernels(const SpectralData& sd, const TauMap& tm, double tau, double sigma, double xi) {
    if (!(tau >= 0 && sigma >= tau)) throw DomainError("parametrix: need 0 <= tau <= sigma");
    if (!(xi > 0)) throw DomainError("parametrix: need xi > 0");
    double tt = tm.t_of(tau), ts = tm.t_of(sigma);
    const auto& p = tm.params();
    return kernels_with(sd, lambda_of(p, tt), lambda_of(p, ts), tt - ts, tau, sigma, xi);
}

ParBoundReport parbound_scan(const SpectralData& sd, const TauMap& tm, double tau_lo, double tau_hi,
                             double sigma_ratio, double xi_lo, double xi_hi, int n) {
    if (!(tau_lo > 0 && tau_hi > tau_lo && sigma_ratio > 1 && xi_lo > 0 && xi_hi > xi_lo && n >= 2))
        throw ValidationError("parbound_scan: bad lattice");
    auto logspace = [n](double a, double b, int i) { return a * std::pow(b / a, i / double(n - 1)); };
    const auto& p = tm.params();
    double nu = p.nu, e = 1.0 + 1.0 / nu;
    ParBoundReport rep;
    for (int i = 0; i < n; ++i) {
        double tau = logspace(tau_lo, tau_hi, i), tt = tm.t_of(tau), kt = lambda_of(p, tt);
        for (int j = 0; j < n; ++j) {
            double sigma = tau * logspace(1.0, sigma_ratio, j), ts = tm.t_of(sigma), ks = lambda_of(p, ts);
            double w = std::pow(tau / sigma, e);
            for (int l = 0; l < n; ++l) {
                double xi = logspace(xi_lo, xi_hi, l);
                auto K = kernels_with(sd, kt, ks, tt - ts, tau, sigma, xi);
                double b1 = w / std::sqrt(xi), b2 = nu * w * sigma;
                double h = std::abs(K.H_c);
                rep.C_xi = std::max(rep.C_xi, h / b1);
                rep.C_sigma = std::max(rep.C_sigma, h / b2);
                rep.C_min = std::max(rep.C_min, h / std::min(b1, b2));
                rep.C_hat = std::max(rep.C_hat, std::abs(K.H_hat_c) / w);
                ++rep.points;
            }
        }
    }
    return rep;
}

// ---- singular integrals ----

double cutoff(double x) {
    x = std::abs(x);
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    auto psi = [](double y) { return y > 0 ? std::exp(-1.0 / y) : 0.0; };
    double a = psi(2.0 - x), b = psi(x - 1.0);
    return a / (a + b);
}

double truncated_hilbert_at(int n, const RealFn& f, double xi, const HilbertOptions& opt) {
    if (opt.truncated && n < 1) throw ValidationError("truncated_hilbert: n >= 1");
    if (!(xi > 0)) return 0.0;
    double smax;
    std::vector<double> cuts{0.0};
    if (opt.truncated) {
        if (n <= 2) throw ValidationError("truncated_hilbert: n > 2");
        smax = 2.0 * xi / (n - 2.0);
        for (double c : {1.0, 2.0}) {
            cuts.push_back(xi - xi / (1.0 + c / n));
            cuts.push_back(xi / (1.0 - c / n) - xi);
        }
    } else {
        if (!(opt.window > 0)) throw ValidationError("untruncated PV needs a window");
        smax = opt.window;
    }
    for (double b : opt.breaks) {
        double d = std::abs(b - xi);
        if (d > 0 && d < smax) cuts.push_back(d);
    }
    cuts.push_back(smax);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [smax](double c) { return c > smax; }), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto K = [&](double eta) -> double {
        if (eta <= 0) return 0.0;
        if (!opt.truncated) return f(eta);
        double c = cutoff(n * (xi / eta - 1.0));
        return c == 0.0 ? 0.0 : c * f(eta);
    };
    // symmetric pairing: int_0^smax [K(xi - s) - K(xi + s)] / s ds
    auto g = [&](double s) { return (K(xi - s) - K(xi + s)) / s; };
    const auto& gl = gauss_legendre(20);
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double a = cuts[c], b = cuts[c + 1];
        if (b <= a) continue;
        int m = 1;
        if (opt.scale > 0) m = std::max(1, static_cast<int>(std::ceil((b - a) / opt.scale)));
        m = std::max(m, 4);
        double h = (b - a) / m;
        for (int i = 0; i < m; ++i) total += gl_integrate(gl, a + i * h, a + (i + 1) * h, g);
    }
    return total;
}

std::vector<double> truncated_hilbert(int n, const RealFn& f, const std::vector<double>& xi,
                                      const HilbertOptions& opt) {
    std::vector<double> out(xi.size());
    parallel_for(xi.size(), [&](std::size_t i) { out[i] = truncated_hilbert_at(n, f, xi[i], opt); });
    return out;
}

std::vector<double> truncated_hilbert(int n, const std::vector<double>& eta, const std::vector<double>& f,
                                      const std::vector<double>& xi) {
    if (eta.size() != f.size() || eta.size() < 2) throw ValidationError("truncated_hilbert: bad samples");
    double hmin = 1e300;
    for (std::size_t i = 1; i < eta.size(); ++i) {
        if (!(eta[i] > eta[i - 1])) throw ValidationError("truncated_hilbert: eta must ascend");
        hmin = std::min(hmin, eta[i] - eta[i - 1]);
    }
    RealFn lin = [&](double x) {
        if (x < eta.front() || x > eta.back()) return 0.0;
        auto it = std::upper_bound(eta.begin(), eta.end(), x);
        std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - eta.begin()), eta.size() - 1);
        if (i == 0) i = 1;
        double u = (x - eta[i - 1]) / (eta[i] - eta[i - 1]);
        return (1 - u) * f[i - 1] + u * f[i];
    };
    HilbertOptions opt;
    opt.scale = hmin;
    opt.breaks = {eta.front(), eta.back()};
    // PV needs the window resolved by the samples
    for (double x : xi)
        if (x > 0 && 2.0 * x / (n - 2.0) < 2.0 * hmin)
            throw NumericalError("truncated_hilbert: grid too coarse to resolve the diagonal window");
    return truncated_hilbert(n, lin, xi, opt);
}

double hilbert_norm_ratio(int n, const RealFn& f, double q, double lo, double hi, int points,
                          const HilbertOptions& opt) {
    if (!(q > 1) || points < 8 || !(hi > lo)) throw ValidationError("hilbert_norm_ratio: bad arguments");
    std::vector<double> x(points);
    for (int i = 0; i < points; ++i) x[i] = lo + (hi - lo) * i / double(points - 1);
    auto Hf = truncated_hilbert(n, f, x, opt);
    double a = 0, b = 0;
    for (int i = 0; i < points; ++i) {
        double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
        a += w * std::pow(std::abs(Hf[i]), q);
        b += w * std::pow(std::abs(f(x[i])), q);
    }
    if (b == 0) throw ValidationError("hilbert_norm_ratio: f vanishes on the grid");
    return std::pow(a / b, 1.0 / q);
}

KernelSplit split_kernel(const std::vector<double>& xi, const std::vector<double>& eta, const std::vector<double>& K,
                         int n0) {
    if (K.size() != xi.size() * eta.size()) throw ValidationError("split_kernel: K must be xi.size() x eta.size()");
    if (n0 < 1) throw ValidationError("split_kernel: n0 >= 1");
    KernelSplit S;
    S.K_d.resize(K.size());
    S.K_nd.resize(K.size());
    for (std::size_t i = 0; i < xi.size(); ++i)
        for (std::size_t j = 0; j < eta.size(); ++j) {
            std::size_t ij = i * eta.size() + j;
            double c = eta[j] > 0 ? cutoff(n0 * (xi[i] / eta[j] - 1.0)) : 0.0;
            S.K_d[ij] = c * K[ij];
            S.K_nd[ij] = K[ij] - S.K_d[ij];
        }
    return S;
}

// ---- norms ----

void NormParams::validate() const {
    if (!(p > 1)) throw ValidationError("norms: need p > 1");
    if (!(delta > 0 && delta < 0.125)) throw ValidationError("norms: need 0 < delta < 1/8");
    if (!(xi_lo > 0 && xi_hi > xi_lo && n >= 8)) throw ValidationError("norms: bad xi grid");
}

namespace {

// trapezoid in log xi
template <class F>
double log_trapz(const NormParams& np, F&& g) {
    double h = (std::log(np.xi_hi) - std::log(np.xi_lo)) / (np.n - 1), s = 0;
    for (int i = 0; i < np.n; ++i) {
        double x = np.xi_lo * std::exp(h * i), w = (i == 0 || i == np.n - 1) ? 0.5 : 1.0;
        s += w * x * g(x);
    }
    return s * h;
}

}  // namespace

double norm_X(const SpectralData& sd, const RealFn& f, const NormParams& np) {
    np.validate();
    double lp = log_trapz(np, [&](double x) { return std::pow(std::abs(std::pow(x / japanese(x), 0.5 - np.delta) * f(x)), np.p); });
    double l2 = log_trapz(np, [&](double x) {
        double v = std::sqrt(x) * std::pow(japanese(x), 0.125) * f(x);
        return v * v * sd.rho_at(x);
    });
    return std::pow(lp, 1.0 / np.p) + std::sqrt(l2);
}

double norm_Y(const SpectralData& sd, const RealFn& f, const NormParams& np) {
    np.validate();
    double lp = log_trapz(np, [&](double x) { return std::pow(std::abs(f(x)), np.p); });
    double l2 = log_trapz(np, [&](double x) {
        double v = std::pow(japanese(x), 0.125) * f(x);
        return v * v * sd.rho_at(x);
    });
    return std::pow(lp, 1.0 / np.p) + std::sqrt(l2);
}

double spacetime_norm(const std::vector<double>& tau, const std::vector<double>& slice_norms, double beta,
                      double tau0) {
    if (tau.size() != slice_norms.size()) throw ValidationError("spacetime_norm: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i)
        if (tau[i] > tau0) s = std::max(s, std::pow(tau[i], beta) * slice_norms[i]);
    return s;
}

// ---- inhomogeneous term ----

namespace {

struct Panels {
    std::vector<ChebSeries<double>> p;
    double eval(double R) const {
        if (p.empty() || R < p.front().a || R > p.back().b) return 0.0;
        auto it = std::upper_bound(p.begin(), p.end(), R, [](double x, const ChebSeries<double>& s) { return x < s.a; });
        std::size_t i = it == p.begin() ? 0 : static_cast<std::size_t>(it - p.begin()) - 1;
        return p[i].eval(R);
    }
};

Panels build_panels(const std::function<double(double)>& g, double mu, double cut, double L) {
    std::vector<double> br{0.0, 0.5};
    for (double x = 0.75; x < L; x *= 1.5) br.push_back(x);
    if (mu < L) {
        for (int j = 1; j <= 40; ++j) br.push_back(mu * (1.0 - std::ldexp(1.0, -j)));
        br.push_back(mu);
        for (int j = 1; j <= 10; ++j) br.push_back(mu * (1.0 + std::ldexp(1.0, -j)));
    }
    for (int j = 0; j <= 16; ++j) br.push_back(cut * (1.0 + j / 16.0));
    br.push_back(L);
    std::sort(br.begin(), br.end());
    std::vector<double> u;
    for (double x : br) {
        if (x < 0 || x > L) continue;
        if (!u.empty() && x - u.back() <= 1e-12 * std::max(1.0, x)) continue;
        u.push_back(x);
    }
    Panels P;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        auto pts = lobatto_points(24, u[i], u[i + 1]);
        std::vector<double> v(pts.size());
        for (std::size_t m = 0; m < pts.size(); ++m) v[m] = g(pts[m]);
        P.p.push_back(cheb_from_values(v, u[i], u[i + 1]));
    }
    return P;
}

// int_a^b p(R) e^{ikR} dR for one polynomial piece
cplx osc_piece(const ChebSeries<double>& p, double a, double b, double k) {
    const auto& gl = gauss_legendre(20);
    double L = b - a;
    if (k * L <= 32.0) {
        int m = std::max(1, static_cast<int>(std::ceil(k * L / 4.0)));
        double h = L / m;
        cplx s = 0;
        for (int i = 0; i < m; ++i)
            s += gl_integrate(gl, a + i * h, a + (i + 1) * h,
                              [&](double R) { return p.eval(R) * std::exp(cplx(0.0, k * R)); });
        return s;
    }
    // repeated integration by parts, stopped at the smallest term
    cplx ea = std::exp(cplx(0.0, k * a)), eb = std::exp(cplx(0.0, k * b));
    cplx ik(0.0, k), fac = 1.0 / ik, s = 0;
    ChebSeries<double> d = p;
    double prev = 1e300;
    for (int j = 0; j < 12; ++j) {
        cplx term = fac * (d.eval(b) * eb - d.eval(a) * ea);
        double mag = std::abs(term);
        if (mag > prev) break;
        s += term;
        prev = mag;
        if (mag == 0.0) break;
        d = d.derivative();
        fac *= -1.0 / ik;
    }
    return s;
}

// U g(xi) for xi > 0: ODE values up to R_far, matched asymptotics beyond
double transform_panels(const Panels& P, double xi, double L, const SpectralConfig& cfg) {
    double k = std::sqrt(xi), Rm = std::min(far_radius(xi), L);
    const auto& gl = gauss_legendre(20);
    std::vector<double> nodes, wts, gv;
    for (const auto& pc : P.p) {
        double a = pc.a, b = std::min(pc.b, Rm);
        if (b <= a) break;
        int m = std::max(1, static_cast<int>(std::ceil(k * (b - a) / 4.0)));
        double h = (b - a) / m;
        for (int i = 0; i < m; ++i) {
            double c = a + (i + 0.5) * h;
            for (std::size_t q = 0; q < gl.x.size(); ++q) {
                double R = c + 0.5 * h * gl.x[q];
                nodes.push_back(R);
                wts.push_back(0.5 * h * gl.w[q]);
                gv.push_back(pc.eval(R));
            }
        }
    }
    double near = 0.0;
    if (!nodes.empty()) {
        auto s = shoot(xi, nodes, cfg);
        for (std::size_t i = 0; i < nodes.size(); ++i) near += wts[i] * s.phi[i] * gv[i];
    }
    if (Rm >= L) return near;
    auto A = match_amplitude(xi, cfg);
    cplx far = 0;
    for (const auto& pc : P.p) {
        double a = std::max(pc.a, Rm), b = pc.b;
        if (b <= a) continue;
        far += osc_piece(pc, a, b, k);
    }
    return near + 2.0 * std::real(A.a * far);
}

}  // namespace

InhomogReport inhomog_decay(const Residual& e2, const SpectralData& sd, const TauMap& tm,
                            const std::vector<double>& tau_list, int n_xi, double xi_lo) {
    if (tau_list.size() < 2) throw ValidationError("inhomog_decay: need at least two slices");
    if (n_xi < 2) throw ValidationError("inhomog_decay: n_xi >= 2");
    for (std::size_t i = 0; i < tau_list.size(); ++i)
        if (!(tau_list[i] > 0) || (i > 0 && !(tau_list[i] > tau_list[i - 1])))
            throw ValidationError("inhomog_decay: tau list must be positive and increasing");
    const auto& p = tm.params();
    InhomogReport rep;
    rep.target = 3.0 - 0.5 * (1.0 + 1.0 / p.nu) - 0.3;
    if (xi_lo <= 0) xi_lo = std::min(sd.cfg.xi_min, 0.01 / std::pow(2.0 * p.nu * tau_list.back(), 2));
    if (!(xi_lo < sd.cfg.xi_max)) throw ValidationError("inhomog_decay: xi_lo >= xi_max");
    std::vector<double> xs(n_xi);
    for (int i = 0; i < n_xi; ++i) xs[i] = xi_lo * std::pow(sd.cfg.xi_max / xi_lo, i / double(n_xi - 1));

    for (double tau : tau_list) {
        InhomogSlice S;
        S.tau = tau;
        S.t = tm.t_of(tau);
        S.kappa = lambda_of(p, S.t);
        double kap = S.kappa, cut = p.nu * tau, L = 2.0 * cut, mu = S.t * kap;
        auto g = [&](double R) {
            double c = cutoff(R / cut);
            if (c == 0.0 || R == 0.0) return 0.0;
            return R * c * e2(S.t, R / kap) / (kap * kap);
        };
        Panels P = build_panels(g, mu, cut, L);
        if (sd.cfg.potential) {
            double s = 0;
            for (std::size_t i = 0; i < sd.R.size() && sd.R[i] <= L; ++i) s += sd.wR[i] * sd.bound.phi_d[i] * P.eval(sd.R[i]);
            S.u_d = s;
        }
        S.xi = xs;
        S.u_c.assign(n_xi, 0.0);
        parallel_for(n_xi, [&](std::size_t i) { S.u_c[i] = transform_panels(P, xs[i], L, sd.cfg); });
        for (int i = 0; i < n_xi; ++i) S.envelope = std::max(S.envelope, std::abs(S.u_c[i]) * japanese(xs[i]));
        S.size = std::max(std::abs(S.u_d), S.envelope);
        rep.slices.push_back(std::move(S));
    }

    auto fit = [&](auto get, double& slope, double* rms) {
        std::vector<double> x, y;
        for (const auto& s : rep.slices)
            if (get(s) > 0) {
                x.push_back(std::log(s.tau));
                y.push_back(std::log(get(s)));
            }
        if (x.size() < 2) {
            slope = 0;
            if (rms) *rms = 0;
            return false;
        }
        double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size(), my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
        }
        slope = sxy / sxx;
        if (rms) {
            double r = 0;
            for (std::size_t i = 0; i < x.size(); ++i) r += std::pow(y[i] - my - slope * (x[i] - mx), 2);
            *rms = std::sqrt(r / x.size());
        }
        return true;
    };
    double s1 = 0, s2 = 0;
    bool nonzero = fit([](const InhomogSlice& s) { return s.size; }, s1, &rep.fit_rms);
    fit([](const InhomogSlice& s) { return std::abs(s.u_d); }, s2, nullptr);
    rep.exponent = -s1;
    rep.exponent_d = -s2;
    bool finite = true;
    for (const auto& s : rep.slices) finite = finite && std::isfinite(s.envelope) && std::isfinite(s.u_d);
    rep.pass = finite && (!nonzero || rep.exponent >= rep.target);
    return rep;
}

}  // namespace blowup
