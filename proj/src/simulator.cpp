#include "blowup/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "blowup/errors.hpp"
#include "blowup/parallel.hpp"
#include "blowup/profiles.hpp"
#include "blowup/residual.hpp"
#include "blowup/simd.hpp"
#include "blowup/spectral.hpp"

namespace blowup {

void SimConfig::validate() const {
    if (!(tau0 >= 0 && tau1 > tau0)) throw ValidationError("simulate: need 0 <= tau0 < tau1");
    if (!(dR > 0 && dR <= 1)) throw ValidationError("simulate: dR in (0, 1]");
    if (!(cfl > 0 && cfl <= 0.5)) throw ValidationError("simulate: cfl in (0, 0.5]");
    if (dtau < 0) throw ValidationError("simulate: dtau < 0");
    if (R_max < 0 || (R_max > 0 && R_max < 20 * dR)) throw ValidationError("simulate: R_max too small");
    if (!(snapshot_ds > 0) || !(output_dtau > 0)) throw ValidationError("simulate: spacing must be positive");
}

namespace {

constexpr std::size_t GL = 3;  // ghost points left (odd reflection)
constexpr std::size_t GR = 2;  // right, by extrapolation

// ghosted buffer: element i lives at data()[GL + i]
struct Ghosted {
    std::vector<double> buf;
    std::size_t n = 0;
    explicit Ghosted(std::size_t n_ = 0) : buf(n_ + GL + GR, 0.0), n(n_) {}
    double* p() { return buf.data() + GL; }
    const double* p() const { return buf.data() + GL; }
};

void fill_ghosts(double* a, std::size_t n) {
    a[0] = 0.0;
    for (std::size_t k = 1; k <= GL; ++k) a[-static_cast<std::ptrdiff_t>(k)] = -a[k];
    // cubic extrapolation = third-order one-sided differences at the edge
    for (std::size_t k = 0; k < GR; ++k) {
        std::size_t j = n + k;
        a[j] = 4 * a[j - 1] - 6 * a[j - 2] + 4 * a[j - 3] - a[j - 4];
    }
}

void lagrange4(double x, const double* xs, double* wts) {
    for (int i = 0; i < 4; ++i) {
        double w = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != i) w *= (x - xs[j]) / (xs[i] - xs[j]);
        wts[i] = w;
    }
}

// least-squares slope of log y against log tau over the second half of the rows
template <class Get>
double late_slope(const std::vector<TrajectoryRow>& rows, Get get) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = rows.size() / 2; i < rows.size(); ++i) {
        double y = get(rows[i]);
        if (!(y > 0) || !(rows[i].tau > 0)) continue;
        double x = std::log(rows[i].tau);
        sx += x;
        sy += std::log(y);
        sxx += x * x;
        sxy += x * std::log(y);
        ++m;
    }
    return m >= 3 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
}

struct Snapshot {
    double tau = 0.0;
    std::size_t m = 0;  // points with chi > 0
    std::vector<double> pot, force, U, chi;
};

}  // namespace

struct Simulator::Impl {
    SimConfig cfg;
    const SecondCorrection* sc = nullptr;
    std::unique_ptr<TauMap> tm;
    std::size_t n = 0;
    double h = 0.0;
    std::vector<double> R, Wv, potW;
    double dt = 0.0;
    long nsteps = 0;
    SourceFn source;
    // unstable mode
    std::vector<double> phi_d;
    double q = 0.0, phi_norm2 = 0.0;
    mutable std::map<long, Snapshot> snaps;
    mutable double removed = 0.0;
    // work space for step()
    mutable Ghosted v, w, vs, ws;
    mutable std::vector<double> kv[4], kw[4], pot, force;

    double kappa(double tau) const { return tm ? tm->kappa(tau) : 1.0; }
    double beta(double tau) const { return (cfg.comoving && tm) ? tm->beta(tau) : 0.0; }

    Snapshot make_snapshot(long j) const {
        Snapshot s;
        s.tau = std::expm1(std::log1p(cfg.tau0) + static_cast<double>(j) * cfg.snapshot_ds);
        double tau = s.tau;
        if (!(tau > 0)) return s;
        const auto& p = sc->params;
        double nu = p.nu;
        double t = tm->t_of(tau);
        double kap = lambda_of(p, t), sk = std::sqrt(kap);
        double Rsup = std::min(R.back(), 2 * nu * tau);
        s.m = std::min(n, static_cast<std::size_t>(Rsup / h) + 1);
        s.pot.assign(s.m, 0.0);
        s.force.assign(s.m, 0.0);
        s.U.assign(s.m, 0.0);
        s.chi.assign(s.m, 0.0);
        if (s.m < 2) return s;
        // u2 and e2 are costly: sample on sinh-spaced nodes, interpolate to the grid
        const double c = 0.5, ds = 0.02;
        std::size_t nc = static_cast<std::size_t>(std::ceil(std::asinh(Rsup / c) / ds)) + 4;
        std::vector<double> sn(nc), D(nc), E(nc);
        parallel_for(nc, [&](std::size_t i) {
            double si = ds * static_cast<double>(i);
            double Rn = c * std::sinh(si);
            sn[i] = si;
            double r = Rn / kap;
            D[i] = u2_full(*sc, t, r) / sk - W(Rn);
            E[i] = Rn * e2_extended(*sc, t, r) / (kap * kap);
        });
        for (std::size_t i = 0; i < s.m; ++i) {
            double Ri = R[i];
            double si = std::asinh(Ri / c);
            std::size_t k = std::min(static_cast<std::size_t>(si / ds), nc - 3);
            k = k == 0 ? 0 : k - 1;
            double wts[4];
            lagrange4(si, &sn[k], wts);
            double d = 0, e = 0;
            for (int a = 0; a < 4; ++a) {
                d += wts[a] * D[k + a];
                e += wts[a] * E[k + a];
            }
            double chi = cutoff(Ri / (nu * tau));
            double U = Wv[i] + d;
            double W4 = Wv[i] * Wv[i] * Wv[i] * Wv[i], U4 = U * U * U * U;
            s.chi[i] = chi;
            s.U[i] = U;
            s.pot[i] = chi * 5.0 * (W4 - U4);
            s.force[i] = chi * e;
        }
        return s;
    }

    const Snapshot& snapshot(long j) const {
        auto it = snaps.find(j);
        if (it != snaps.end()) return it->second;
        // keep a short window of snapshots alive
        while (!snaps.empty() && snaps.begin()->first < j - 6) snaps.erase(snaps.begin());
        return snaps.emplace(j, make_snapshot(j)).first->second;
    }

    // d/dtau (v, w) at time tau; v, w ghosted (ghosts refreshed here)
    void rhs(double tau, double* v, double* w, double* dv, double* dw, std::vector<double>& pot,
             std::vector<double>& force) const {
        fill_ghosts(v, n);
        fill_ghosts(w, n);
        pot = potW;
        std::fill(force.begin(), force.end(), 0.0);
        if (cfg.residual) {
            double jf = (std::log1p(tau) - std::log1p(cfg.tau0)) / cfg.snapshot_ds;
            long jmax = static_cast<long>(std::ceil((std::log1p(cfg.tau1) - std::log1p(cfg.tau0)) / cfg.snapshot_ds));
            long j0 = std::clamp(static_cast<long>(std::floor(jf)) - 1, 0L, std::max(0L, jmax - 3));
            const Snapshot* S[4];
            double xs[4], wts[4];
            for (int a = 0; a < 4; ++a) {
                S[a] = &snapshot(j0 + a);
                xs[a] = static_cast<double>(j0 + a);
            }
            lagrange4(jf, xs, wts);
            // u2 and chi enter only through N, which is tiny: nearest snapshot is enough
            const Snapshot& near = *S[std::clamp(static_cast<int>(std::lround(jf)) - static_cast<int>(j0), 0, 3)];
            double sk = std::sqrt(kappa(tau));
            std::size_t m = S[3]->m;
            for (int a = 0; a < 4; ++a) {
                const double* P = S[a]->pot.data();
                const double* F = S[a]->force.data();
                std::size_t ma = std::min(m, S[a]->m);
                for (std::size_t i = 0; i < ma; ++i) {
                    pot[i] += wts[a] * P[i];
                    force[i] += wts[a] * F[i];
                }
            }
            // N is homogeneous of degree 5: kappa^-2 R N(u2, v/R) = kappa^{1/2} R N(U, v/(R sqrt kappa))
            for (std::size_t i = 1; i < near.m; ++i) {
                double C = near.chi[i];
                if (C != 0.0) force[i] += C * sk * R[i] * nonlinear_N(near.U[i], v[i] / (R[i] * sk));
            }
        }
        if (source)
            for (std::size_t i = 0; i < n; ++i) force[i] += source(tau, R[i]);
        simd::StencilArgs a{v, w, R.data(), pot.data(), force.data(), beta(tau), 1.0 / h, 1.0 / (h * h), dv, dw};
        constexpr std::size_t chunk = 1 << 14;
        std::size_t nch = (n + chunk - 1) / chunk;
        if (nch <= 1) {
            simd::stencil_rhs(a, 0, n);
        } else {
            parallel_for(nch, [&](std::size_t c) { simd::stencil_rhs(a, c * chunk, std::min(n, (c + 1) * chunk)); });
        }
        dv[0] = dw[0] = 0.0;
    }

    double vR(const double* v, std::size_t i) const {
        return (8.0 * (v[i + 1] - v[i - 1]) - (v[i + 2] - v[i - 2])) / (12.0 * h);
    }
};

Simulator::Simulator(const SimConfig& cfg, const SecondCorrection* sc) : impl_(std::make_unique<Impl>()) {
    cfg.validate();
    auto& I = *impl_;
    I.cfg = cfg;
    I.sc = sc;
    if (cfg.residual && !sc) throw ValidationError("simulate: residual forcing needs the profile");
    ScalingParams p = sc ? sc->params : ScalingParams{};
    if (cfg.comoving || cfg.residual) I.tm = std::make_unique<TauMap>(p);
    double Rmax = cfg.R_max > 0 ? cfg.R_max : 3.0 * p.nu * cfg.tau1;
    I.n = static_cast<std::size_t>(std::llround(Rmax / cfg.dR)) + 1;
    I.h = cfg.dR;
    I.R.resize(I.n);
    I.Wv.resize(I.n);
    I.potW.assign(I.n, 0.0);
    for (std::size_t i = 0; i < I.n; ++i) {
        I.R[i] = I.h * static_cast<double>(i);
        I.Wv[i] = W(I.R[i]);
        if (cfg.potential) I.potW[i] = potential_V(I.R[i]);
    }

    // beta decreases along the window up to the log-periodic wiggle; sample it
    double bmax = 0.0;
    if (I.tm && cfg.comoving)
        for (int k = 0; k <= 64; ++k) bmax = std::max(bmax, I.beta(cfg.tau0 + (cfg.tau1 - cfg.tau0) * k / 64.0));
    double speed = 1.0 + bmax * I.R.back();
    double dt_max = cfg.cfl * cfg.dR / speed;
    if (cfg.dtau > 0) {
        if (cfg.dtau > dt_max * (1 + 1e-12)) {
            std::ostringstream os;
            os << "simulate: CFL violated, dtau " << cfg.dtau << " > " << dt_max << " (speed " << speed << ")";
            throw ValidationError(os.str());
        }
        dt_max = cfg.dtau;
    }
    I.v = I.w = I.vs = I.ws = Ghosted(I.n);
    for (int k = 0; k < 4; ++k) {
        I.kv[k].assign(I.n, 0.0);
        I.kw[k].assign(I.n, 0.0);
    }
    I.pot.assign(I.n, 0.0);
    I.force.assign(I.n, 0.0);
    I.nsteps = static_cast<long>(std::ceil((cfg.tau1 - cfg.tau0) / dt_max - 1e-9));
    I.dt = (cfg.tau1 - cfg.tau0) / static_cast<double>(I.nsteps);

    if (cfg.project_unstable && cfg.potential) {
        // bound state on a subdivision of the grid fine enough for the shooting
        std::size_t sub = static_cast<std::size_t>(std::ceil(cfg.dR / 0.1 - 1e-9));
        SpectralConfig sc_cfg;
        sc_cfg.dR = cfg.dR / static_cast<double>(sub);
        sc_cfg.R_max = cfg.dR * std::round(std::min(40.0, I.R.back()) / cfg.dR);
        auto B = find_xi_d(sc_cfg);
        I.q = std::sqrt(-B.xi_d);
        for (std::size_t i = 0; i * sub < B.phi_d.size() && i < I.n; ++i) I.phi_d.push_back(B.phi_d[i * sub]);
        double s = 0;
        for (double x : I.phi_d) s += x * x;
        I.phi_norm2 = s * I.h;
    }
}

Simulator::~Simulator() = default;

const SimConfig& Simulator::config() const { return impl_->cfg; }
const std::vector<double>& Simulator::R() const { return impl_->R; }
double Simulator::dtau() const { return impl_->dt; }
double Simulator::beta(double tau) const { return impl_->beta(tau); }
void Simulator::set_source(SourceFn f) { impl_->source = std::move(f); }

EvolutionState Simulator::zero_state() const {
    EvolutionState s;
    s.tau = impl_->cfg.tau0;
    s.v.assign(impl_->n, 0.0);
    s.w.assign(impl_->n, 0.0);
    s.dR = impl_->h;
    s.cfl = impl_->cfg.cfl;
    return s;
}

void Simulator::step(EvolutionState& s) const {
    const auto& I = *impl_;
    const std::size_t n = I.n;
    if (s.v.size() != n || s.w.size() != n) throw ValidationError("simulate: state size does not match the grid");
    double dt = I.dt, tau = s.tau;
    auto& v = I.v;
    auto& w = I.w;
    auto& vs = I.vs;
    auto& ws = I.ws;
    auto& kv = I.kv;
    auto& kw = I.kw;
    std::copy(s.v.begin(), s.v.end(), v.p());
    std::copy(s.w.begin(), s.w.end(), w.p());
    static constexpr double cs[4] = {0.0, 0.5, 0.5, 1.0};
    for (int k = 0; k < 4; ++k) {
        if (k == 0) {
            std::copy(v.buf.begin(), v.buf.end(), vs.buf.begin());
            std::copy(w.buf.begin(), w.buf.end(), ws.buf.begin());
        } else {
            double c = cs[k] * dt;
            for (std::size_t i = 0; i < n; ++i) {
                vs.p()[i] = v.p()[i] + c * kv[k - 1][i];
                ws.p()[i] = w.p()[i] + c * kw[k - 1][i];
            }
        }
        I.rhs(tau + cs[k] * dt, vs.p(), ws.p(), kv[k].data(), kw[k].data(), I.pot, I.force);
    }
    for (std::size_t i = 0; i < n; ++i) {
        s.v[i] += dt / 6.0 * ((kv[0][i] + 2.0 * kv[1][i]) + (2.0 * kv[2][i] + kv[3][i]));
        s.w[i] += dt / 6.0 * ((kw[0][i] + 2.0 * kw[1][i]) + (2.0 * kw[2][i] + kw[3][i]));
    }
    s.v[0] = s.w[0] = 0.0;
    s.tau = tau + dt;

    if (!I.phi_d.empty()) {
        // growing combination q x + x' of the bound-state coordinate
        std::size_t m = I.phi_d.size();
        double x = simd::dot(s.v.data(), I.phi_d.data(), m) * I.h / I.phi_norm2;
        double y = simd::dot(s.w.data(), I.phi_d.data(), m) * I.h / I.phi_norm2;
        double c = (I.q * x + y) / (2 * I.q);
        I.removed += std::abs(c);
        for (std::size_t i = 0; i < m; ++i) {
            s.v[i] -= c * I.phi_d[i];
            s.w[i] -= I.q * c * I.phi_d[i];
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(s.v[i]) || !std::isfinite(s.w[i])) {
            std::ostringstream os;
            os << "simulate: non-finite state at tau = " << s.tau << ", R = " << I.R[i];
            if (!I.cfg.dump_path.empty()) {
                std::ofstream out(I.cfg.dump_path);
                out << std::setprecision(17) << "R,v,w\n";
                for (std::size_t j = 0; j < n; ++j) out << I.R[j] << ',' << s.v[j] << ',' << s.w[j] << '\n';
                os << " (state dumped to " << I.cfg.dump_path << ")";
            }
            throw NumericalError(os.str());
        }
    }
}

double Simulator::eps_energy(const EvolutionState& s, double R_lo, double R_hi) const {
    const auto& I = *impl_;
    Ghosted v(I.n);
    std::copy(s.v.begin(), s.v.end(), v.p());
    fill_ghosts(v.p(), I.n);
    double kap = I.tm ? I.kappa(s.tau) : 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < I.n; ++i) {
        double Ri = I.R[i];
        if (Ri < R_lo || Ri > R_hi) continue;
        double d = i == 0 ? 0.0 : I.vR(v.p(), i) - v.p()[i] / Ri;
        double wt = (i == 0 || i + 1 == I.n) ? 0.5 : 1.0;
        sum += wt * (d * d + s.w[i] * s.w[i]);
    }
    return sum * I.h / kap;
}

double Simulator::free_energy(const EvolutionState& s) const {
    const auto& I = *impl_;
    Ghosted v(I.n);
    std::copy(s.v.begin(), s.v.end(), v.p());
    fill_ghosts(v.p(), I.n);
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 < I.n; ++i) {
        double d = I.vR(v.p(), i);
        sum += (i == 0 ? 0.5 : 1.0) * (d * d + s.w[i] * s.w[i]);
    }
    return 0.5 * sum * I.h;
}

double Simulator::eps_at_origin(const EvolutionState& s) const {
    // v odd: v_R(0) = (16 v_1 - 2 v_2) / (12 h)
    return (16.0 * s.v[1] - 2.0 * s.v[2]) / (12.0 * impl_->h);
}

SimReport Simulator::run(EvolutionState s) const {
    const auto& I = *impl_;
    auto clock0 = std::chrono::steady_clock::now();
    SimReport rep;
    rep.dtau = I.dt;
    long every = std::max(1L, std::lround(I.cfg.output_dtau / I.dt));
    const ScalingParams* p = I.sc ? &I.sc->params : nullptr;

    auto record = [&] {
        TrajectoryRow row;
        row.tau = s.tau;
        double sup = std::abs(eps_at_origin(s));
        for (std::size_t i = 1; i < I.n; ++i) sup = std::max(sup, std::abs(s.v[i] / I.R[i]));
        row.sup_eps = sup;
        double nv = 0;
        for (double x : s.v) nv += x * x;
        row.norm_v = std::sqrt(nv * I.h);
        if (I.tm) {
            row.t = I.tm->t_of(s.tau);
            double kap = I.kappa(s.tau), mu = row.t * kap;
            row.energy_in = eps_energy(s, 0.0, mu);
            row.energy_out = eps_energy(s, mu * (1 + 1e-15), I.R.back());
            double e0 = eps_at_origin(s);
            if (I.sc) {
                double u = u2(*I.sc, row.t, 0.0) + e0;
                row.lambda_fit = lambda_fit(u);
                rep.lambda_track = std::max(rep.lambda_track, std::abs(row.lambda_fit / lambda_of(*p, row.t) - 1));
            }
            rep.eps_rel_max = std::max(rep.eps_rel_max, std::abs(e0) / std::sqrt(kap));
        } else {
            row.energy_in = eps_energy(s, 0.0, I.R.back());
        }
        rep.rows.push_back(row);
    };

    I.removed = 0.0;
    record();
    for (long k = 1; k <= I.nsteps; ++k) {
        step(s);
        if (k % every == 0 || k == I.nsteps) record();
    }
    rep.steps = I.nsteps;
    rep.unstable_removed = I.removed;

    auto& rows = rep.rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t a = i == 0 ? 0 : i - 1, b = i == 0 ? std::min<std::size_t>(1, rows.size() - 1) : i;
        if (a == b || rows[a].lambda_fit <= 0 || rows[b].lambda_fit <= 0 || rows[a].t == rows[b].t) continue;
        rows[i].kappa_eff =
            -(std::log(rows[b].lambda_fit) - std::log(rows[a].lambda_fit)) / (std::log(rows[b].t) - std::log(rows[a].t)) -
            1.0;
    }
    for (const auto& r : rows) rep.energy_peak = std::max(rep.energy_peak, r.energy_in + r.energy_out);

    rep.energy_slope_late = late_slope(rows, [](const TrajectoryRow& r) { return r.energy_in + r.energy_out; });
    rep.norm_slope_late = late_slope(rows, [](const TrajectoryRow& r) { return r.norm_v; });
    double E_last = rows.back().energy_in + rows.back().energy_out;
    rep.energy_trend_down = rep.energy_slope_late < 0 && std::isfinite(rep.energy_peak) && E_last < rep.energy_peak;
    rep.final_state = std::move(s);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0).count();
    return rep;
}

double nonlinear_N(double u, double e) {
    return e * e * (10 * u * u * u + e * (10 * u * u + e * (5 * u + e)));
}

double lambda_fit(double u_at_origin) { return u_at_origin * u_at_origin; }

double lambda_tracking(const SecondCorrection& sc, double t_hi, double eps_rel, int n) {
    const auto& p = sc.params;
    if (!(t_hi > 0 && t_hi <= p.t0)) throw DomainError("lambda_tracking: t_hi outside (0, t0]");
    if (n < 2) throw ValidationError("lambda_tracking: n >= 2");
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        double t = t_hi * std::exp(-std::numbers::pi * k / (n - 1));
        double ref = std::exp(-p.eps0 * std::sin(std::log(t)));
        double u = u2(sc, t, 0.0);
        for (double s : {-1.0, 1.0}) {
            double lf = lambda_fit(u * (1 + s * eps_rel));
            worst = std::max(worst, std::abs(lf * std::pow(t, 1 + p.nu) / ref - 1));
        }
    }
    return worst;
}

}  // namespace blowup
