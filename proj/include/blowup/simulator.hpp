#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "blowup/correction_two.hpp"
#include "blowup/tau_map.hpp"

namespace blowup {

// Comoving frame: D = d_tau + beta (R d_R - 1),  D v = w,  D w = -beta w - L v + RHS,
// RHS = kappa^-2 chi~(R/(nu tau)) [5(u0^4 - u2^4) v + R N(u2, v/R) + R e2].
struct SimConfig {
    double tau0 = 10.0, tau1 = 250.0;
    double dR = 0.1;
    double cfl = 0.4;
    double dtau = 0.0;   // 0: largest step allowed by cfl
    double R_max = 0.0;  // 0: 3 nu tau1
    bool potential = true;
    bool comoving = true;   // false: beta = 0
    bool residual = true;   // u2 terms and e2 forcing
    bool project_unstable = true;  // keep the growing bound-state mode at zero
    double snapshot_ds = 0.05;     // forcing is tabulated at this spacing in log(1 + tau)
    double output_dtau = 1.0;
    std::string dump_path;  // state written here before a NaN abort
    void validate() const;
};

struct EvolutionState {
    double tau = 0.0;
    std::vector<double> v, w;  // at R_i = i dR
    double dR = 0.0;
    double cfl = 0.0;
};

struct TrajectoryRow {
    double tau = 0.0, t = 0.0;
    double energy_in = 0.0, energy_out = 0.0;  // of eps = v/R inside / outside R = mu
    double sup_eps = 0.0;
    double lambda_fit = 0.0;  // (u2 + eps)^2 at r = 0
    double kappa_eff = 0.0;   // -dlog lambda_fit / dlog t - 1
    double norm_v = 0.0;      // ||v||_2
};

struct SimReport {
    std::vector<TrajectoryRow> rows;
    EvolutionState final_state;
    double dtau = 0.0;
    long steps = 0;
    double energy_peak = 0.0;
    double energy_slope_late = 0.0;  // d log E / d log tau over the second half of the rows
    bool energy_trend_down = false;  // negative late slope and final energy below the peak
    double norm_slope_late = 0.0;    // same fit for ||v||_2
    double eps_rel_max = 0.0;       // sup of |eps(t, 0)| / sqrt(lambda)
    double lambda_track = 0.0;      // max |lambda_fit / lambda - 1| over the rows
    double unstable_removed = 0.0;  // sum of |projected amplitude|
    double seconds = 0.0;
};

using SourceFn = std::function<double(double tau, double R)>;

class Simulator {
public:
    // sc may be null when cfg.residual is false
    Simulator(const SimConfig& cfg, const SecondCorrection* sc);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    const SimConfig& config() const;
    const std::vector<double>& R() const;
    double dtau() const;
    double beta(double tau) const;

    // extra source added to the w equation (tests)
    void set_source(SourceFn f);

    EvolutionState zero_state() const;
    void step(EvolutionState& s) const;
    SimReport run(EvolutionState s) const;

    // kappa^-1 int [(v_R - v/R)^2 + w^2] dR over [R_lo, R_hi]
    double eps_energy(const EvolutionState& s, double R_lo, double R_hi) const;
    // 1/2 int (w^2 + v_R^2) dR, the conserved quantity of the free problem
    double free_energy(const EvolutionState& s) const;
    double eps_at_origin(const EvolutionState& s) const;  // v_R(tau, 0)

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// (u + e)^5 - u^5 - 5 u^4 e
double nonlinear_N(double u, double e);

// (u / W(lambda r*))^2 with r* -> 0
double lambda_fit(double u_at_origin);

// Max over t in [t_hi e^-pi, t_hi] of |lambda_fit t^{1+nu} / exp(-eps0 sin log t) - 1|
// with u = u2 (1 +- eps_rel) at the origin.
double lambda_tracking(const SecondCorrection& sc, double t_hi, double eps_rel, int n = 64);

}  // namespace blowup
