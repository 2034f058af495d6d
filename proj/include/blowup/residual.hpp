#pragma once
#include <functional>
#include <utility>
#include <vector>

#include "blowup/correction_two.hpp"

namespace blowup {

// Pieces of t^2 lambda^{-1/2} e2 at (t, r).
struct E2Parts {
    double tails = 0.0;      // second-order time operator on f - head
    double nonlin_v1 = 0.0;  // mu^2 [10 W^3 V1^2 + ... + V1^5]
    double nonlin_v2 = 0.0;  // mu^2 [(U1 + V2)^5 - U1^5]
    double total() const { return tails - nonlin_v1 - nonlin_v2; }
};

E2Parts e2_parts(const SecondCorrection& sc, double t, double r, bool with_v2 = true);
// t^2 lambda^{-1/2} e2
double e2_normalized(const SecondCorrection& sc, double t, double r, bool with_v2 = true);
double e2_analytic(const SecondCorrection& sc, double t, double r, bool with_v2 = true);

// e2 for all r >= 0: analytic inside the cone, outside the cone the value at r = t
// carried along the envelope log(R+2)/(R+1)
double e2_extended(const SecondCorrection& sc, double t, double r);

// box u2 - u2^5 by 9-point stencils in r and t; the bulk part uses exact t-jets of u0.
// h_r = hr_scale (r + 1/lambda), h_t = ht_frac t
double e2_finite_difference(const SecondCorrection& sc, double t, double r, double hr_scale = 0.005,
                            double ht_frac = 1.0 / 400);

// max over n log-spaced R in [0.01, 0.9 mu] of |fd - analytic| / |analytic|
double e2_fd_agreement(const SecondCorrection& sc, double t, int n = 48);

// |t^2 lambda^{-1/2} e2| mu^2 (R+1) / log(R+2)
double e2_envelope_ratio(const SecondCorrection& sc, double t, double R);

struct SliceReport {
    double t = 0.0;
    double sup = 0.0;       // sup of the envelope ratio over R in [0, mu]
    double argmax_R = 0.0;
    bool boundary_peak = false;
    double sup_small_R = 0.0;  // sup over R in [0,1] of |t^2 lambda^{-1/2} e2| mu^2
    double sup_tdt = 0.0;      // same envelope after t d/dt (fixed r)
    double sup_rdr = 0.0;      // same envelope after r d/dr
    double e_in = 0.0, e_out = 0.0;
};

struct ResidualReport {
    std::vector<SliceReport> slices;
    double sup_bound = 0.0;
    std::vector<double> decade_ratios;  // sup(t') / sup(t) for t' in [t/10, t)
    bool bounded = false;                // every decade ratio <= 3 and every sup finite
};

ResidualReport certify_e2_bound(const SecondCorrection& sc, const std::vector<double>& t_list, int R_resolution = 1024);

using Field = std::function<double(double t, double r)>;

struct EnergyParts {
    double grad_r = 0.0, grad_t = 0.0, potential = 0.0;
    double total() const { return grad_r + grad_t + potential; }
};

// int [(u_r)^2 + (u_t)^2 + u^6] r^2 dr over [r0, r1]; u_t by central differences
EnergyParts energy_parts(const Field& u, const Field& u_r, double t, double r0, double r1, double length_scale);
double energy_integral(const Field& u, const Field& u_r, double t, double r0, double r1, double length_scale);

// inside [0, t] and outside [t, (1 + b1) t]
std::pair<EnergyParts, EnergyParts> energy_split(const SecondCorrection& sc, double t);
std::pair<double, double> energies(const SecondCorrection& sc, double t);

// sup over R in [1, mu] of |mu^2 U1^k V2^(5-k)| R mu^2, k = 0..4
double interior_nonlinear_ratio(const SecondCorrection& sc, double t, int k);

}  // namespace blowup
