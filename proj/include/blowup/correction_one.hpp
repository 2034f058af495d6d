#pragma once
#include <memory>
#include <utility>
#include <vector>

#include "blowup/chebyshev.hpp"
#include "blowup/profiles.hpp"
#include "blowup/scaling.hpp"

namespace blowup {

struct AsymptoticHead {
    double b1 = 0.0;
    double b2 = 0.0;
    // action of D = 1/2 + R d/dR on (b1 R + b2)
    AsymptoticHead under_D() const { return {1.5 * b1, 0.5 * b2}; }
};

// Panels of Chebyshev series on consecutive intervals.
struct PiecewiseCheb {
    std::vector<double> breaks;
    std::vector<ChebSeries<double>> panels;
    std::size_t locate(double x) const;
    double eval(double x) const { return panels[locate(x)].eval(x); }
};

struct SolveL0Options {
    double r_series = 1e-2;  // below this the Taylor series is used
    double r_cap = 4000.0;
    double panel_ratio = 1.5;
    int degree = 32;
    double fit_lo = 200.0, fit_hi = 2000.0;
};

// Expansion used beyond r_cap:
// b1 R + b2 + sum_k tail[k] * basis_k(R), basis = 1/R, 1/R^2, 1/R^3, 1/R^4, log R/R, log R/R^3
constexpr int kTailTerms = 6;

struct CorrectionProfile {
    RadialProfile f;            // derivatives 0..4
    AsymptoticHead head;        // fitted
    double near_zero = 0.0;     // c in f = c R^2 + O(R^4)
    std::vector<double> tail;   // fitted tail coefficients
    double fit_residual = 0.0;  // max abs residual of the head fit on its window
    double quad_error = 0.0;    // GL20 vs GL30 panel disagreement (relative)
    double r_cap = 0.0;
    PiecewiseCheb f_interp;     // interpolant of f values, for independent checks
    std::vector<double> series; // Taylor coefficients a_0 .. a_K at the origin

    // k-th derivative of f - b1 R - b2
    double tail_deriv(double R, int k) const;
};

CorrectionProfile solve_L0(const RadialProfile& g, const SolveL0Options& opt = {});

// (M^2 - M)(omega f) = P0 f + P1 Df + P2 D^2 f, M = 2 kappa + t d/dt - (1 + kappa) D
struct OpCoeffs {
    AdmissibleFn P0, P1, P2;
};
OpCoeffs second_order_coeffs(const AdmissibleFn& omega, const AdmissibleFn& kappa);

struct FirstCorrection {
    ScalingParams params;
    CorrectionProfile f1, f2;
    AdmissibleFn omega1, omega2;  // base eps_tilde(1)
    OpCoeffs op1, op2;            // second_order_coeffs for omega1, omega2
};

FirstCorrection build_first_correction(const ScalingParams& p, const SolveL0Options& opt = {});

double v1(const FirstCorrection& fc, double t, double r);

// c1 in base eps_tilde(1), c2 in base eps_tilde(2)
std::pair<AdmissibleFn, AdmissibleFn> leading_error_coeffs(const ScalingParams& p, const AsymptoticHead& h1,
                                                           const AsymptoticHead& h2);

}  // namespace blowup
