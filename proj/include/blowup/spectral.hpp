#pragma once
#include <complex>
#include <functional>
#include <vector>

#include "blowup/scaling.hpp"
#include "blowup/tau_map.hpp"

namespace blowup {

// L = -d^2/dR^2 - 5 W^4 on the half line, Dirichlet at 0.

struct SpectralConfig {
    double ode_tol = 1e-11;
    bool potential = true;  // false: V = 0 control problem
    double xi_min = 1e-4, xi_max = 1e3;
    int n_xi = 400;
    // transform grid: uniform R in [0, R_max]; continuous part integrated in k = sqrt(xi)
    double R_max = 30.0;
    double dR = 0.02;
    double k_panel = 0.25;
    void validate() const;
};

double potential_V(double R);  // 5 W^4

// Matching radius for the large-R asymptotics.
double far_radius(double xi);

struct PhiSamples {
    std::vector<double> phi, dphi;
};

// phi(., xi) with phi(0) = 0, phi'(0) = 1 at ascending R >= 0.
PhiSamples eigenfunction(double xi, const std::vector<double>& R, const SpectralConfig& cfg = {});

struct Amplitude {
    std::complex<double> a;  // phi ~ a e^{ikR} + conj
    double R_far = 0.0;
    double match_error = 0.0;  // V(R_far)/xi, the neglected potential at the matching point
};
Amplitude match_amplitude(double xi, const SpectralConfig& cfg = {});
// 1 / (4 pi |a|^2 sqrt(xi))
double spectral_density(double xi, const SpectralConfig& cfg = {});

// (phi' + k phi) / |(phi, phi')| at far_radius(xi), k = sqrt(-xi). Zero at the eigenvalue.
double decay_functional(double xi, const SpectralConfig& cfg = {});

struct BoundState {
    double xi_d = 0.0;
    double xi_d_coarse = 0.0;  // same search at 100x looser tolerance
    int sign_changes = 0;      // of the decay functional on the scan of (-25, 0)
    std::vector<double> R, phi_d;
    double norm2 = 0.0;         // ||phi_d||^2
    double decay_const = 0.0;   // |phi_d(R_max)| e^{k R_max}
    double decay_const_mid = 0.0;  // same at R_max / 2
    int agreement_digits() const;
};
BoundState find_xi_d(const SpectralConfig& cfg = {});

struct SpectralData {
    SpectralConfig cfg;
    BoundState bound;
    // log grid for tables and norms
    std::vector<double> xi, rho;
    std::vector<std::complex<double>> a_amp;
    // transform grid
    std::vector<double> R, wR;
    std::vector<double> k, wk;  // wk includes 2 k rho(k^2)
    std::vector<double> rho_k;
    std::vector<double> phi;    // row-major, k.size() x R.size()
    std::vector<double> phiT;   // R.size() x k.size()

    double xi_d() const { return bound.xi_d; }
    // log-log spline, extended by the xi^{-1/2} and xi^{1/2} laws
    double rho_at(double x) const;
    void refresh_spline();  // after editing rho
    std::function<double(double)> log_rho;
};

SpectralData build_spectral(const SpectralConfig& cfg = {});

struct Transform {
    double f_d = 0.0;
    std::vector<double> f_c;  // at SpectralData::k nodes (xi = k^2)
    double truncation = 0.0;  // relative weight of the last k panel
};

Transform forward_transform(const SpectralData& sd, const std::vector<double>& f);
std::vector<double> inverse_transform(const SpectralData& sd, const Transform& F);
// <F, G> on the transform side
double spectral_inner(const SpectralData& sd, const Transform& F, const Transform& G);
// ||U(L f) - xi U f|| / ||xi U f|| in L^2_rho, L f by 8th-order differences
double diagonalization_error(const SpectralData& sd, const std::vector<double>& f);
// ||inverse(forward f) - f||_2 / ||f||_2
double round_trip_error(const SpectralData& sd, const std::vector<double>& f);

struct KernelValues {
    double H_c = 0.0, H_hat_c = 0.0, H_d = 0.0;
};
KernelValues parametrix_kernels(const SpectralData& sd, const TauMap& tm, double tau, double sigma, double xi);

struct ParBoundReport {
    double C_xi = 0.0;     // sup |H_c| / (w xi^{-1/2})
    double C_sigma = 0.0;  // sup |H_c| / (nu w sigma)
    double C_min = 0.0;    // sup |H_c| / min(...)
    double C_hat = 0.0;    // sup |H_hat_c| / w
    int points = 0;
};
// lattice: tau log-spaced in [tau_lo, tau_hi], sigma/tau in [1, sigma_ratio], xi in [xi_lo, xi_hi]
ParBoundReport parbound_scan(const SpectralData& sd, const TauMap& tm, double tau_lo, double tau_hi,
                             double sigma_ratio = 1e3, double xi_lo = 1e-4, double xi_hi = 1e3, int n = 10);

// chi(x) = 1 for |x| <= 1, 0 for |x| >= 2, smooth in between
double cutoff(double x);

using RealFn = std::function<double(double)>;

struct HilbertOptions {
    bool truncated = true;  // false: plain PV over the symmetric window |xi - eta| <= window
    double window = 0.0;
    double scale = 0.0;     // smallest feature length of f (0: none)
    std::vector<double> breaks;  // jump locations of f
};
// H_n f(xi) = int chi(n(xi/eta - 1)) f(eta) / (xi - eta) d eta by symmetric pairing around eta = xi
double truncated_hilbert_at(int n, const RealFn& f, double xi, const HilbertOptions& opt = {});
std::vector<double> truncated_hilbert(int n, const RealFn& f, const std::vector<double>& xi,
                                      const HilbertOptions& opt = {});
// grid function variant (piecewise linear interpolation of the samples)
std::vector<double> truncated_hilbert(int n, const std::vector<double>& eta, const std::vector<double>& f,
                                      const std::vector<double>& xi);

// ||H_n f||_q / ||f||_q on a uniform grid over [lo, hi] (must contain the support of f, widened)
double hilbert_norm_ratio(int n, const RealFn& f, double q, double lo, double hi, int points,
                          const HilbertOptions& opt = {});

struct KernelSplit {
    std::vector<double> K_d, K_nd;  // row-major over (xi_i, eta_j)
};
KernelSplit split_kernel(const std::vector<double>& xi, const std::vector<double>& eta, const std::vector<double>& K,
                         int n0);

struct NormParams {
    double p = 16.0;
    double delta = 0.05;
    double tau0 = 1.0;
    double xi_lo = 1e-4, xi_hi = 1e3;
    int n = 400;
    void validate() const;
};
double norm_X(const SpectralData& sd, const RealFn& f, const NormParams& np = {});
double norm_Y(const SpectralData& sd, const RealFn& f, const NormParams& np = {});
// sup over tau > tau0 of tau^beta * slice_norms
double spacetime_norm(const std::vector<double>& tau, const std::vector<double>& slice_norms, double beta,
                      double tau0);

struct InhomogSlice {
    double tau = 0.0, t = 0.0, kappa = 0.0;
    double u_d = 0.0;                  // at xi_d
    std::vector<double> xi, u_c;       // continuous part
    double envelope = 0.0;             // sup |u_c| <xi>
    double size = 0.0;                 // max(|u_d|, envelope)
};

struct InhomogReport {
    std::vector<InhomogSlice> slices;
    double exponent = 0.0;   // fitted decay rate of size(tau) ~ tau^{-exponent}
    double exponent_d = 0.0; // same for |u_d|
    double fit_rms = 0.0;    // rms of the log residuals
    double target = 0.0;     // 3 - (1 + 1/nu)/2 - 0.3
    bool pass = false;
};

using Residual = std::function<double(double t, double r)>;
// U(kappa^{-2} R chi~(R/(nu tau)) e2(t(tau), R/kappa)) on n_xi log-spaced xi and at xi_d.
// The xi grid runs from xi_lo (0: below (2 nu tau)^{-2} of the last slice, where the
// non-oscillatory bound is sharp) up to cfg.xi_max.
InhomogReport inhomog_decay(const Residual& e2, const SpectralData& sd, const TauMap& tm,
                            const std::vector<double>& tau_list, int n_xi = 64, double xi_lo = 0.0);

}  // namespace blowup
