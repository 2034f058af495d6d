#pragma once
#include "blowup/scaling.hpp"

namespace blowup {

// tau(t) = int_t^{t0} lambda(s) ds, so tau grows to infinity as t -> 0.
// kappa(tau) = lambda(t(tau)), beta = kappa'/kappa.
class TauMap {
public:
    explicit TauMap(const ScalingParams& p);

    double tau(double t) const;
    double t_of(double tau) const;
    double kappa(double tau) const { return lambda_of(p_, t_of(tau)); }
    double beta(double tau) const { return beta_at_t(t_of(tau)); }
    double beta_at_t(double t) const;
    // int_tau^sigma kappa^{-1}(u) du
    double int_kappa_inv(double tau, double sigma) const { return t_of(tau) - t_of(sigma); }

    const ScalingParams& params() const { return p_; }

private:
    // int_{x0}^{x1} lambda(e^x) e^x dx
    double integral_log(double x0, double x1) const;
    ScalingParams p_;
};

}  // namespace blowup
