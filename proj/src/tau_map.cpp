#include "blowup/tau_map.hpp"

#include <cmath>

#include "blowup/quadrature.hpp"

namespace blowup {

TauMap::TauMap(const ScalingParams& p) : p_(p) { p_.validate(); }

double TauMap::integral_log(double x0, double x1) const {
    if (x0 == x1) return 0.0;
    const auto& rule = gauss_legendre(20);
    auto f = [&](double x) { return std::exp(-p_.nu * x - p_.eps0 * std::sin(x)); };
    int n = std::max(1, static_cast<int>(std::ceil(std::abs(x1 - x0) / 0.25)));
    double h = (x1 - x0) / n, s = 0.0;
    for (int i = 0; i < n; ++i) s += gl_integrate(rule, x0 + i * h, x0 + (i + 1) * h, f);
    return s;
}

double TauMap::tau(double t) const {
    check_time(t);
    if (t > p_.t0) throw DomainError("tau map: t > t0");
    return integral_log(std::log(t), std::log(p_.t0));
}

double TauMap::t_of(double tau) const {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("tau map: need tau >= 0");
    if (tau == 0.0) return p_.t0;
    double x1 = std::log(p_.t0);
    // pure-power guess, then Newton on x = log t using increments of the integral
    double x = -std::log(std::pow(p_.t0, -p_.nu) + p_.nu * tau) / p_.nu;
    double cur = integral_log(x, x1);
    for (int it = 0; it < 60; ++it) {
        double g = cur - tau;
        double dg = -std::exp(-p_.nu * x - p_.eps0 * std::sin(x));
        double dx = -g / dg;
        if (dx > 1.0) dx = 1.0;
        if (dx < -1.0) dx = -1.0;
        double xn = std::min(x + dx, x1);
        cur += integral_log(xn, x);
        x = xn;
        if (std::abs(dx) < 1e-15 * std::max(1.0, std::abs(x))) return std::exp(x);
    }
    throw NumericalError("tau map: Newton iteration did not converge");
}

double TauMap::beta_at_t(double t) const {
    return (1.0 + kappa_of(p_, t)) / (t * lambda_of(p_, t));
}

}  // namespace blowup
