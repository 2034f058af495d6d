#include "blowup/profiles.hpp"

#include <string>

namespace blowup {

double RadialProfile::eval_deriv(double R, int order) const {
    if (order < 0 || order > max_order)
        throw ValidationError(name + ": derivative order " + std::to_string(order) + " unavailable");
    if (R < r_min) throw DomainError(name + ": R below admissible range");
    return fn(R, order);
}

RadialProfile make_closed(std::string name, PJet (*f)(const PJet&), double r_min) {
    RadialProfile p;
    p.name = std::move(name);
    p.max_order = kProfileJetOrder;
    p.r_min = r_min;
    p.fn = [f](double R, int k) { return f(PJet::var(R)).d(k); };
    return p;
}

RadialProfile W_profile() { return make_closed("W", &closed::W<PJet>); }
double W(double R) { return closed::W(R); }

double u0(const ScalingParams& p, double t, double r) {
    double l = lambda_of(p, t);
    return std::sqrt(l) * W(r * l);
}

RadialProfile scaling_op_D(const RadialProfile& f) {
    RadialProfile g;
    g.name = "D(" + f.name + ")";
    g.max_order = f.max_order - 1;
    g.r_min = f.r_min;
    g.fn = [f](double R, int k) {
        // (f/2 + R f')^(k) = (1/2 + k) f^(k) + R f^(k+1)
        return (0.5 + k) * f.fn(R, k) + R * f.fn(R, k + 1);
    };
    return g;
}

RadialProfile L0_apply(const RadialProfile& f) {
    if (f.max_order < 2) throw ValidationError("L0_apply: profile must be twice differentiable");
    RadialProfile g;
    g.name = "L0(" + f.name + ")";
    g.max_order = 0;
    g.r_min = std::max(f.r_min, 1e-300);
    g.fn = [f](double R, int) {
        return f.fn(R, 2) + 2.0 / R * f.fn(R, 1) + closed::potential(R) * f.fn(R, 0);
    };
    return g;
}

std::pair<RadialProfile, RadialProfile> L0_fundamental() {
    return {make_closed("phi1", &closed::phi1<PJet>), make_closed("phi2", &closed::phi2<PJet>, 1e-300)};
}

std::pair<RadialProfile, RadialProfile> L0_tilde_fundamental() {
    return {make_closed("phit1", &closed::phit1<PJet>), make_closed("phit2", &closed::phit2<PJet>)};
}

RadialProfile g1_profile() { return make_closed("g1", &closed::g1<PJet>); }
RadialProfile g2_profile() { return make_closed("g2", &closed::g2<PJet>); }

AdmissibleFn omega1_fn(const ScalingParams& p, double eps_base) {
    AdmissibleFn k = AdmissibleFn::kappa(p, eps_base, 40);
    return (k + 1.0 - adm_tdt(k)) * 0.5;
}

AdmissibleFn omega2_fn(const ScalingParams& p, double eps_base) {
    AdmissibleFn k1 = AdmissibleFn::kappa(p, eps_base, 40) + 1.0;
    return k1 * k1 * (1.0 / 36.0);
}

BulkErrorFactors bulk_error_factors(const ScalingParams& p, double eps_base) {
    return {omega1_fn(p, eps_base), omega2_fn(p, eps_base), g1_profile(), g2_profile()};
}

double bulk_error_e0(const ScalingParams& p, double t, double R) {
    double eb = p.eps_tilde(1);
    double w1 = omega1_fn(p, eb).eval(t);
    double w2 = omega2_fn(p, eb).eval(t);
    double l = lambda_of(p, t);
    return std::sqrt(l) / (t * t) * (w1 * closed::g1(R) + w2 * closed::g2(R));
}

double bulk_error_e0_direct(const ScalingParams& p, double t, double R) {
    check_time(t);
    double r = R / lambda_of(p, t);
    using J = Jet<2>;
    J tj = J::var(t);
    J l = lambda_t(p, tj);
    J u = sqrt(l) * closed::W(l * r);
    return u.d(2);
}

}  // namespace blowup
