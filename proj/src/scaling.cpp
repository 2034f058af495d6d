#include "blowup/scaling.hpp"

#include <algorithm>
#include <string>

namespace blowup {

void ScalingParams::validate() const {
    if (!(t0 > 0.0 && t0 < 0.5)) throw ValidationError("scaling.t0 must lie in (0, 1/2)");
    if (!(nu > 1.0)) throw ValidationError("scaling.nu must exceed 1");
    if (!std::isfinite(eps0) || std::abs(eps0) >= 1.0) throw ValidationError("scaling.eps0 must satisfy |eps0| < 1");
}

void check_time(double t) {
    if (!(t > 0.0 && t < 0.5)) throw DomainError("time " + std::to_string(t) + " outside (0, 1/2)");
}

double lambda_of(const ScalingParams& p, double t) {
    check_time(t);
    return lambda_t(p, t);
}

double mu_of(const ScalingParams& p, double t) { return t * lambda_of(p, t); }

double kappa_of(const ScalingParams& p, double t) {
    check_time(t);
    return p.nu + p.eps0 * std::cos(std::log(t));
}

double nu_eff(const ScalingParams& p, double t) {
    check_time(t);
    double lt = std::log(t);
    return p.nu + p.eps0 * std::sin(lt) / lt;
}

AdmissibleFn::AdmissibleFn(double eps_tilde, int n_max) : eps_(eps_tilde), n_max_(n_max) {
    if (n_max < 0) throw ValidationError("AdmissibleFn: negative truncation order");
}

AdmissibleFn AdmissibleFn::constant(double eps_tilde, int n_max, double c) {
    AdmissibleFn a(eps_tilde, n_max);
    a.set(0, 0, c);
    return a;
}

AdmissibleFn AdmissibleFn::kappa(const ScalingParams& p, double eps_tilde, int n_max) {
    AdmissibleFn a = constant(eps_tilde, n_max, p.nu);
    if (p.eps0 == 0.0) return a;
    if (eps_tilde == 0.0) throw ValidationError("AdmissibleFn::kappa: zero base with nonzero eps0");
    double h = 0.5 * p.eps0 / eps_tilde;
    a.set(1, 0, h);
    a.set(1, 1, h);
    return a;
}

AdmissibleFn::cplx AdmissibleFn::coeff(int n, int m) const {
    if (n < 0 || m < 0 || m > n || n >= static_cast<int>(h_.size())) return 0.0;
    return h_[n][m];
}

void AdmissibleFn::set(int n, int m, cplx v) {
    if (n < 0 || m < 0 || m > n) throw ValidationError("AdmissibleFn::set: index out of range");
    if (n > n_max_) throw NumericalError("AdmissibleFn: truncation overflow at order " + std::to_string(n));
    while (static_cast<int>(h_.size()) <= n) h_.emplace_back(h_.size() + 1, cplx(0.0));
    h_[n][m] = v;
}

AdmissibleFn::cplx AdmissibleFn::eval_complex(double t) const {
    double lt = std::log(t);
    cplx sum = 0.0;
    double en = 1.0;
    for (int n = 0; n < static_cast<int>(h_.size()); ++n) {
        if (n > 0) {
            en *= eps_;
            if (en == 0.0) break;
        }
        cplx level = 0.0;
        for (int m = 0; m <= n; ++m) {
            double ph = (n - 2 * m) * lt;
            level += h_[n][m] * cplx(std::cos(ph), std::sin(ph));
        }
        sum += en * level;
    }
    return sum;
}

double AdmissibleFn::reality_defect() const {
    double d = 0.0;
    for (int n = 0; n < static_cast<int>(h_.size()); ++n)
        for (int m = 0; m <= n; ++m) d = std::max(d, std::abs(h_[n][m] - std::conj(h_[n][n - m])));
    return d;
}

std::vector<double> AdmissibleFn::level_norms() const {
    std::vector<double> out;
    for (const auto& lvl : h_) {
        double s = 0.0;
        for (auto v : lvl) s += std::abs(v);
        out.push_back(s);
    }
    return out;
}

void AdmissibleFn::check_compatible(const AdmissibleFn& b) const {
    if (eps_ != b.eps_) throw ValidationError("AdmissibleFn: incompatible base amplitudes");
}

void AdmissibleFn::trim() {
    while (!h_.empty()) {
        bool zero = std::all_of(h_.back().begin(), h_.back().end(), [](cplx v) { return v == cplx(0.0); });
        if (!zero) break;
        h_.pop_back();
    }
}

AdmissibleFn AdmissibleFn::operator+(const AdmissibleFn& b) const {
    check_compatible(b);
    AdmissibleFn r(eps_, std::max(n_max_, b.n_max_));
    int top = std::max(order(), b.order());
    for (int n = 0; n <= top; ++n)
        for (int m = 0; m <= n; ++m) r.set(n, m, coeff(n, m) + b.coeff(n, m));
    r.trim();
    return r;
}

AdmissibleFn AdmissibleFn::operator-(const AdmissibleFn& b) const { return *this + b * -1.0; }

AdmissibleFn AdmissibleFn::operator*(const AdmissibleFn& b) const {
    check_compatible(b);
    AdmissibleFn r(eps_, std::max(n_max_, b.n_max_));
    for (int n1 = 0; n1 <= order(); ++n1)
        for (int n2 = 0; n2 <= b.order(); ++n2)
            for (int m1 = 0; m1 <= n1; ++m1)
                for (int m2 = 0; m2 <= n2; ++m2) {
                    cplx v = h_[n1][m1] * b.h_[n2][m2];
                    if (v == cplx(0.0)) continue;
                    r.set(n1 + n2, m1 + m2, r.coeff(n1 + n2, m1 + m2) + v);
                }
    r.trim();
    return r;
}

AdmissibleFn AdmissibleFn::operator*(double s) const {
    AdmissibleFn r = *this;
    for (auto& lvl : r.h_)
        for (auto& v : lvl) v *= s;
    r.trim();
    return r;
}

AdmissibleFn AdmissibleFn::operator+(double s) const {
    return *this + constant(eps_, n_max_, s);
}

AdmissibleFn adm_add(const AdmissibleFn& a, const AdmissibleFn& b) { return a + b; }
AdmissibleFn adm_mul(const AdmissibleFn& a, const AdmissibleFn& b) { return a * b; }

AdmissibleFn adm_tdt(const AdmissibleFn& a) {
    AdmissibleFn r(a.eps_tilde(), a.n_max());
    for (int n = 0; n <= a.order(); ++n)
        for (int m = 0; m <= n; ++m) {
            auto v = a.coeff(n, m) * AdmissibleFn::cplx(0.0, n - 2 * m);
            r.set(n, m, v);
        }
    return r * 1.0;  // trims
}

}  // namespace blowup
