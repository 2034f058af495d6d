#pragma once
#include <cmath>
#include <complex>
#include <vector>

#include "blowup/errors.hpp"
#include "blowup/jet.hpp"

namespace blowup {

struct ScalingParams {
    double nu = 3.5;
    double eps0 = 0.02;
    double t0 = 0.1;

    double eps_tilde(int j) const { return (0.5 * j - 0.25) * eps0; }
    double nu_tilde(int j) const { return (j - 0.5) * nu - 0.5; }
    void validate() const;
};

void check_time(double t);

// Templated so the same formula can be pushed through Jet<N> in t.
template <class T>
T lambda_t(const ScalingParams& p, const T& t) {
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    T lt = log(t);
    return pow(t, -1.0 - p.nu) * exp(-p.eps0 * sin(lt));
}

double lambda_of(const ScalingParams& p, double t);
double mu_of(const ScalingParams& p, double t);
double kappa_of(const ScalingParams& p, double t);
double nu_eff(const ScalingParams& p, double t);

// Sum over 0<=m<=n<=N of eps^n h[n][m] t^{(n-2m)i}.
class AdmissibleFn {
public:
    using cplx = std::complex<double>;

    AdmissibleFn() = default;
    AdmissibleFn(double eps_tilde, int n_max);

    static AdmissibleFn constant(double eps_tilde, int n_max, double c);
    // kappa = nu + eps0 cos log t written in base eps_tilde
    static AdmissibleFn kappa(const ScalingParams& p, double eps_tilde, int n_max);

    double eps_tilde() const { return eps_; }
    int n_max() const { return n_max_; }
    int order() const { return static_cast<int>(h_.size()) - 1; }

    cplx coeff(int n, int m) const;
    void set(int n, int m, cplx v);

    cplx eval_complex(double t) const;
    double eval(double t) const { return eval_complex(t).real(); }

    // max |h_{n,m} - conj h_{n,n-m}|
    double reality_defect() const;
    // sum_m |h_{n,m}| per level
    std::vector<double> level_norms() const;

    AdmissibleFn operator+(const AdmissibleFn& b) const;
    AdmissibleFn operator-(const AdmissibleFn& b) const;
    AdmissibleFn operator*(const AdmissibleFn& b) const;
    AdmissibleFn operator*(double s) const;
    AdmissibleFn operator+(double s) const;

private:
    void check_compatible(const AdmissibleFn& b) const;
    void trim();
    double eps_ = 0.0;
    int n_max_ = 40;
    std::vector<std::vector<cplx>> h_;  // h_[n][m], m = 0..n
};

AdmissibleFn adm_add(const AdmissibleFn& a, const AdmissibleFn& b);
AdmissibleFn adm_mul(const AdmissibleFn& a, const AdmissibleFn& b);
AdmissibleFn adm_tdt(const AdmissibleFn& a);

}  // namespace blowup
