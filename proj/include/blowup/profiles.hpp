#pragma once
#include <array>
#include <functional>
#include <string>
#include <utility>

#include "blowup/jet.hpp"
#include "blowup/scaling.hpp"

namespace blowup {

// Closed forms, written in s = R^2/3. T is double or Jet<K>.
namespace closed {
template <class T> T W(const T& R) {
    using std::pow;
    T s = R * R / 3.0;
    return pow(1.0 + s, -0.5);
}
template <class T> T phi1(const T& R) {
    using std::pow;
    T s = R * R / 3.0;
    return (1.0 - s) * pow(1.0 + s, -1.5);
}
template <class T> T phit1(const T& R) { return R * phi1(R); }
template <class T> T phit2(const T& R) {
    using std::pow;
    T s = R * R / 3.0;
    return (1.0 - 6.0 * s + s * s) * pow(1.0 + s, -1.5);
}
template <class T> T phi2(const T& R) { return phit2(R) / R; }
template <class T> T g1(const T& R) { return phi1(R); }
template <class T> T g2(const T& R) {
    using std::pow;
    T s = R * R / 3.0;
    T R2 = R * R;
    return (9.0 - 30.0 * R2 + R2 * R2) * pow(1.0 + s, -2.5);
}
// 5 W^4
template <class T> T potential(const T& R) {
    T s = R * R / 3.0;
    T q = 1.0 + s;
    return 5.0 / (q * q);
}
}  // namespace closed

// A radial function with derivatives up to max_order.
struct RadialProfile {
    std::string name;
    int max_order = 0;
    double r_min = 0.0;  // evaluation at R < r_min is rejected
    std::function<double(double, int)> fn;

    double eval(double R) const { return eval_deriv(R, 0); }
    double eval_deriv(double R, int order) const;
};

constexpr int kProfileJetOrder = 6;
using PJet = Jet<kProfileJetOrder>;

RadialProfile make_closed(std::string name, PJet (*f)(const PJet&), double r_min = 0.0);

RadialProfile W_profile();
double W(double R);
double u0(const ScalingParams& p, double t, double r);

RadialProfile scaling_op_D(const RadialProfile& f);
RadialProfile L0_apply(const RadialProfile& f);
std::pair<RadialProfile, RadialProfile> L0_fundamental();
std::pair<RadialProfile, RadialProfile> L0_tilde_fundamental();
RadialProfile g1_profile();
RadialProfile g2_profile();

struct BulkErrorFactors {
    AdmissibleFn omega1;
    AdmissibleFn omega2;
    RadialProfile g1;
    RadialProfile g2;
};

AdmissibleFn omega1_fn(const ScalingParams& p, double eps_base);
AdmissibleFn omega2_fn(const ScalingParams& p, double eps_base);
BulkErrorFactors bulk_error_factors(const ScalingParams& p, double eps_base);

// e0(t, r) with R = r lambda(t), through the factored form
double bulk_error_e0(const ScalingParams& p, double t, double R);
// same quantity from t-jets of u0 at fixed r
double bulk_error_e0_direct(const ScalingParams& p, double t, double R);

}  // namespace blowup
