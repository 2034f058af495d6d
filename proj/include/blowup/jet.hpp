#pragma once
// Truncated Taylor arithmetic. c[k] holds f^(k)(x0)/k!.
#include <array>
#include <cmath>

namespace blowup {

template <int N>
struct Jet {
    std::array<double, N + 1> c{};

    Jet() = default;
    Jet(double v) { c[0] = v; }  // NOLINT: implicit constants are intended

    static Jet var(double x0) {
        Jet j(x0);
        if constexpr (N >= 1) j.c[1] = 1.0;
        return j;
    }
    double value() const { return c[0]; }
    // k-th derivative
    double d(int k) const {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }
};

template <int N> Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k] + b.c[k];
    return r;
}
template <int N> Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k] - b.c[k];
    return r;
}
template <int N> Jet<N> operator-(const Jet<N>& a) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = -a.c[k];
    return r;
}
template <int N> Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double s = 0.0;
        for (int i = 0; i <= k; ++i) s += a.c[i] * b.c[k - i];
        r.c[k] = s;
    }
    return r;
}
template <int N> Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double s = a.c[k];
        for (int i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
        r.c[k] = s / b.c[0];
    }
    return r;
}
template <int N> Jet<N> operator+(const Jet<N>& a, double b) { Jet<N> r = a; r.c[0] += b; return r; }
template <int N> Jet<N> operator+(double b, const Jet<N>& a) { return a + b; }
template <int N> Jet<N> operator-(const Jet<N>& a, double b) { Jet<N> r = a; r.c[0] -= b; return r; }
template <int N> Jet<N> operator-(double b, const Jet<N>& a) { return (-a) + b; }
template <int N> Jet<N> operator*(const Jet<N>& a, double b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k] * b;
    return r;
}
template <int N> Jet<N> operator*(double b, const Jet<N>& a) { return a * b; }
template <int N> Jet<N> operator/(const Jet<N>& a, double b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) r.c[k] = a.c[k] / b;
    return r;
}
template <int N> Jet<N> operator/(double b, const Jet<N>& a) { return Jet<N>(b) / a; }

// f = a^p, from a f' = p a' f
template <int N> Jet<N> pow(const Jet<N>& a, double p) {
    Jet<N> r;
    r.c[0] = std::pow(a.c[0], p);
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += (p * i - (k - i)) * a.c[i] * r.c[k - i];
        r.c[k] = s / (k * a.c[0]);
    }
    return r;
}
template <int N> Jet<N> sqrt(const Jet<N>& a) { return pow(a, 0.5); }

template <int N> Jet<N> exp(const Jet<N>& a) {
    Jet<N> r;
    r.c[0] = std::exp(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += i * a.c[i] * r.c[k - i];
        r.c[k] = s / k;
    }
    return r;
}
template <int N> Jet<N> log(const Jet<N>& a) {
    Jet<N> r;
    r.c[0] = std::log(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = k * a.c[k];
        for (int i = 1; i < k; ++i) s -= i * r.c[i] * a.c[k - i];
        r.c[k] = s / (k * a.c[0]);
    }
    return r;
}
template <int N> void sincos(const Jet<N>& a, Jet<N>& s, Jet<N>& co) {
    s = Jet<N>();
    co = Jet<N>();
    s.c[0] = std::sin(a.c[0]);
    co.c[0] = std::cos(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double ss = 0.0, cc = 0.0;
        for (int i = 1; i <= k; ++i) {
            ss += i * a.c[i] * co.c[k - i];
            cc -= i * a.c[i] * s.c[k - i];
        }
        s.c[k] = ss / k;
        co.c[k] = cc / k;
    }
}
template <int N> Jet<N> sin(const Jet<N>& a) { Jet<N> s, c; sincos(a, s, c); return s; }
template <int N> Jet<N> cos(const Jet<N>& a) { Jet<N> s, c; sincos(a, s, c); return c; }

// plain-double overloads so templated formulas compile for T = double
inline double value_of(double x) { return x; }
template <int N> double value_of(const Jet<N>& x) { return x.c[0]; }

}  // namespace blowup
