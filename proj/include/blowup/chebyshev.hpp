#pragma once
#include <complex>
#include <vector>

namespace blowup {

// Chebyshev series on [a, b].
template <class V>
struct ChebSeries {
    double a = -1.0, b = 1.0;
    std::vector<V> c;

    V eval(double x) const {
        double t = (2.0 * x - a - b) / (b - a);
        V b1{}, b2{};
        for (std::size_t k = c.size(); k-- > 1;) {
            V tmp = 2.0 * t * b1 - b2 + c[k];
            b2 = b1;
            b1 = tmp;
        }
        return t * b1 - b2 + (c.empty() ? V{} : c[0]);
    }

    ChebSeries derivative() const {
        ChebSeries d;
        d.a = a;
        d.b = b;
        std::size_t n = c.size();
        if (n <= 1) {
            d.c.assign(1, V{});
            return d;
        }
        d.c.assign(n - 1, V{});
        for (std::size_t k = n - 1; k-- > 0;) {
            V next = (k + 2 < n - 1) ? d.c[k + 2] : V{};
            d.c[k] = next + 2.0 * double(k + 1) * c[k + 1];
        }
        d.c[0] *= 0.5;
        double s = 2.0 / (b - a);
        for (auto& v : d.c) v *= s;
        return d;
    }
};

// Ascending Chebyshev-Lobatto points a = x_0 < ... < x_N = b.
std::vector<double> lobatto_points(int N, double a, double b);

// Values at ascending Lobatto points -> coefficients (matrix product, SIMD dot kernels).
std::vector<double> lobatto_to_coeffs(const std::vector<double>& vals);
std::vector<std::complex<double>> lobatto_to_coeffs(const std::vector<std::complex<double>>& vals);

template <class V>
ChebSeries<V> cheb_from_values(const std::vector<V>& vals, double a, double b) {
    ChebSeries<V> s;
    s.a = a;
    s.b = b;
    s.c = lobatto_to_coeffs(vals);
    return s;
}

}  // namespace blowup
