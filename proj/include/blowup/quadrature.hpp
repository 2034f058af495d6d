#pragma once
#include <vector>

namespace blowup {

// Gauss-Legendre rule on [-1, 1], full node set.
struct GLRule {
    std::vector<double> x;
    std::vector<double> w;
};

// Supported orders: 8, 12, 16, 20, 30. Backed by boost::math::quadrature::gauss.
const GLRule& gauss_legendre(int n);

template <class F>
auto gl_integrate(const GLRule& rule, double a, double b, F&& f) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    decltype(f(a)) s{};
    for (std::size_t k = 0; k < rule.x.size(); ++k) s += rule.w[k] * f(c + h * rule.x[k]);
    return s * h;
}

}  // namespace blowup
