#include "blowup/chebyshev.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "blowup/errors.hpp"
#include "blowup/simd.hpp"

namespace blowup {

std::vector<double> lobatto_points(int N, double a, double b) {
    std::vector<double> x(N + 1);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int k = 0; k <= N; ++k) x[k] = mid - half * std::cos(std::numbers::pi * k / N);
    x[0] = a;
    x[N] = b;
    return x;
}

namespace {
const std::vector<double>& transform_matrix(int N) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[N];
    if (!slot) {
        auto m = std::make_unique<std::vector<double>>((N + 1) * (N + 1));
        for (int j = 0; j <= N; ++j) {
            double wj = (j == 0 || j == N) ? 0.5 : 1.0;
            for (int k = 0; k <= N; ++k) {
                double wk = (k == 0 || k == N) ? 0.5 : 1.0;
                // ascending node k is cos(pi (N-k)/N)
                int jk = (j * (N - k)) % (2 * N);
                (*m)[j * (N + 1) + k] = 2.0 / N * wj * wk * std::cos(std::numbers::pi * jk / N);
            }
        }
        slot = std::move(m);
    }
    return *slot;
}
}  // namespace

std::vector<double> lobatto_to_coeffs(const std::vector<double>& vals) {
    if (vals.size() < 2) throw ValidationError("lobatto_to_coeffs: need at least two nodes");
    int N = static_cast<int>(vals.size()) - 1;
    const auto& M = transform_matrix(N);
    std::vector<double> c(N + 1);
    simd::matvec(M.data(), N + 1, N + 1, vals.data(), c.data());
    return c;
}

std::vector<std::complex<double>> lobatto_to_coeffs(const std::vector<std::complex<double>>& vals) {
    std::vector<double> re(vals.size()), im(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        re[i] = vals[i].real();
        im[i] = vals[i].imag();
    }
    auto cr = lobatto_to_coeffs(re), ci = lobatto_to_coeffs(im);
    std::vector<std::complex<double>> c(vals.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = {cr[i], ci[i]};
    return c;
}

}  // namespace blowup
