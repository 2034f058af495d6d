#include "blowup/simd.hpp"

#include <atomic>

namespace blowup::simd {

namespace {
Isa detect() {
#if defined(__aarch64__)
    return Isa::Neon;
#elif defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) return Isa::Avx2;
    return Isa::Scalar;
#else
    return Isa::Scalar;
#endif
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

constexpr double c_up[5] = {-1.0 / 12.0, 0.5, -1.5, 5.0 / 6.0, 0.25};
constexpr double c_d2[5] = {-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0};
}  // namespace

Isa detected_isa() {
    static const Isa d = detect();
    return d;
}

Isa active_isa() { return current().load(); }

void set_isa(Isa isa) {
    if (isa != Isa::Scalar && isa != detected_isa()) isa = Isa::Scalar;
    current().store(isa);
}

std::string isa_name(Isa isa) {
    switch (isa) {
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
        default: return "scalar";
    }
}

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) s[l] = s[l] + a[i + l] * b[i + l];
    for (int l = 0; i < n; ++i, ++l) s[l] = s[l] + a[i] * b[i];
    return (s[0] + s[1]) + (s[2] + s[3]);
}

void stencil_scalar(const StencilArgs& a, std::size_t i0, std::size_t i1) {
    const double* v = a.v;
    const double* w = a.w;
    for (std::size_t i = i0; i < i1; ++i) {
        double dv = ((((c_up[0] * v[i - 3] + c_up[1] * v[i - 2]) + c_up[2] * v[i - 1]) + c_up[3] * v[i]) +
                     c_up[4] * v[i + 1]) * a.inv_h;
        double dw = ((((c_up[0] * w[i - 3] + c_up[1] * w[i - 2]) + c_up[2] * w[i - 1]) + c_up[3] * w[i]) +
                     c_up[4] * w[i + 1]) * a.inv_h;
        double vrr = ((((c_d2[0] * v[i - 2] + c_d2[1] * v[i - 1]) + c_d2[2] * v[i]) + c_d2[3] * v[i + 1]) +
                      c_d2[4] * v[i + 2]) * a.inv_h2;
        a.dv[i] = w[i] - a.beta * (a.R[i] * dv - v[i]);
        a.dw[i] = ((vrr + a.pot[i] * v[i]) + a.force[i]) - a.beta * (a.R[i] * dw);
    }
}

#if !(defined(__x86_64__) || defined(__i386__))
double dot_avx2(const double* a, const double* b, std::size_t n) { return dot_scalar(a, b, n); }
void stencil_avx2(const StencilArgs& a, std::size_t i0, std::size_t i1) { stencil_scalar(a, i0, i1); }
#endif
#if !defined(__aarch64__)
double dot_neon(const double* a, const double* b, std::size_t n) { return dot_scalar(a, b, n); }
void stencil_neon(const StencilArgs& a, std::size_t i0, std::size_t i1) { stencil_scalar(a, i0, i1); }
#endif

}  // namespace detail

double dot(const double* a, const double* b, std::size_t n) {
    switch (active_isa()) {
        case Isa::Avx2: return detail::dot_avx2(a, b, n);
        case Isa::Neon: return detail::dot_neon(a, b, n);
        default: return detail::dot_scalar(a, b, n);
    }
}

void matvec(const double* M, std::size_t rows, std::size_t cols, const double* x, double* y) {
    for (std::size_t r = 0; r < rows; ++r) y[r] = dot(M + r * cols, x, cols);
}

void stencil_rhs(const StencilArgs& a, std::size_t i0, std::size_t i1) {
    switch (active_isa()) {
        case Isa::Avx2: detail::stencil_avx2(a, i0, i1); break;
        case Isa::Neon: detail::stencil_neon(a, i0, i1); break;
        default: detail::stencil_scalar(a, i0, i1);
    }
}

}  // namespace blowup::simd
