#if defined(__aarch64__)
#include <arm_neon.h>

#include "blowup/simd.hpp"

namespace blowup::simd::detail {

namespace {
constexpr double c_up[5] = {-1.0 / 12.0, 0.5, -1.5, 5.0 / 6.0, 0.25};
constexpr double c_d2[5] = {-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0};
}  // namespace

// two 2-lane accumulators reproduce the 4-lane layout of the scalar path
double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    }
    double s[4];
    vst1q_f64(s, lo);
    vst1q_f64(s + 2, hi);
    for (int l = 0; i < n; ++i, ++l) s[l] = s[l] + a[i] * b[i];
    return (s[0] + s[1]) + (s[2] + s[3]);
}

void stencil_neon(const StencilArgs& a, std::size_t i0, std::size_t i1) {
    const double* v = a.v;
    const double* w = a.w;
    std::size_t i = i0;
    for (; i + 2 <= i1; i += 2) {
        auto up = [&](const double* p) {
            float64x2_t s = vmulq_n_f64(vld1q_f64(p + i - 3), c_up[0]);
            s = vaddq_f64(s, vmulq_n_f64(vld1q_f64(p + i - 2), c_up[1]));
            s = vaddq_f64(s, vmulq_n_f64(vld1q_f64(p + i - 1), c_up[2]));
            s = vaddq_f64(s, vmulq_n_f64(vld1q_f64(p + i), c_up[3]));
            s = vaddq_f64(s, vmulq_n_f64(vld1q_f64(p + i + 1), c_up[4]));
            return vmulq_n_f64(s, a.inv_h);
        };
        float64x2_t dv = up(v), dw = up(w);
        float64x2_t vrr = vmulq_n_f64(vld1q_f64(v + i - 2), c_d2[0]);
        vrr = vaddq_f64(vrr, vmulq_n_f64(vld1q_f64(v + i - 1), c_d2[1]));
        vrr = vaddq_f64(vrr, vmulq_n_f64(vld1q_f64(v + i), c_d2[2]));
        vrr = vaddq_f64(vrr, vmulq_n_f64(vld1q_f64(v + i + 1), c_d2[3]));
        vrr = vmulq_n_f64(vaddq_f64(vrr, vmulq_n_f64(vld1q_f64(v + i + 2), c_d2[4])), a.inv_h2);
        float64x2_t Ri = vld1q_f64(a.R + i), vi = vld1q_f64(v + i);
        float64x2_t outv = vsubq_f64(vld1q_f64(w + i), vmulq_n_f64(vsubq_f64(vmulq_f64(Ri, dv), vi), a.beta));
        float64x2_t outw = vaddq_f64(vaddq_f64(vrr, vmulq_f64(vld1q_f64(a.pot + i), vi)), vld1q_f64(a.force + i));
        outw = vsubq_f64(outw, vmulq_n_f64(vmulq_f64(Ri, dw), a.beta));
        vst1q_f64(a.dv + i, outv);
        vst1q_f64(a.dw + i, outw);
    }
    if (i < i1) stencil_scalar(a, i, i1);
}

}  // namespace blowup::simd::detail
#endif
