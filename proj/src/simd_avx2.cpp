#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

#include "blowup/simd.hpp"

namespace blowup::simd::detail {

namespace {
constexpr double c_up[5] = {-1.0 / 12.0, 0.5, -1.5, 5.0 / 6.0, 0.25};
constexpr double c_d2[5] = {-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0};
}  // namespace

// mul + add only: an FMA would round differently from the scalar path
__attribute__((target("avx2"))) double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    alignas(32) double s[4];
    _mm256_store_pd(s, acc);
    for (int l = 0; i < n; ++i, ++l) s[l] = s[l] + a[i] * b[i];
    return (s[0] + s[1]) + (s[2] + s[3]);
}

__attribute__((target("avx2"))) void stencil_avx2(const StencilArgs& a, std::size_t i0, std::size_t i1) {
    const double* v = a.v;
    const double* w = a.w;
    const __m256d u0 = _mm256_set1_pd(c_up[0]), u1 = _mm256_set1_pd(c_up[1]), u2 = _mm256_set1_pd(c_up[2]),
                  u3 = _mm256_set1_pd(c_up[3]), u4 = _mm256_set1_pd(c_up[4]);
    const __m256d d0 = _mm256_set1_pd(c_d2[0]), d1 = _mm256_set1_pd(c_d2[1]), d2 = _mm256_set1_pd(c_d2[2]),
                  d3 = _mm256_set1_pd(c_d2[3]), d4 = _mm256_set1_pd(c_d2[4]);
    const __m256d ih = _mm256_set1_pd(a.inv_h), ih2 = _mm256_set1_pd(a.inv_h2), beta = _mm256_set1_pd(a.beta);
    std::size_t i = i0;
    for (; i + 4 <= i1; i += 4) {
        __m256d dv = _mm256_mul_pd(u0, _mm256_loadu_pd(v + i - 3));
        dv = _mm256_add_pd(dv, _mm256_mul_pd(u1, _mm256_loadu_pd(v + i - 2)));
        dv = _mm256_add_pd(dv, _mm256_mul_pd(u2, _mm256_loadu_pd(v + i - 1)));
        dv = _mm256_add_pd(dv, _mm256_mul_pd(u3, _mm256_loadu_pd(v + i)));
        dv = _mm256_mul_pd(_mm256_add_pd(dv, _mm256_mul_pd(u4, _mm256_loadu_pd(v + i + 1))), ih);
        __m256d dw = _mm256_mul_pd(u0, _mm256_loadu_pd(w + i - 3));
        dw = _mm256_add_pd(dw, _mm256_mul_pd(u1, _mm256_loadu_pd(w + i - 2)));
        dw = _mm256_add_pd(dw, _mm256_mul_pd(u2, _mm256_loadu_pd(w + i - 1)));
        dw = _mm256_add_pd(dw, _mm256_mul_pd(u3, _mm256_loadu_pd(w + i)));
        dw = _mm256_mul_pd(_mm256_add_pd(dw, _mm256_mul_pd(u4, _mm256_loadu_pd(w + i + 1))), ih);
        __m256d vrr = _mm256_mul_pd(d0, _mm256_loadu_pd(v + i - 2));
        vrr = _mm256_add_pd(vrr, _mm256_mul_pd(d1, _mm256_loadu_pd(v + i - 1)));
        vrr = _mm256_add_pd(vrr, _mm256_mul_pd(d2, _mm256_loadu_pd(v + i)));
        vrr = _mm256_add_pd(vrr, _mm256_mul_pd(d3, _mm256_loadu_pd(v + i + 1)));
        vrr = _mm256_mul_pd(_mm256_add_pd(vrr, _mm256_mul_pd(d4, _mm256_loadu_pd(v + i + 2))), ih2);
        __m256d Ri = _mm256_loadu_pd(a.R + i), vi = _mm256_loadu_pd(v + i);
        __m256d outv = _mm256_sub_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(beta, _mm256_sub_pd(_mm256_mul_pd(Ri, dv), vi)));
        __m256d outw = _mm256_add_pd(_mm256_add_pd(vrr, _mm256_mul_pd(_mm256_loadu_pd(a.pot + i), vi)), _mm256_loadu_pd(a.force + i));
        outw = _mm256_sub_pd(outw, _mm256_mul_pd(beta, _mm256_mul_pd(Ri, dw)));
        _mm256_storeu_pd(a.dv + i, outv);
        _mm256_storeu_pd(a.dw + i, outw);
    }
    if (i < i1) stencil_scalar(a, i, i1);
}

}  // namespace blowup::simd::detail
#endif
