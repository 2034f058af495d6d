#pragma once
#include <cstddef>
#include <string>

namespace blowup::simd {

enum class Isa { Scalar, Avx2, Neon };

Isa detected_isa();
Isa active_isa();
// Force a kernel family (tests, config). Falls back to scalar if unsupported.
void set_isa(Isa isa);
std::string isa_name(Isa isa);

// Lane layout shared by every variant: four partial sums over i mod 4,
// combined as (s0 + s1) + (s2 + s3). Keeps results bit-identical.
double dot(const double* a, const double* b, std::size_t n);
// y = M x, M row-major rows x cols
void matvec(const double* M, std::size_t rows, std::size_t cols, const double* x, double* y);

// Interior right-hand side of the comoving-frame system, points [i0, i1).
// v, w, pot, force, R are indexed directly; the caller guarantees i-3 .. i+2 valid.
struct StencilArgs {
    const double* v;
    const double* w;
    const double* R;
    const double* pot;    // 5 W^4 (zero for the free test)
    const double* force;  // source term added to dw
    double beta;
    double inv_h;
    double inv_h2;
    double* dv;
    double* dw;
};
void stencil_rhs(const StencilArgs& a, std::size_t i0, std::size_t i1);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void stencil_scalar(const StencilArgs& a, std::size_t i0, std::size_t i1);
double dot_avx2(const double* a, const double* b, std::size_t n);
void stencil_avx2(const StencilArgs& a, std::size_t i0, std::size_t i1);
double dot_neon(const double* a, const double* b, std::size_t n);
void stencil_neon(const StencilArgs& a, std::size_t i0, std::size_t i1);
}  // namespace detail

}  // namespace blowup::simd
