#pragma once

#include <complex>
#include <cstddef>

namespace qiopa::simd {

using cplx = std::complex<double>;

// Inputs for one diagonal L of a single-mode operator, evaluated at a batch of
// points x = |beta|^2. out[p] = sum_m d[m] * sign^m * g_m^{(L)}(x[p]) with
//   g_m^{(L)}(x) = sqrt(m!/(m+L)!) x^{L/2} e^{-x/2} L_m^{(L)}(x)
// a[m] = sqrt(m (m+L)), b[m] = 1/sqrt((m+1)(m+L+1)), log_norm = lgamma(L+1)/2.
struct LaguerreDiag {
    const double* d_re;
    const double* d_im;
    std::size_t len;
    int L;
    double sign;
    const double* a;
    const double* b;
    double log_norm;
};

struct KernelTable {
    const char* name;
    cplx (*cdot)(const cplx* a, const cplx* b, std::size_t n);  // sum conj(a) b
    double (*norm2)(const cplx* a, std::size_t n);
    void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
    void (*laguerre_sum)(const LaguerreDiag& diag, const double* x, std::size_t npts,
                         double* out_re, double* out_im);
};

const KernelTable& scalar_kernels();
// nullptr when the binary or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();
// Chosen once: AVX2 when available unless QIOPA_KERNELS=scalar.
const KernelTable& kernels();

}  // namespace qiopa::simd
