// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "laguerre_step.hpp"
#include "qiopa/kernels.hpp"

namespace qiopa::simd {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

cplx cdot_avx2(const cplx* a, const cplx* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d rr = _mm256_setzero_pd(), ri = _mm256_setzero_pd();
    std::size_t i = 0;
    // two complex numbers per register: (re0 im0 re1 im1)
    for (; i + 2 <= n; i += 2) {
        __m256d va = _mm256_loadu_pd(pa + 2 * i), vb = _mm256_loadu_pd(pb + 2 * i);
        rr = _mm256_fmadd_pd(va, vb, rr);
        ri = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0b0101), ri);
    }
    alignas(32) double t[4];
    _mm256_store_pd(t, ri);
    double re = hsum(rr), im = t[0] - t[1] + t[2] - t[3];
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

double norm2_avx2(const cplx* a, std::size_t n) {
    const double* p = reinterpret_cast<const double*>(a);
    const std::size_t m = 2 * n;
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= m; i += 8) {
        __m256d x = _mm256_loadu_pd(p + i), y = _mm256_loadu_pd(p + i + 4);
        s0 = _mm256_fmadd_pd(x, x, s0);
        s1 = _mm256_fmadd_pd(y, y, s1);
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; i < m; ++i) s += p[i] * p[i];
    return s;
}

void axpy_avx2(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    const double* px = reinterpret_cast<const double*>(x);
    double* py = reinterpret_cast<double*>(y);
    const __m256d ar = _mm256_set1_pd(alpha.real()), ai = _mm256_set1_pd(alpha.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d vx = _mm256_loadu_pd(px + 2 * i);
        __m256d sw = _mm256_permute_pd(vx, 0b0101);
        __m256d t = _mm256_addsub_pd(_mm256_mul_pd(ar, vx), _mm256_mul_pd(ai, sw));
        _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), t));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four grid points per register; recurrence coefficients are shared scalars.
void laguerre_avx2(const LaguerreDiag& d, const double* x, std::size_t npts, double* ore, double* oim) {
    std::size_t p = 0;
    if (d.len > 0) {
        for (; p + 4 <= npts; p += 4) {
            alignas(32) double e[4], f[4];
            bool special = false;
            for (int k = 0; k < 4; ++k) {
                if (x[p + k] == 0.0 && d.L > 0) special = true;
                e[k] = detail::log_g0(x[p + k], d.L, d.log_norm);
                f[k] = std::exp(e[k]);
            }
            if (special) {
                for (int k = 0; k < 4; ++k) detail::laguerre_point(d, x[p + k], ore[p + k], oim[p + k]);
                continue;
            }
            const __m256d vx = _mm256_loadu_pd(x + p);
            const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
            const __m256d lim = _mm256_set1_pd(detail::kRescaleAbove);
            __m256d vf = _mm256_load_pd(f);
            __m256d g = _mm256_set1_pd(1.0), gp = _mm256_setzero_pd();
            __m256d are = _mm256_setzero_pd(), aim = _mm256_setzero_pd();
            __m256d base = _mm256_sub_pd(_mm256_set1_pd(d.L + 1.0), vx);
            double sm = 1;
            for (std::size_t m = 0;; ++m) {
                __m256d w = _mm256_mul_pd(g, vf);
                are = _mm256_fmadd_pd(_mm256_set1_pd(sm * d.d_re[m]), w, are);
                aim = _mm256_fmadd_pd(_mm256_set1_pd(sm * d.d_im[m]), w, aim);
                if (m + 1 == d.len) break;
                __m256d coef = _mm256_add_pd(base, _mm256_set1_pd(2.0 * m));
                __m256d gn = _mm256_fmsub_pd(coef, g, _mm256_mul_pd(_mm256_set1_pd(d.a[m]), gp));
                gn = _mm256_mul_pd(gn, _mm256_set1_pd(d.b[m]));
                gp = g;
                g = gn;
                sm *= d.sign;
                int big = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_and_pd(g, absmask), lim, _CMP_GT_OQ));
                if (big) {
                    alignas(32) double tg[4], tgp[4];
                    _mm256_store_pd(tg, g);
                    _mm256_store_pd(tgp, gp);
                    for (int k = 0; k < 4; ++k)
                        if (big & (1 << k)) {
                            tg[k] *= detail::kRescaleBy;
                            tgp[k] *= detail::kRescaleBy;
                            e[k] += detail::kLogRescale;
                            f[k] = std::exp(e[k]);
                        }
                    g = _mm256_load_pd(tg);
                    gp = _mm256_load_pd(tgp);
                    vf = _mm256_load_pd(f);
                }
            }
            _mm256_storeu_pd(ore + p, are);
            _mm256_storeu_pd(oim + p, aim);
        }
    }
    for (; p < npts; ++p) detail::laguerre_point(d, x[p], ore[p], oim[p]);
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable t{"avx2", cdot_avx2, norm2_avx2, axpy_avx2, laguerre_avx2};
    return t;
}

}  // namespace qiopa::simd
