#include "laguerre_step.hpp"
#include "qiopa/kernels.hpp"

namespace qiopa::simd {

namespace {

cplx cdot_scalar(const cplx* a, const cplx* b, std::size_t n) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

double norm2_scalar(const cplx* a, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

void axpy_scalar(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void laguerre_scalar(const LaguerreDiag& d, const double* x, std::size_t npts, double* ore, double* oim) {
    for (std::size_t p = 0; p < npts; ++p) detail::laguerre_point(d, x[p], ore[p], oim[p]);
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable t{"scalar", cdot_scalar, norm2_scalar, axpy_scalar, laguerre_scalar};
    return t;
}

}  // namespace qiopa::simd
