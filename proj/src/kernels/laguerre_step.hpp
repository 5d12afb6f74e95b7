#pragma once

#include <cmath>

#include "qiopa/kernels.hpp"

namespace qiopa::simd::detail {

// Running values are kept as ghat * exp(e); ghat is rescaled before it can
// overflow. |g| <= 1 always (matrix elements of a unitary), so exp(e) <= 1/|ghat|.
inline constexpr double kRescaleAbove = 1e100;
inline constexpr double kRescaleBy = 1e-100;
inline constexpr double kLogRescale = 230.25850929940458;  // 100 ln 10

inline double log_g0(double x, int L, double log_norm) {
    double lx = L > 0 ? 0.5 * L * std::log(x) : 0.0;
    return lx - 0.5 * x - log_norm;
}

inline void laguerre_point(const LaguerreDiag& d, double x, double& sre, double& sim) {
    sre = sim = 0;
    if (d.len == 0) return;
    if (x == 0.0 && d.L > 0) return;
    double e = log_g0(x, d.L, d.log_norm);
    double f = std::exp(e);
    double gp = 0, g = 1, sm = 1;
    const double base = d.L + 1 - x;
    for (std::size_t m = 0;; ++m) {
        double w = sm * g * f;
        sre += d.d_re[m] * w;
        sim += d.d_im[m] * w;
        if (m + 1 == d.len) break;
        double gn = ((base + 2.0 * m) * g - d.a[m] * gp) * d.b[m];
        gp = g;
        g = gn;
        sm *= d.sign;
        if (std::abs(g) > kRescaleAbove) {
            g *= kRescaleBy;
            gp *= kRescaleBy;
            e += kLogRescale;
            f = std::exp(e);
        }
    }
}

}  // namespace qiopa::simd::detail
