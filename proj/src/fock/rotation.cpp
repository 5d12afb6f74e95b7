#include <cmath>
#include <string>
#include <vector>

#include "qiopa/fock.hpp"

namespace qiopa {

namespace {

// Column n of the sector-N matrix is the image of |n, N-n> (old labels) in
// the new labels, indexed by the new-label-0 count p. Columns are built by
// applying one creation operator to the sector N-1 columns, so every entry
// stays bounded by one and no factorials appear.
class SectorMaps {
public:
    explicit SectorMaps(const Eigen::Matrix2cd& W) : W_(W), cur_(1, cplx(1)), N_(0) {}

    void advance() {
        int N = N_ + 1;
        std::vector<cplx> next(std::size_t(N + 1) * (N + 1), cplx(0));
        auto col_prev = [&](int n) { return &cur_[std::size_t(n) * N]; };
        auto create = [&](const cplx* in, cplx w0, cplx w1, double scale, cplx* out) {
            // in: sector N-1 vector indexed by p; out: sector N vector
            for (int p = 0; p < N; ++p) {
                cplx v = in[p] * scale;
                if (v == cplx(0)) continue;
                out[p + 1] += w0 * std::sqrt(double(p + 1)) * v;
                out[p] += w1 * std::sqrt(double(N - p)) * v;
            }
        };
        create(col_prev(0), W_(1, 0), W_(1, 1), 1.0 / std::sqrt(double(N)), &next[0]);
        for (int n = 1; n <= N; ++n)
            create(col_prev(n - 1), W_(0, 0), W_(0, 1), 1.0 / std::sqrt(double(n)),
                   &next[std::size_t(n) * (N + 1)]);
        cur_.swap(next);
        N_ = N;
    }

    int N() const { return N_; }
    cplx operator()(int p, int n) const { return cur_[std::size_t(n) * (N_ + 1) + p]; }

private:
    Eigen::Matrix2cd W_;
    std::vector<cplx> cur_;
    int N_;
};

void check_mode(const ModeLayout& l, int m) {
    if (m < 0 || m >= l.spatial_modes())
        throw ValidationError("invalid spatial mode index " + std::to_string(m));
    if (l.polarizations() != 2)
        throw ValidationError("polarization transform needs two polarization sub-modes");
}

}  // namespace

void apply_mode_unitary_inplace(const ModeLayout& l, cplx* amps, const Eigen::Matrix2cd& W, int m,
                                double* leakage) {
    check_mode(l, m);
    const int c = l.cutoff(m);
    const int s0 = 2 * m, s1 = 2 * m + 1;
    const std::size_t st0 = l.stride(s0), st1 = l.stride(s1);
    const std::size_t period = st0 * (c + 1);

    // bases: flat indices with zero photons in both sub-modes of mode m
    std::vector<std::size_t> bases;
    for (std::size_t hi = 0; hi < l.dimension(); hi += period)
        for (std::size_t lo = 0; lo < st1; ++lo) bases.push_back(hi + lo);

    double leak = 0;
    SectorMaps T(W);
    std::vector<cplx> in, out;
    for (int N = 0; N <= 2 * c; ++N) {
        if (N > 0) T.advance();
        int lo = std::max(0, N - c), hi = std::min(N, c);
        in.assign(std::size_t(hi - lo + 1), cplx(0));
        out.assign(std::size_t(N + 1), cplx(0));
        for (std::size_t b : bases) {
            bool any = false;
            for (int n = lo; n <= hi; ++n) {
                in[n - lo] = amps[b + std::size_t(n) * st0 + std::size_t(N - n) * st1];
                any |= in[n - lo] != cplx(0);
            }
            if (!any) continue;
            int plo = leakage ? 0 : lo, phi = leakage ? N : hi;
            for (int p = plo; p <= phi; ++p) {
                cplx s = 0;
                for (int n = lo; n <= hi; ++n) s += T(p, n) * in[n - lo];
                out[p] = s;
            }
            for (int p = lo; p <= hi; ++p) amps[b + std::size_t(p) * st0 + std::size_t(N - p) * st1] = out[p];
            if (leakage) {
                for (int p = 0; p < lo; ++p) leak += std::norm(out[p]);
                for (int p = hi + 1; p <= N; ++p) leak += std::norm(out[p]);
            }
        }
    }
    if (leakage) *leakage += leak;
}

FockState apply_mode_unitary(const FockState& s, const Eigen::Matrix2cd& W, int m, double* leakage) {
    Vec v = s.amplitudes();
    apply_mode_unitary_inplace(s.layout(), v.data(), W, m, leakage);
    return FockState(s.layout(), std::move(v), s.truncation_deficit());
}

DensityOperator apply_mode_unitary(const DensityOperator& r, const Eigen::Matrix2cd& W, int m,
                                   double* leakage) {
    const ModeLayout& l = r.layout();
    Mat a = r.matrix();
    double lk = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) apply_mode_unitary_inplace(l, a.col(j).data(), W, m, nullptr);
    Mat b = a.adjoint();
    for (Eigen::Index j = 0; j < b.cols(); ++j) apply_mode_unitary_inplace(l, b.col(j).data(), W, m, nullptr);
    Mat out = b.adjoint();
    if (leakage) {
        lk = r.trace() - out.trace().real();
        *leakage += std::max(0.0, lk);
    }
    return DensityOperator(l, std::move(out));
}

FockState rotate_polarization(const FockState& s, const PolarizationFrame& f, int m) {
    return apply_mode_unitary(s, f.basis(), m);
}

DensityOperator rotate_polarization(const DensityOperator& r, const PolarizationFrame& f, int m) {
    return apply_mode_unitary(r, f.basis(), m);
}

FockState change_labels(const FockState& s, const Eigen::Matrix2cd& from, const Eigen::Matrix2cd& to,
                        int m, double* leakage) {
    return apply_mode_unitary(s, from * to.adjoint(), m, leakage);
}

}  // namespace qiopa
