#include <cmath>
#include <string>

#include "qiopa/fock.hpp"
#include "qiopa/kernels.hpp"

namespace qiopa {

namespace {

void guard_mixed(std::size_t dim) {
    if (dim > kMaxMixedDimension)
        throw DimensionGuardError("mixed-state dimension " + std::to_string(dim) + " exceeds guard " +
                                  std::to_string(kMaxMixedDimension));
}

}  // namespace

FockState::FockState(ModeLayout layout, Vec amplitudes, double deficit)
    : layout_(std::move(layout)), amps_(std::move(amplitudes)), deficit_(deficit) {
    if (std::size_t(amps_.size()) != layout_.dimension())
        throw LayoutMismatchError("amplitude vector size does not match layout dimension");
}

double FockState::norm2() const {
    return simd::kernels().norm2(amps_.data(), std::size_t(amps_.size()));
}

double FockState::mean_photons(int sub) const {
    if (sub < 0 || sub >= layout_.sub_modes()) throw ValidationError("no such sub-mode");
    double s = 0;
    for (std::size_t i = 0; i < layout_.dimension(); ++i) {
        double p = std::norm(amps_[i]);
        if (p != 0) s += p * layout_.occupations(i)[sub];
    }
    return s;
}

double FockState::mean_photons_spatial(int m) const {
    double s = 0;
    for (int p = 0; p < layout_.polarizations(); ++p) s += mean_photons(m * layout_.polarizations() + p);
    return s;
}

DensityOperator::DensityOperator(ModeLayout layout, Mat matrix)
    : layout_(std::move(layout)), rho_(std::move(matrix)) {
    guard_mixed(layout_.dimension());
    if (std::size_t(rho_.rows()) != layout_.dimension() || rho_.rows() != rho_.cols())
        throw LayoutMismatchError("density matrix shape does not match layout");
}

DensityOperator DensityOperator::from_pure(const FockState& s) {
    guard_mixed(s.layout().dimension());
    return DensityOperator(s.layout(), s.amplitudes() * s.amplitudes().adjoint());
}

double DensityOperator::hermiticity_defect() const {
    return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
    Mat h = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double DensityOperator::mean_photons(int sub) const {
    if (sub < 0 || sub >= layout_.sub_modes()) throw ValidationError("no such sub-mode");
    double s = 0;
    for (std::size_t i = 0; i < layout_.dimension(); ++i)
        s += rho_(i, i).real() * layout_.occupations(i)[sub];
    return s;
}

void DensityOperator::validate(double eps) const {
    if (hermiticity_defect() > 1e-10) throw NumericalGuardError("density operator not Hermitian");
    double t = trace();
    if (t > 1 + 1e-10 || t <= 1 - eps) throw NumericalGuardError("density operator trace out of range");
    if (min_eigenvalue() < -1e-10) throw NumericalGuardError("density operator has negative eigenvalue");
}

DensityOperator Ensemble::to_density() const {
    guard_mixed(layout.dimension());
    return DensityOperator(layout, columns * columns.adjoint());
}

Eigen::Matrix2cd PolarizationFrame::basis() const {
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    cplx e = std::polar(1.0, phi);
    Eigen::Matrix2cd b;
    b << c, e * s, -std::conj(e) * s, c;
    return b;
}

Eigen::Matrix2cd equatorial_basis(double phi) {
    cplx e = std::polar(M_SQRT1_2, phi);
    Eigen::Matrix2cd b;
    b << M_SQRT1_2, e, M_SQRT1_2, -e;
    return b;
}

FockState build_fock(const ModeLayout& layout, const Occ& occ) {
    Vec v = Vec::Zero(layout.dimension());
    v[layout.flat_index(occ)] = 1.0;
    return FockState(layout, v);
}

FockState vacuum(const ModeLayout& layout) { return build_fock(layout, {0, 0, 0, 0}); }

DensityOperator partial_trace(const DensityOperator& r, int keep) {
    const ModeLayout& l = r.layout();
    if (l.spatial_modes() != 2) throw ValidationError("partial_trace needs two spatial modes");
    if (keep != 0 && keep != 1) throw ValidationError("partial_trace: keep must be 0 or 1");
    std::size_t d0 = l.spatial_dimension(0), d1 = l.spatial_dimension(1);
    std::size_t dk = keep == 0 ? d0 : d1;
    Mat out = Mat::Zero(dk, dk);
    const Mat& m = r.matrix();
    if (keep == 0) {
        for (std::size_t a = 0; a < d0; ++a)
            for (std::size_t b = 0; b < d0; ++b) {
                cplx s = 0;
                for (std::size_t e = 0; e < d1; ++e) s += m(a * d1 + e, b * d1 + e);
                out(a, b) = s;
            }
    } else {
        for (std::size_t e = 0; e < d0; ++e) out += m.block(e * d1, e * d1, d1, d1);
    }
    return DensityOperator(l.single(keep), out);
}

DensityOperator reduced_density(const FockState& s, int keep) {
    const ModeLayout& l = s.layout();
    if (l.spatial_modes() != 2) throw ValidationError("reduced_density needs two spatial modes");
    std::size_t d0 = l.spatial_dimension(0), d1 = l.spatial_dimension(1);
    // psi(a, e) with mode-0 index a slowest: column-major view is d1 x d0
    Eigen::Map<const Mat> psi(s.amplitudes().data(), d1, d0);
    if (keep == 0) {
        if (d0 > kMaxMixedDimension) guard_mixed(d0);
        return DensityOperator(l.single(0), (psi.adjoint() * psi).transpose());
    }
    if (keep != 1) throw ValidationError("reduced_density: keep must be 0 or 1");
    guard_mixed(d1);
    return DensityOperator(l.single(1), psi * psi.adjoint());
}

cplx overlap(const FockState& a, const FockState& b) {
    if (a.layout() != b.layout()) throw LayoutMismatchError("overlap: layouts differ");
    return simd::kernels().cdot(a.amplitudes().data(), b.amplitudes().data(),
                                std::size_t(a.amplitudes().size()));
}

const char* library_version() { return QIOPA_VERSION; }

}  // namespace qiopa
