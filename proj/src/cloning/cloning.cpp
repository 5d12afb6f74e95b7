#include <cmath>
#include <string>

#include "qiopa/amplifier.hpp"
#include "qiopa/cloning.hpp"

namespace qiopa {

const char* to_string(CloneFlavor f) {
    return f == CloneFlavor::universal ? "universal" : "phase_covariant";
}

CloningSpec::CloningSpec(int n, int m, CloneFlavor f) : n_in(n), m_out(m), flavor(f) {
    if (n < 1) throw ValidationError("cloning needs at least one input copy");
    if (m < n) throw ValidationError("output copies M must be >= input copies N");
}

double universal_clone_fidelity(const CloningSpec& s) {
    const double N = s.n_in;
    return (N + 1 + s.beta()) / (N + 2);
}

double phase_covariant_fidelity(const CloningSpec& s) {
    if (s.n_in != 1) throw ValidationError("phase-covariant fidelity is available for N = 1 only");
    const double M = s.m_out;
    if (s.m_out % 2 == 1) return 0.5 * (1 + (M + 1) / (2 * M));
    return 0.5 * (1 + std::sqrt(M * (M + 2)) / (2 * M));
}

double unot_fidelity(int n) {
    if (n < 1) throw ValidationError("U-NOT needs at least one input copy");
    return (n + 1.0) / (n + 2.0);
}

namespace {

const ModeLayout& qubit_layout() {
    static const ModeLayout l(1, 1);
    return l;
}

std::size_t qubit_index(const ModeLayout& l, int spatial, int pol) {
    Occ o{0, 0, 0, 0};
    o[2 * spatial + pol] = 1;
    return l.flat_index(o);
}

}  // namespace

DensityOperator qubit_density(const Eigen::Vector2cd& e) {
    if (std::abs(e.squaredNorm() - 1) > 1e-12) throw ValidationError("qubit vector must be normalized");
    return qubit_density(Eigen::Matrix2cd(e * e.adjoint()));
}

DensityOperator qubit_density(const Eigen::Matrix2cd& rho) {
    const ModeLayout& l = qubit_layout();
    Mat m = Mat::Zero(l.dimension(), l.dimension());
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(qubit_index(l, 0, i), qubit_index(l, 0, j)) = rho(i, j);
    return DensityOperator(l, m);
}

Eigen::Matrix2cd qubit_block(const DensityOperator& r) {
    if (r.layout() != qubit_layout()) throw LayoutMismatchError("not a single-qubit layout");
    Eigen::Matrix2cd q;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) q(i, j) = r.matrix()(qubit_index(r.layout(), 0, i), qubit_index(r.layout(), 0, j));
    double outside = r.trace() - q.trace().real();
    if (std::abs(outside) > 1e-10) throw ValidationError("state is not a single-photon polarization qubit");
    return q;
}

CloneOutput covariant_clone_map(const PolarizationFrame& f) {
    const Eigen::Matrix2cd b = f.basis();
    const Eigen::Vector2cd psi = b.row(0).transpose(), perp = b.row(1).transpose();
    auto kron3 = [](const Eigen::Vector2cd& x, const Eigen::Vector2cd& y, const Eigen::Vector2cd& z) {
        Eigen::Matrix<cplx, 8, 1> v;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) v[4 * i + 2 * j + k] = x[i] * y[j] * z[k];
        return v;
    };
    // sqrt(2/3)|Psi Psi Psi_perp> - sqrt(1/3)|{Psi, Psi_perp}>|Psi>
    Eigen::Matrix<cplx, 8, 1> out = std::sqrt(2.0 / 3) * kron3(psi, psi, perp) -
                                    std::sqrt(1.0 / 6) * (kron3(psi, perp, psi) + kron3(perp, psi, psi));
    Eigen::Matrix2cd r[3];
    for (int party = 0; party < 3; ++party) {
        r[party].setZero();
        for (int a = 0; a < 8; ++a)
            for (int c = 0; c < 8; ++c) {
                int sh = 2 - party;
                // other two indices must agree
                if ((a & ~(1 << sh)) != (c & ~(1 << sh))) continue;
                r[party]((a >> sh) & 1, (c >> sh) & 1) += out[a] * std::conj(out[c]);
            }
    }
    CloneOutput o{qubit_density(r[0]), qubit_density(r[1]), qubit_density(r[2]), 0, 0};
    o.clone_fidelity = (psi.adjoint() * r[0] * psi).value().real();
    o.anticlone_fidelity = (perp.adjoint() * r[2] * perp).value().real();
    return o;
}

Symmetrized symmetrize_two_qubits(const DensityOperator& a, const DensityOperator& b) {
    Eigen::Matrix2cd qa = qubit_block(a), qb = qubit_block(b);
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) rho(2 * i + k, 2 * j + l) = qa(i, j) * qb(k, l);
    Eigen::Matrix4cd swap = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) swap(2 * k + i, 2 * i + k) = 1;
    Eigen::Matrix4cd P = 0.5 * (Eigen::Matrix4cd::Identity() + swap);
    Eigen::Matrix4cd proj = P * rho * P;
    double p = proj.trace().real();
    if (p < 1e-12) throw DegenerateOutcomeError("symmetric projection has zero probability (antisymmetric input)");
    proj /= p;

    ModeLayout l(2, 1);
    Mat m = Mat::Zero(l.dimension(), l.dimension());
    auto idx = [&](int q0, int q1) {
        Occ o{0, 0, 0, 0};
        o[q0] = 1;
        o[2 + q1] = 1;
        return l.flat_index(o);
    };
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            for (int j = 0; j < 2; ++j)
                for (int n = 0; n < 2; ++n) m(idx(i, k), idx(j, n)) = proj(2 * i + k, 2 * j + n);
    return {DensityOperator(l, m), p};
}

double marginal_fidelity(const DensityOperator& r, int which, const Eigen::Vector2cd& psi) {
    if (r.layout() != ModeLayout(2, 1)) throw LayoutMismatchError("not a two-qubit layout");
    if (which != 0 && which != 1) throw ValidationError("qubit index must be 0 or 1");
    DensityOperator red = partial_trace(r, which);
    Eigen::Matrix2cd q = qubit_block(red);
    return (psi.adjoint() * q * psi).value().real() / q.trace().real();
}

CloneExtract clone_extract_from_state(const FockState& s) {
    const ModeLayout& l = s.layout();
    if (l.spatial_modes() != 2 || l.polarizations() != 2)
        throw ValidationError("clone extraction needs two spatial modes with two polarizations");
    double n_psi = 0, n_tot = 0, p20 = 0, p11 = 0, k2_perp = 0, k2_psi = 0;
    for (std::size_t i = 0; i < l.dimension(); ++i) {
        double w = std::norm(s.amplitudes()[i]);
        if (w == 0) continue;
        Occ o = l.occupations(i);
        if (o[0] + o[1] == 2) {
            n_psi += w * o[0];
            n_tot += w * 2;
            if (o[0] == 2) p20 += w;
            if (o[0] == 1) p11 += w;
        }
        if (o[2] + o[3] == 1) {
            if (o[3] == 1) k2_perp += w;
            else k2_psi += w;
        }
    }
    if (n_tot == 0 || k2_psi + k2_perp == 0)
        throw DegenerateOutcomeError("state has no weight in the clone or U-NOT sector");
    CloneExtract e;
    e.clone_fidelity = n_psi / n_tot;
    e.unot_fidelity = k2_perp / (k2_psi + k2_perp);
    e.ratio_R = p11 > 0 ? p20 / p11 : INFINITY;
    e.ratio_R_star = k2_psi > 0 ? k2_perp / k2_psi : INFINITY;
    return e;
}

CloneExtract amplifier_clone_extract(double g) {
    if (!(g > 0)) throw ValidationError("clone extraction needs g > 0");
    FockState stim = linearized_stimulated(g);
    FockState spont = linearized_spontaneous(g);
    CloneExtract e = clone_extract_from_state(stim);
    // R compares the stimulated 2-photon term with the spontaneous 1-photon term on k1.
    double p_stim = std::norm(stim.amplitude({2, 0, 0, 1}));
    double p_spont = std::norm(spont.amplitude({1, 0, 0, 1}));
    e.ratio_R = p_stim / p_spont;
    return e;
}

}  // namespace qiopa
