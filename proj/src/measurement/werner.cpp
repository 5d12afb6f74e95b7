#include <cmath>

#include "qiopa/channels.hpp"
#include "qiopa/measurement.hpp"

namespace qiopa {

namespace {

void check_eta(double eta) {
    if (!(eta >= 0 && eta < 1)) throw ValidationError("efficiency must lie in [0, 1)");
}

}  // namespace

double werner_weight(const AmplifierParams& p, double eta) {
    check_eta(eta);
    const double gt = (1 - eta) * p.Gamma();
    return 1 / (2 * gt * gt + 1);
}

Eigen::Matrix4cd werner_matrix(double p) {
    if (!(p >= 0 && p <= 1)) throw ValidationError("singlet weight must lie in [0, 1]");
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
    r(0, 0) = r(3, 3) = (1 - p) / 4;
    r(1, 1) = r(2, 2) = (1 + p) / 4;
    r(1, 2) = r(2, 1) = -p / 2;
    return r;
}

Eigen::Matrix4cd werner_extract(const AmplifierParams& p, double eta) { return werner_matrix(werner_weight(p, eta)); }

WernerOracle werner_bruteforce(const AmplifierParams& p, double eta, double eps) {
    check_eta(eta);
    const SparseState s = spdc_terms(p, eps);
    // sub-modes (A_H, A_V, B_H, B_V)
    const std::vector<Occ> kept = {{1, 0, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0}, {0, 1, 0, 1}};
    ProjectedLoss pl = loss_project(s, {eta, eta, eta, eta}, kept);
    if (!(pl.probability > 1e-300)) throw DegenerateOutcomeError("no one-photon-per-branch events");
    return {Eigen::Matrix4cd(pl.rho / pl.probability), pl.probability, s.deficit};
}

PptReport ppt_entangled(const Eigen::Matrix4cd& rho) {
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw ValidationError("matrix is not Hermitian");
    // transpose on the second qubit: (a b),(a' b') -> (a b'),(a' b)
    Eigen::Matrix4cd pt;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int a2 = 0; a2 < 2; ++a2)
                for (int b2 = 0; b2 < 2; ++b2) pt(2 * a + b, 2 * a2 + b2) = rho(2 * a + b2, 2 * a2 + b);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(pt, Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues().minCoeff();
    return {mn < -1e-12, mn};
}

PptReport ppt_entangled(const DensityOperator& r) {
    const ModeLayout& l = r.layout();
    if (l.spatial_modes() != 2 || l.polarizations() != 2 || l.cutoff(0) != 1 || l.cutoff(1) != 1)
        throw ValidationError("PPT test needs a two-qubit (two modes, cutoff 1) density operator");
    const std::array<Occ, 4> basis = {Occ{1, 0, 1, 0}, Occ{1, 0, 0, 1}, Occ{0, 1, 1, 0}, Occ{0, 1, 0, 1}};
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = r.matrix()(l.flat_index(basis[i]), l.flat_index(basis[j]));
    if (std::abs(m.trace().real() - r.trace()) > 1e-10)
        throw ValidationError("density operator has weight outside one photon per mode");
    return ppt_entangled(m);
}

}  // namespace qiopa
