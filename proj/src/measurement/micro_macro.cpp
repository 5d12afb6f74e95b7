#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qiopa/measurement.hpp"

namespace qiopa {

namespace {

constexpr std::size_t kMaxJointEntries = std::size_t(1) << 24;

int max_total(const SparseState& s, int spatial_mode) {
    int c = 1;
    for (const Term& t : s.terms) c = std::max(c, t.occ[2 * spatial_mode] + t.occ[2 * spatial_mode + 1]);
    return c;
}

Eigen::Vector2cd lab(int i) { return i == 0 ? Eigen::Vector2cd(1, 0) : Eigen::Vector2cd(0, 1); }

}  // namespace

FockState MacroQubit::along(const Eigen::Vector2cd& u) const {
    return FockState(phi_h.layout(), u[0] * phi_h.amplitudes() + u[1] * phi_v.amplitudes(),
                     phi_h.truncation_deficit());
}

MacroQubit macro_qubit(const AmplifierParams& p, const ModeLayout& l, double eps) {
    if (l.spatial_modes() != 1 || l.polarizations() != 2)
        throw LayoutMismatchError("macro qubit needs one spatial mode with two polarizations");
    Truncation t{eps, CutoffRule::spatial_total, l};
    return {to_dense(collinear_lab_terms(p, lab(0), eps), t), to_dense(collinear_lab_terms(p, lab(1), eps), t)};
}

FockState micro_macro_state(const AmplifierParams& p, double eps) {
    const SparseState h = collinear_lab_terms(p, lab(0), eps), v = collinear_lab_terms(p, lab(1), eps);
    const int c = std::max(max_total(h, 0), max_total(v, 0));
    ModeLayout l(2, {1, c}, 2);
    Vec a = Vec::Zero(Eigen::Index(l.dimension()));
    const double r = M_SQRT1_2;
    for (const Term& t : v.terms) a[l.flat_index({1, 0, t.occ[0], t.occ[1]})] += r * t.amp;
    for (const Term& t : h.terms) a[l.flat_index({0, 1, t.occ[0], t.occ[1]})] -= r * t.amp;
    return FockState(l, a, std::max(h.deficit, v.deficit));
}

Ensemble micro_macro(const AmplifierParams& p, Config config, double eps) {
    if (config == Config::collinear) return to_ensemble(micro_macro_state(p, eps));
    const SparseState h = noncollinear_lab_terms(p, lab(0), eps), v = noncollinear_lab_terms(p, lab(1), eps);
    const int c = std::max(max_total(h, 0), max_total(v, 0));
    ModeLayout l(2, {1, c}, 2);
    // one column per idler (k2) occupation
    std::map<std::pair<int, int>, Vec> cols;
    auto add = [&](const SparseState& s, Occ micro, double sign) {
        for (const Term& t : s.terms) {
            auto [it, fresh] = cols.try_emplace({t.occ[2], t.occ[3]}, Vec());
            if (fresh) {
                if ((cols.size() + 1) * l.dimension() > kMaxJointEntries)
                    throw DimensionGuardError("micro-macro ensemble exceeds " + std::to_string(kMaxJointEntries) +
                                              " entries");
                it->second = Vec::Zero(Eigen::Index(l.dimension()));
            }
            it->second[l.flat_index({micro[0], micro[1], t.occ[0], t.occ[1]})] += sign * M_SQRT1_2 * t.amp;
        }
    };
    add(v, {1, 0, 0, 0}, +1);
    add(h, {0, 1, 0, 0}, -1);
    Mat m(Eigen::Index(l.dimension()), Eigen::Index(cols.size()));
    Eigen::Index j = 0;
    for (auto& [key, col] : cols) m.col(j++) = col;
    return {l, std::move(m)};
}

Ensemble to_ensemble(const FockState& s) { return {s.layout(), s.amplitudes()}; }

Ensemble to_ensemble(const DensityOperator& r) {
    Mat h = 0.5 * (r.matrix() + r.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const auto& ev = es.eigenvalues();
    const double floor = 1e-14 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    if (ev.minCoeff() < -1e-10) throw ValidationError("density operator is not positive semidefinite");
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > floor) keep.push_back(i);
    Mat cols(h.rows(), Eigen::Index(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        cols.col(Eigen::Index(j)) = std::sqrt(ev[keep[j]]) * es.eigenvectors().col(keep[j]);
    return {r.layout(), std::move(cols)};
}

Ensemble condition_on_micro(const Ensemble& joint, const Eigen::Vector2cd& u) {
    const ModeLayout& l = joint.layout;
    if (l.spatial_modes() != 2 || l.polarizations() != 2)
        throw LayoutMismatchError("joint state needs two spatial modes with two polarizations");
    ModeLayout b = l.single(1);
    const Eigen::Index db = Eigen::Index(b.dimension());
    Mat out(db, joint.columns.cols());
    const auto iH = Eigen::Index(l.flat_index({1, 0, 0, 0})), iV = Eigen::Index(l.flat_index({0, 1, 0, 0}));
    for (Eigen::Index c = 0; c < joint.columns.cols(); ++c)
        out.col(c) = std::conj(u[0]) * joint.columns.col(c).segment(iH, db) +
                     std::conj(u[1]) * joint.columns.col(c).segment(iV, db);
    return {b, std::move(out)};
}

}  // namespace qiopa
