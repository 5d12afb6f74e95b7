#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "qiopa/channels.hpp"

namespace qiopa {

namespace {

constexpr std::size_t kMaxEnsembleEntries = std::size_t(1) << 26;

SubModes resolve(const ModeLayout& l, const SubModes& subs) {
    SubModes out = subs;
    if (out.empty())
        for (int s = 0; s < l.sub_modes(); ++s) out.push_back(s);
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw ValidationError("sub-mode selected twice");
    for (int s : out)
        if (s < 0 || s >= l.sub_modes()) throw ValidationError("sub-mode " + std::to_string(s) + " not in layout");
    return out;
}

// w[n][k] for n, k <= cut.
std::vector<std::vector<double>> weight_table(int cut, double T) {
    std::vector<std::vector<double>> w(cut + 1, std::vector<double>(cut + 1, 0.0));
    for (int n = 0; n <= cut; ++n)
        for (int k = 0; k <= n; ++k) w[n][k] = loss_weight(n, k, T);
    return w;
}

std::vector<int> sub_occupations(const ModeLayout& l, int s) {
    std::vector<int> n(l.dimension());
    for (std::size_t i = 0; i < l.dimension(); ++i) n[i] = int((i / l.stride(s)) % (l.sub_cutoff(s) + 1));
    return n;
}

// Kraus columns A_k v for one sub-mode, appended to `out` when nonzero.
void kraus_columns(const ModeLayout& l, int s, const std::vector<std::vector<double>>& w,
                   const std::vector<int>& occ, const Eigen::Ref<const Vec>& v, std::vector<Vec>& out) {
    const int cut = l.sub_cutoff(s);
    const std::size_t st = l.stride(s);
    for (int k = 0; k <= cut; ++k) {
        Vec u = Vec::Zero(v.size());
        bool any = false;
        for (std::size_t i = 0; i < std::size_t(v.size()); ++i) {
            if (occ[i] < k || v[i] == cplx(0)) continue;
            double wk = w[occ[i]][k];
            if (wk == 0) continue;
            u[i - k * st] = wk * v[i];
            any = true;
        }
        if (any && u.squaredNorm() > 1e-300) out.push_back(std::move(u));
    }
}

}  // namespace

LossSpec::LossSpec(double t) : T(t), R(1 - t) {
    if (!(t >= 0 && t <= 1)) throw ValidationError("transmittivity must lie in [0, 1]");
}

double loss_weight(int n, int k, double T) {
    if (k < 0 || k > n) return 0;
    if (T >= 1) return k == 0 ? 1 : 0;
    if (T <= 0) return k == n ? 1 : 0;
    double lw = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + (n - k) * std::log(T) +
                k * std::log1p(-T);
    return std::exp(0.5 * lw);
}

DensityOperator apply_loss(const DensityOperator& r, const LossSpec& spec, const SubModes& subs_in) {
    const ModeLayout& l = r.layout();
    SubModes subs = resolve(l, subs_in);
    Mat rho = r.matrix();
    const Eigen::Index d = rho.rows();
    for (int s : subs) {
        if (spec.T == 1) break;
        const int cut = l.sub_cutoff(s);
        const std::size_t st = l.stride(s);
        auto w = weight_table(cut, spec.T);
        auto occ = sub_occupations(l, s);
        Mat out = Mat::Zero(d, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const int nj = occ[j];
            for (int k = 0; k <= nj; ++k) {
                const double wj = w[nj][k];
                if (wj == 0) continue;
                const Eigen::Index jj = j - Eigen::Index(k * st);
                for (Eigen::Index i = 0; i < d; ++i) {
                    const int ni = occ[i];
                    if (ni < k) continue;
                    const cplx v = rho(i, j);
                    if (v == cplx(0)) continue;
                    out(i - Eigen::Index(k * st), jj) += w[ni][k] * wj * v;
                }
            }
        }
        rho = std::move(out);
    }
    return DensityOperator(l, std::move(rho));
}

Ensemble loss_ensemble(const FockState& s, const LossSpec& spec, const SubModes& subs) {
    Ensemble e{s.layout(), s.amplitudes()};
    return apply_loss(e, spec, subs);
}

Ensemble apply_loss(const Ensemble& e, const LossSpec& spec, const SubModes& subs_in) {
    const ModeLayout& l = e.layout;
    SubModes subs = resolve(l, subs_in);
    Mat cols = e.columns;
    for (int s : subs) {
        if (spec.T == 1) break;
        auto w = weight_table(l.sub_cutoff(s), spec.T);
        auto occ = sub_occupations(l, s);
        std::vector<Vec> next;
        for (Eigen::Index c = 0; c < cols.cols(); ++c) {
            kraus_columns(l, s, w, occ, cols.col(c), next);
            if (next.size() * l.dimension() > kMaxEnsembleEntries)
                throw DimensionGuardError("lossy ensemble exceeds " + std::to_string(kMaxEnsembleEntries) + " entries");
        }
        cols.resize(Eigen::Index(l.dimension()), Eigen::Index(next.size()));
        for (std::size_t c = 0; c < next.size(); ++c) cols.col(Eigen::Index(c)) = next[c];
    }
    return {l, std::move(cols)};
}

DensityOperator apply_loss(const FockState& s, const LossSpec& spec, const SubModes& subs) {
    if (s.layout().dimension() > kMaxMixedDimension)
        throw DimensionGuardError("mixed-state dimension " + std::to_string(s.layout().dimension()) +
                                  " exceeds guard " + std::to_string(kMaxMixedDimension));
    return loss_ensemble(s, spec, subs).to_density();
}

DensityOperator apply_dephasing(const DensityOperator& r, double gamma, int sub) {
    if (!(gamma >= 0) || !std::isfinite(gamma)) throw ValidationError("dephasing rate must be finite and >= 0");
    const ModeLayout& l = r.layout();
    resolve(l, {sub});
    auto occ = sub_occupations(l, sub);
    Mat m = r.matrix();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            double dn = occ[i] - occ[j];
            if (dn != 0) m(i, j) *= std::exp(-0.5 * gamma * dn * dn);
        }
    return DensityOperator(l, std::move(m));
}

ProjectedLoss loss_project(const SparseState& s, const std::array<double, 4>& T, const std::vector<Occ>& kept) {
    const int subs = s.spatial_modes * s.polarizations;
    for (int i = 0; i < subs; ++i)
        if (!(T[i] >= 0 && T[i] <= 1)) throw ValidationError("transmittivity must lie in [0, 1]");
    if (kept.empty()) throw ValidationError("no kept occupations");
    auto pack = [](const Occ& o) {
        std::uint64_t k = 0;
        for (int v : o) k = (k << 16) | std::uint64_t(std::uint16_t(v));
        return k;
    };
    // One Kraus tuple per lost-photon pattern; each gives a vector over `kept`.
    std::map<std::uint64_t, Vec> columns;
    for (const Term& t : s.terms) {
        for (std::size_t q = 0; q < kept.size(); ++q) {
            Occ lost{0, 0, 0, 0};
            double w = 1;
            for (int i = 0; i < subs && w != 0; ++i) {
                lost[i] = t.occ[i] - kept[q][i];
                w *= loss_weight(t.occ[i], lost[i], T[i]);
            }
            if (w == 0) continue;
            auto [it, fresh] = columns.try_emplace(pack(lost), Vec::Zero(Eigen::Index(kept.size())));
            it->second[Eigen::Index(q)] += w * t.amp;
        }
    }
    Mat rho = Mat::Zero(Eigen::Index(kept.size()), Eigen::Index(kept.size()));
    for (const auto& [key, v] : columns) rho.noalias() += v * v.adjoint();
    double p = rho.trace().real();
    return {kept, rho, p};
}

}  // namespace qiopa
