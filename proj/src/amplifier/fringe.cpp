#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "qiopa/amplifier.hpp"

namespace qiopa {

namespace {

std::uint64_t pack(const Occ& o) {
    std::uint64_t k = 0;
    for (int v : o) k = (k << 16) | std::uint64_t(std::uint16_t(v));
    return k;
}

}  // namespace

Eigen::Matrix2cd coherence_matrix(const SparseState& s, int m) {
    if (m < 0 || m >= s.spatial_modes) throw ValidationError("no such spatial mode");
    if (s.polarizations != 2) throw ValidationError("coherence matrix needs two polarizations");
    int h = 2 * m, v = 2 * m + 1;
    Eigen::Matrix2cd c = Eigen::Matrix2cd::Zero();
    std::unordered_map<std::uint64_t, cplx> index;
    index.reserve(s.terms.size());
    for (const Term& t : s.terms) index[pack(t.occ)] += t.amp;
    for (const Term& t : s.terms) {
        double w = std::norm(t.amp);
        c(0, 0) += w * t.occ[h];
        c(1, 1) += w * t.occ[v];
        // <a_h^dag a_v>: a_v takes |.., nh, nv..> to the term with (nh-1, nv+1) on the bra side
        if (t.occ[v] == 0) continue;
        Occ o = t.occ;
        o[h] += 1;
        o[v] -= 1;
        auto it = index.find(pack(o));
        if (it != index.end())
            c(0, 1) += std::conj(it->second) * t.amp * std::sqrt(double(o[h]) * double(t.occ[v]));
    }
    c(1, 0) = std::conj(c(0, 1));
    return c;
}

double photons_along(const Eigen::Matrix2cd& coh, const Eigen::Matrix2cd& basis, const Eigen::Vector2cd& e) {
    // a_e^dag = sum_k <b_k|e> a_k^dag
    Eigen::Vector2cd d = basis.conjugate() * e;
    return (d.transpose() * coh * d.conjugate()).value().real();
}

const char* to_string(Config c) {
    return c == Config::collinear ? "collinear" : "noncollinear";
}

Config config_from_string(const std::string& s) {
    if (s == "collinear" || s == "pc") return Config::collinear;
    if (s == "noncollinear" || s == "universal") return Config::noncollinear;
    throw ValidationError("unknown amplifier configuration '" + s + "'");
}

double fitted_visibility(const std::vector<double>& phases, const std::vector<double>& values, double* offset,
                         double* amplitude) {
    if (phases.size() != values.size()) throw ValidationError("phases and values differ in length");
    if (phases.size() < 3) throw ValidationError("a fringe fit needs at least three phases");
    Eigen::MatrixXd A(phases.size(), 3);
    Eigen::VectorXd y(values.size());
    for (std::size_t i = 0; i < phases.size(); ++i) {
        A(i, 0) = 1;
        A(i, 1) = std::cos(phases[i]);
        A(i, 2) = std::sin(phases[i]);
        y[i] = values[i];
    }
    Eigen::Vector3d x = A.colPivHouseholderQr().solve(y);
    if (A.colPivHouseholderQr().rank() < 3) throw ValidationError("phases do not determine a sinusoid");
    double amp = std::hypot(x[1], x[2]);
    if (offset) *offset = x[0];
    if (amplitude) *amplitude = amp;
    if (x[0] <= 0) throw NumericalGuardError("fringe offset is not positive");
    return amp / x[0];
}

FringePattern fringe_scan(Config config, const AmplifierParams& p, const std::vector<double>& phases, double eps) {
    if (phases.empty()) throw ValidationError("fringe scan needs at least one phase");
    for (double ph : phases)
        if (!std::isfinite(ph)) throw ValidationError("phase must be finite");
    FringePattern f{config, p.g, phases, {}, {}};
    const Eigen::Vector2cd plus(M_SQRT1_2, M_SQRT1_2), minus(M_SQRT1_2, -M_SQRT1_2);

    if (config == Config::noncollinear) {
        // The injection-label state does not depend on the injected phase;
        // only the label basis does.
        Eigen::Matrix2cd coh = coherence_matrix(noncollinear_terms(p, eps), 0);
        for (double ph : phases) {
            Eigen::Matrix2cd b = PolarizationFrame{M_PI / 2, ph}.basis();
            f.plus.push_back(photons_along(coh, b, plus));
            f.minus.push_back(photons_along(coh, b, minus));
        }
    } else {
        for (double ph : phases) {
            Eigen::Vector2cd e(M_SQRT1_2, std::polar(M_SQRT1_2, ph));
            Eigen::Matrix2cd coh = coherence_matrix(collinear_lab_terms(p, e, eps), 0);
            f.plus.push_back(photons_along(coh, Eigen::Matrix2cd::Identity(), plus));
            f.minus.push_back(photons_along(coh, Eigen::Matrix2cd::Identity(), minus));
        }
    }
    if (phases.size() >= 3) f.visibility = fitted_visibility(phases, f.plus, &f.offset, &f.amplitude);
    return f;
}

}  // namespace qiopa
