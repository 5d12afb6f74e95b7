#include <cmath>
#include <string>

#include "qiopa/channels.hpp"

namespace qiopa {

double coherent_cat_bures(double x) {
    if (!(x >= 0) || !std::isfinite(x)) throw ValidationError("lost photon number x must be finite and >= 0");
    // 1 - sqrt(1 - y) rewritten without the cancellation at small y
    const double y = std::exp(-4 * x);
    return std::sqrt(y / (1 + std::sqrt(-std::expm1(-4 * x))));
}

const char* to_string(MqsKind k) {
    switch (k) {
    case MqsKind::phase_covariant: return "pc";
    case MqsKind::universal: return "universal";
    case MqsKind::coherent: return "coherent";
    }
    return "?";
}

MqsKind mqs_kind_from_string(const std::string& s) {
    if (s == "pc" || s == "phase_covariant" || s == "phase-covariant") return MqsKind::phase_covariant;
    if (s == "universal") return MqsKind::universal;
    if (s == "coherent") return MqsKind::coherent;
    throw ValidationError("unknown MQS kind '" + s + "'");
}

double gain_for_nbar(MqsKind kind, double nbar) {
    if (!(nbar > 0) || !std::isfinite(nbar)) throw ValidationError("mean photon number must be positive");
    switch (kind) {
    case MqsKind::coherent: return std::sqrt(nbar);
    case MqsKind::phase_covariant:
        if (nbar < 1) throw ValidationError("phase-covariant macrostates carry at least one photon");
        return std::asinh(std::sqrt((nbar - 1) / 4));
    case MqsKind::universal:
        if (nbar < 1) throw ValidationError("universal macrostates carry at least one photon");
        return std::asinh(std::sqrt((nbar - 1) / 6));
    }
    throw ValidationError("unknown MQS kind");
}

namespace {

// Two-mode pieces of the universal macrostates, one polarization per mode.
SparseState pair_terms(const AmplifierParams& p, bool seeded, int sign, double eps) {
    if (!seeded) {
        SparseState s = twin_beam_terms(p, eps);
        if (sign < 0)
            for (Term& t : s.terms)
                if (t.occ[0] % 2) t.amp = -t.amp;
        return s;
    }
    Eigen::Vector2cd h(1, 0);
    SparseState s = collinear_lab_terms(p, h, eps);  // (1/C^2) Gamma^n sqrt(n+1) |n+1, n>
    s.spatial_modes = 2;
    s.polarizations = 1;
    if (sign < 0)
        for (Term& t : s.terms)
                if (t.occ[1] % 2) t.amp = -t.amp;
    return s;
}

double pair_fidelity(const SparseState& x, const SparseState& y, double T) {
    return lossy_fidelity(x, y, {T, T, T, T});
}

}  // namespace

BuresCurve mqs_bures_curve(MqsKind kind, double nbar, const std::vector<double>& xs, double eps) {
    if (xs.empty()) throw ValidationError("x grid is empty");
    BuresCurve c{kind, gain_for_nbar(kind, nbar), nbar, {}};
    for (double x : xs)
        if (!(x >= 0 && x <= nbar)) throw ValidationError("x must lie in [0, nbar]");

    if (kind == MqsKind::coherent) {
        for (double x : xs) c.points.push_back({x, 1 - x / nbar, coherent_cat_bures(x)});
        return c;
    }
    AmplifierParams p(c.g);
    // Phi+ = S(g)|1> (x) S(-g)|0> and Phi- = S(g)|0> (x) S(-g)|1> in the +/- labels;
    // universal: seeded(+g) (x) vacuum(-g) against vacuum(+g) (x) seeded(-g) over the two pairs.
    const bool pc = kind == MqsKind::phase_covariant;
    auto factor = [&](bool first_seeded, int sign) {
        if (pc) return degenerate_terms(p, first_seeded ? 1 : 0, sign, eps);
        return pair_terms(p, first_seeded, sign, eps);
    };
    const SparseState a1 = factor(true, +1), b1 = factor(false, +1), a2 = factor(false, -1), b2 = factor(true, -1);
    c.truncation_deficit = std::max({a1.deficit, b1.deficit, a2.deficit, b2.deficit});
    for (double x : xs) {
        double T = 1 - x / nbar;
        double F = pair_fidelity(a1, b1, T) * pair_fidelity(a2, b2, T);
        c.points.push_back({x, T, bures_from_fidelity(F)});
    }
    return c;
}

double pc_bures_full(const AmplifierParams& p, double T, bool circular, double eps) {
    Eigen::Vector2cd plus(M_SQRT1_2, M_SQRT1_2), minus(M_SQRT1_2, -M_SQRT1_2);
    Eigen::Vector2cd a = plus, b = minus;
    if (circular) {
        a = (plus + cplx(0, 1) * minus) / std::sqrt(2.0);
        b = (plus - cplx(0, 1) * minus) / std::sqrt(2.0);
    }
    return bures_from_fidelity(pair_fidelity(collinear_lab_terms(p, a, eps), collinear_lab_terms(p, b, eps), T));
}

double universal_bures_full(const AmplifierParams& p, const PolarizationFrame& f, double T, double eps) {
    Eigen::Vector2cd a = f.basis().row(0).transpose(), b = orthogonal_frame(f).basis().row(0).transpose();
    return bures_from_fidelity(
        pair_fidelity(noncollinear_lab_terms(p, a, eps), noncollinear_lab_terms(p, b, eps), T));
}

DiscriminationReport discrimination_bound(const DensityOperator& a, const DensityOperator& b) {
    double td = trace_distance(a, b);
    return {bures_distance(a, b), 0.5 * (1 + td), td};
}

DiscriminationReport discrimination_bound(const Ensemble& a, const Ensemble& b) {
    double td = trace_distance(a, b);
    return {bures_distance(a, b), 0.5 * (1 + td), td};
}

}  // namespace qiopa
