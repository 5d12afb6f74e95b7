#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "qiopa/amplifier.hpp"
#include "qiopa/io.hpp"

namespace qiopa {

namespace {

constexpr std::size_t kMaxTerms = 40'000'000;
constexpr std::size_t kMaxPureDimension = std::size_t(1) << 25;

void check_epsilon(double eps) {
    if (!(eps >= 1e-14 && eps <= 0.5)) throw ValidationError("epsilon-trunc must lie in [1e-14, 0.5]");
}

// Calls emit(level, out) for level = 0, 1, ... until the enumerated mass
// reaches 1 - eps.
SparseState enumerate(int spatial, int pols, double eps,
                      const std::function<void(int, std::vector<Term>&)>& emit) {
    check_epsilon(eps);
    SparseState s;
    s.spatial_modes = spatial;
    s.polarizations = pols;
    double mass = 0;
    for (int level = 0; mass < 1 - eps; ++level) {
        std::size_t before = s.terms.size();
        emit(level, s.terms);
        for (std::size_t i = before; i < s.terms.size(); ++i) mass += std::norm(s.terms[i].amp);
        if (s.terms.size() > kMaxTerms)
            throw DimensionGuardError("closed form needs more than " + std::to_string(kMaxTerms) +
                                      " terms at this gain and epsilon");
    }
    s.deficit = std::max(0.0, 1 - mass);
    return s;
}

}  // namespace

AmplifierParams::AmplifierParams(double gain) : g(gain) {
    if (!std::isfinite(gain) || gain < 0) throw ValidationError("gain must be finite and >= 0");
    if (gain > 12) throw OutOfRangeError("gain above 12 is outside the supported range");
}

double SparseState::norm2() const {
    double s = 0;
    for (const Term& t : terms) s += std::norm(t.amp);
    return s;
}

double SparseState::mean_photons(int sub) const {
    if (sub < 0 || sub >= spatial_modes * polarizations) throw ValidationError("no such sub-mode");
    double s = 0;
    for (const Term& t : terms) s += std::norm(t.amp) * t.occ[sub];
    return s;
}

double SparseState::mean_photons_spatial(int m) const {
    if (m < 0 || m >= spatial_modes) throw ValidationError("no such spatial mode");
    double s = 0;
    for (int p = 0; p < polarizations; ++p) s += mean_photons(m * polarizations + p);
    return s;
}

ModeLayout fitting_layout(const SparseState& s, CutoffRule rule) {
    std::array<int, 2> cut{0, 0};
    for (const Term& t : s.terms) {
        for (int m = 0; m < s.spatial_modes; ++m) {
            int c = 0;
            for (int p = 0; p < s.polarizations; ++p) {
                int o = t.occ[m * s.polarizations + p];
                c = rule == CutoffRule::spatial_total ? c + o : std::max(c, o);
            }
            cut[m] = std::max(cut[m], c);
        }
    }
    for (int& c : cut) c = std::max(c, 1);
    if (s.spatial_modes == 1) cut[1] = cut[0];
    return ModeLayout(s.polarizations, cut, s.spatial_modes);
}

FockState to_dense(const SparseState& s, const Truncation& t) {
    check_epsilon(t.epsilon);
    ModeLayout l = t.layout ? *t.layout : fitting_layout(s, t.rule);
    if (l.spatial_modes() != s.spatial_modes || l.polarizations() != s.polarizations)
        throw LayoutMismatchError("forced layout does not match the state's mode structure");
    if (l.dimension() > kMaxPureDimension)
        throw DimensionGuardError("dense state dimension " + std::to_string(l.dimension()) +
                                  " exceeds guard " + std::to_string(kMaxPureDimension));
    Vec v = Vec::Zero(l.dimension());
    double dropped = 0;
    for (const Term& term : s.terms) {
        if (l.contains(term.occ)) v[l.flat_index(term.occ)] += term.amp;
        else dropped += std::norm(term.amp);
    }
    double deficit = s.deficit + dropped;
    if (deficit > t.epsilon)
        throw TruncationError("truncation drops probability " + format_double(deficit) +
                              " > epsilon " + format_double(t.epsilon));
    return FockState(l, std::move(v), deficit);
}

SparseState twin_beam_terms(const AmplifierParams& p, double eps) {
    double lg = p.g == 0 ? 0 : std::log(p.Gamma()), lc = std::log(p.C());
    return enumerate(2, 1, eps, [&](int n, std::vector<Term>& out) {
        double a = p.g == 0 ? (n == 0 ? 1.0 : 0.0) : std::exp(n * lg - lc);
        out.push_back({{n, n, 0, 0}, a});
    });
}

FockState twin_beam(const AmplifierParams& p, int polarizations, const Truncation& t) {
    if (polarizations != 1 && polarizations != 2) throw ValidationError("polarizations must be 1 or 2");
    SparseState s = twin_beam_terms(p, t.epsilon);
    if (polarizations == 2) {
        s.polarizations = 2;
        for (Term& term : s.terms) term.occ = {term.occ[0], 0, term.occ[1], 0};
    }
    return to_dense(s, t);
}

SparseState degenerate_terms(const AmplifierParams& p, int in, int sign, double eps) {
    if (in != 0 && in != 1) throw ValidationError("degenerate closed form covers |0> and |1> inputs only");
    if (sign != 1 && sign != -1) throw ValidationError("sign must be +1 or -1");
    double lc = std::log(p.C()), lh = p.g == 0 ? 0 : std::log(p.Gamma() / 2);
    return enumerate(1, 1, eps, [&](int n, std::vector<Term>& out) {
        if (p.g == 0) {
            if (n == 0) out.push_back({{in, 0, 0, 0}, 1.0});
            return;
        }
        int photons = 2 * n + in;
        double a = std::exp(-(0.5 + in) * lc + n * lh + 0.5 * std::lgamma(photons + 1.0) - std::lgamma(n + 1.0));
        out.push_back({{photons, 0, 0, 0}, (sign < 0 && n % 2) ? -a : a});
    });
}

namespace {

// sqrt((2i+1)!) sqrt((2j)!) / (i! j!) in logs.
double log_comb(int i, int j) {
    return 0.5 * std::lgamma(2.0 * i + 2) + 0.5 * std::lgamma(2.0 * j + 1) - std::lgamma(i + 1.0) -
           std::lgamma(j + 1.0);
}

}  // namespace

SparseState collinear_terms(const AmplifierParams& p, double phi, double eps) {
    double lc = std::log(p.C());
    double lh = p.g == 0 ? 0 : std::log(p.Gamma() / 2);
    return enumerate(1, 2, eps, [&](int k, std::vector<Term>& out) {
        if (p.g == 0) {
            if (k == 0) out.push_back({{1, 0, 0, 0}, 1.0});
            return;
        }
        for (int i = 0; i <= k; ++i) {
            int j = k - i;
            double mag = std::exp(-2 * lc + k * lh + log_comb(i, j));
            cplx a = std::polar(mag, -phi * k);
            if (j % 2) a = -a;
            out.push_back({{2 * i + 1, 2 * j, 0, 0}, a});
        }
    });
}

SparseState collinear_lab_terms(const AmplifierParams& p, const Eigen::Vector2cd& e, double eps) {
    if (std::abs(e.squaredNorm() - 1) > 1e-12) throw ValidationError("injected polarization must be normalized");
    double lg = p.g == 0 ? 0 : std::log(p.Gamma()), lc = std::log(p.C());
    return enumerate(1, 2, eps, [&](int n, std::vector<Term>& out) {
        if (p.g == 0 && n > 0) return;
        double a = std::exp(n * lg - 2 * lc + 0.5 * std::log(n + 1.0));
        if (e[0] != cplx(0)) out.push_back({{n + 1, n, 0, 0}, e[0] * a});
        if (e[1] != cplx(0)) out.push_back({{n, n + 1, 0, 0}, e[1] * a});
    });
}

FockState collinear_macrostate(const AmplifierParams& p, double phi, const Truncation& t, Labels labels) {
    if (!std::isfinite(phi)) throw ValidationError("phase must be finite");
    if (labels == Labels::injection) return to_dense(collinear_terms(p, phi, t.epsilon), t);
    Eigen::Vector2cd e(M_SQRT1_2, std::polar(M_SQRT1_2, phi));
    return to_dense(collinear_lab_terms(p, e, t.epsilon), t);
}

namespace {

// Amplitudes of one level L = n + m of the non-collinear output, in the order
// n = 0..L; sign (-1)^m.
template <class F>
void noncollinear_level(const AmplifierParams& p, int L, F&& put) {
    if (p.g == 0) {
        if (L == 0) put(0, 0, 1.0);
        return;
    }
    double lg = std::log(p.Gamma()), lc = std::log(p.C());
    for (int n = 0; n <= L; ++n) {
        int m = L - n;
        double a = std::exp(L * lg - 3 * lc + 0.5 * std::log(n + 1.0));
        put(n, m, m % 2 ? -a : a);
    }
}

}  // namespace

SparseState noncollinear_terms(const AmplifierParams& p, double eps) {
    return enumerate(2, 2, eps, [&](int L, std::vector<Term>& out) {
        noncollinear_level(p, L, [&](int n, int m, double a) { out.push_back({{n + 1, m, m, n}, a}); });
    });
}

SparseState noncollinear_lab_terms(const AmplifierParams& p, const Eigen::Vector2cd& e, double eps) {
    if (std::abs(e.squaredNorm() - 1) > 1e-12) throw ValidationError("injected polarization must be normalized");
    // V injection: psi = V, psi_perp = -H keeps the generator's form, giving
    // an extra (-1)^(n+m).
    return enumerate(2, 2, eps, [&](int L, std::vector<Term>& out) {
        noncollinear_level(p, L, [&](int n, int m, double a) {
            if (e[0] != cplx(0)) out.push_back({{n + 1, m, m, n}, e[0] * a});
            if (e[1] != cplx(0)) out.push_back({{m, n + 1, n, m}, e[1] * (L % 2 ? -a : a)});
        });
    });
}

FockState noncollinear_macrostate(const AmplifierParams& p, const PolarizationFrame& f, const Truncation& t,
                                  Labels labels) {
    if (!std::isfinite(f.theta) || !std::isfinite(f.phi)) throw ValidationError("frame angles must be finite");
    if (labels == Labels::injection) return to_dense(noncollinear_terms(p, t.epsilon), t);
    Eigen::Vector2cd e = f.basis().row(0).transpose();
    return to_dense(noncollinear_lab_terms(p, e, t.epsilon), t);
}

SparseState spdc_terms(const AmplifierParams& p, double eps) {
    double lg = p.g == 0 ? 0 : std::log(p.Gamma()), lc = std::log(p.C());
    return enumerate(2, 2, eps, [&](int L, std::vector<Term>& out) {
        if (p.g == 0 && L > 0) return;
        double a = std::exp(L * lg - 2 * lc);
        for (int n = 0; n <= L; ++n) {
            int m = L - n;
            out.push_back({{n, m, m, n}, m % 2 ? -a : a});
        }
    });
}

FockState spdc_singlet_macrostate(const AmplifierParams& p, const Truncation& t) {
    return to_dense(spdc_terms(p, t.epsilon), t);
}

FockState linearized_stimulated(double g) {
    if (!(g >= 0 && g <= kLinearizationGuard))
        throw ValidationError("linearized output needs 0 <= g <= " + format_double(kLinearizationGuard));
    ModeLayout l(2, 2);
    Vec v = Vec::Zero(l.dimension());
    v[l.flat_index({1, 0, 0, 0})] = 1;
    v[l.flat_index({2, 0, 0, 1})] = std::sqrt(2.0) * g;
    v[l.flat_index({1, 1, 1, 0})] = -g;
    return FockState(l, v);
}

FockState linearized_spontaneous(double g) {
    if (!(g >= 0 && g <= kLinearizationGuard))
        throw ValidationError("linearized output needs 0 <= g <= " + format_double(kLinearizationGuard));
    ModeLayout l(2, 1);
    Vec v = Vec::Zero(l.dimension());
    v[l.flat_index({0, 0, 0, 0})] = 1;
    v[l.flat_index({1, 0, 0, 1})] = g;
    v[l.flat_index({0, 1, 1, 0})] = -g;
    return FockState(l, v);
}

PolarizationFrame orthogonal_frame(const PolarizationFrame& f) {
    return {M_PI - f.theta, f.phi + M_PI};
}

}  // namespace qiopa
