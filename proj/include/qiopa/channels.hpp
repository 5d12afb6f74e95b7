#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qiopa/amplifier.hpp"
#include "qiopa/fock.hpp"

namespace qiopa {

struct LossSpec {
    explicit LossSpec(double transmittivity);
    double T, R;
};

// Selected sub-modes; empty means every sub-mode of the layout.
using SubModes = std::vector<int>;

// Beam-splitter Kraus weight <n-k|A_k|n> = sqrt(C(n,k) T^(n-k) R^k).
double loss_weight(int n, int k, double T);

DensityOperator apply_loss(const DensityOperator& r, const LossSpec& l, const SubModes& subs = {});
DensityOperator apply_loss(const FockState& s, const LossSpec& l, const SubModes& subs = {});
// Lossy pure state kept as its Kraus columns; no square matrix is formed.
Ensemble loss_ensemble(const FockState& s, const LossSpec& l, const SubModes& subs = {});
Ensemble apply_loss(const Ensemble& e, const LossSpec& l, const SubModes& subs = {});

// rho_mn -> rho_mn exp(-gamma (n_m - n_n)^2 / 2) on one sub-mode.
DensityOperator apply_dephasing(const DensityOperator& r, double gamma, int sub);

// Loss with per-sub-mode transmittivity on a term list, keeping only outcomes
// accepted by `keep`; returns the (unnormalized) density matrix over the kept
// occupations, listed in `kept` order.
struct ProjectedLoss {
    std::vector<Occ> kept;
    Mat rho;
    double probability;  // trace before renormalization
};
ProjectedLoss loss_project(const SparseState& s, const std::array<double, 4>& T,
                           const std::vector<Occ>& kept);

// F(E(a), E(b)) for loss with per-sub-mode transmittivity on term lists. Kraus
// columns stay sparse and split into blocks of disjoint row support, so no
// dense layout is ever formed.
double lossy_fidelity(const SparseState& a, const SparseState& b, const std::array<double, 4>& T);

double coherent_cat_bures(double x);

enum class MqsKind { phase_covariant, universal, coherent };
const char* to_string(MqsKind k);
MqsKind mqs_kind_from_string(const std::string& s);

struct BuresPoint {
    double x, T, D;
};
struct BuresCurve {
    MqsKind kind;
    double g;     // gain giving the requested mean photon number (alpha^2 for coherent)
    double nbar;  // mean photon number of the state entering the channel
    std::vector<BuresPoint> points;
    double truncation_deficit = 0;
};

// Gain at which the macrostate entering the channel carries `nbar` photons:
// 4 mbar + 1 (phase-covariant, one spatial mode) or 6 mbar + 1 (universal,
// both spatial modes lossy).
double gain_for_nbar(MqsKind kind, double nbar);

// D(E(Phi+), E(Phi-)) against x = R nbar. Phase-covariant and universal use
// the product structure of the macrostates (independent two-mode or
// single-mode factors), so each factor is handled on its own.
BuresCurve mqs_bures_curve(MqsKind kind, double nbar, const std::vector<double>& xs,
                           double epsilon = kDefaultEpsilon);

// Full-state routes, for cross-checks at small gain.
double pc_bures_full(const AmplifierParams& p, double T, bool circular, double epsilon = kDefaultEpsilon);
double universal_bures_full(const AmplifierParams& p, const PolarizationFrame& f, double T,
                            double epsilon = kDefaultEpsilon);

struct DiscriminationReport {
    double bures;     // the quoted bound on p_disc
    double helstrom;  // (1 + trace distance)/2, equal priors
    double trace_distance;
};
DiscriminationReport discrimination_bound(const DensityOperator& a, const DensityOperator& b);
DiscriminationReport discrimination_bound(const Ensemble& a, const Ensemble& b);

}  // namespace qiopa
