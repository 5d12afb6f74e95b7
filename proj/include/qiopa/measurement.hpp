#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qiopa/amplifier.hpp"
#include "qiopa/fock.hpp"

namespace qiopa {

// Micro (spatial mode 0, one photon) and macro (spatial mode 1) branches of
// (|H>_A |Phi^V>_B - |V>_A |Phi^H>_B)/sqrt2. The pair is a polarization
// singlet, so the same form holds in every frame up to a global phase.
// Collinear only: the macro side is one spatial mode.
FockState micro_macro_state(const AmplifierParams& p, double epsilon = kDefaultEpsilon);
// Both configurations; the non-collinear idler k2 is traced out, leaving an
// ensemble on (A, k1).
Ensemble micro_macro(const AmplifierParams& p, Config config, double epsilon = kDefaultEpsilon);

// Phi^H and Phi^V (collinear) on a given single-spatial-mode layout.
struct MacroQubit {
    FockState phi_h, phi_v;
    FockState along(const Eigen::Vector2cd& lab) const;
};
MacroQubit macro_qubit(const AmplifierParams& p, const ModeLayout& macro_layout,
                       double epsilon = kDefaultEpsilon);

struct OFilterSpec {
    int threshold = 0;  // k
    PolarizationFrame frame;
    double efficiency = 1;  // eta, binomial thinning before counting
    void validate() const;
};

// +1 iff n - m > k, -1 iff m - n > k, 0 otherwise (ties are inconclusive).
int ofilter_outcome(int n, int m, int k);

struct OutcomeProbabilities {
    double plus = 0, minus = 0, inconclusive = 0;
    double conclusive() const { return plus + minus; }
};

// P(n, m) of one spatial mode, counted along the rows of `basis`, after thinning.
Eigen::MatrixXd photon_count_distribution(const Ensemble& e, int spatial_mode, const Eigen::Matrix2cd& basis,
                                          double efficiency = 1);
Eigen::MatrixXd thin(const Eigen::MatrixXd& P, double efficiency);
OutcomeProbabilities ofilter_probabilities(const Eigen::MatrixXd& P, int threshold);

OutcomeProbabilities ofilter_probabilities(const Ensemble& e, const OFilterSpec& spec, int spatial_mode = 0);
OutcomeProbabilities ofilter_probabilities(const FockState& s, const OFilterSpec& spec, int spatial_mode = 0);
OutcomeProbabilities ofilter_probabilities(const DensityOperator& r, const OFilterSpec& spec,
                                           int spatial_mode = 0);

Ensemble to_ensemble(const FockState& s);
Ensemble to_ensemble(const DensityOperator& r);

// Unnormalized macro-side ensemble after the micro photon is found along
// `micro` (lab components).
Ensemble condition_on_micro(const Ensemble& joint, const Eigen::Vector2cd& micro);

std::array<PolarizationFrame, 3> default_witness_frames();

struct WitnessReport {
    std::array<double, 3> V{};
    double S = 0;
    // Probability of a conclusive macro outcome, overall and per basis; the
    // visibilities are conditioned on it.
    double conclusive_fraction = 0;
    std::array<double, 3> conclusive{};
};

// Micro photon along pi/pi_perp of each frame, macro O-filter in the same frame.
WitnessReport ofilter_witness(const Ensemble& joint, int threshold, double efficiency,
                              const std::array<PolarizationFrame, 3>& frames = default_witness_frames());
// Sigma_i = |Phi^pi><Phi^pi| - |Phi^pi_perp><Phi^pi_perp| on the macro-qubit
// span. Frames must be mutually orthogonal on the Bloch sphere; then S <= 1
// for every separable state.
WitnessReport pseudo_spin_witness(const Ensemble& joint, const MacroQubit& q,
                                  const std::array<PolarizationFrame, 3>& frames = default_witness_frames());

enum class BobObservable { ofilter, photon_counts };

struct NoSignalReport {
    double max_deviation = 0;                // over Bob outcomes, between the two Alice bases
    std::vector<double> bob_first, bob_second;  // Bob's marginal under each basis
    double conditional_gap = 0;  // max_b |P(b | a=+) - P(b | a=-)|, first basis
};
NoSignalReport nosignaling_check(const Ensemble& joint, const PolarizationFrame& alice1,
                                 const PolarizationFrame& alice2, const OFilterSpec& bob,
                                 BobObservable obs = BobObservable::ofilter);

struct MonteCarloNoSignal {
    std::size_t samples = 0;  // per Alice basis
    std::array<double, 3> p_first{}, p_second{};  // Bob O-filter (+, -, 0)
    std::array<double, 3> standard_error{};        // of p_first - p_second
    double max_abs_z = 0;
};
// Samples (a, n, m) from the exact Born distribution, thins counts
// binomially and compares Bob's O-filter frequencies under the two bases.
MonteCarloNoSignal nosignaling_monte_carlo(const Ensemble& joint, const PolarizationFrame& alice1,
                                           const PolarizationFrame& alice2, const OFilterSpec& bob,
                                           std::size_t samples, std::uint64_t seed);

// Two-photon matrices in the basis (HH, HV, VH, VV).
double werner_weight(const AmplifierParams& p, double eta);
Eigen::Matrix4cd werner_matrix(double p);
Eigen::Matrix4cd werner_extract(const AmplifierParams& p, double eta);

struct WernerOracle {
    Eigen::Matrix4cd rho;
    double probability;  // of one photon per branch
    double truncation_deficit;
};
// SPDC macro-state -> loss eta on all four sub-modes -> keep one photon per
// branch -> renormalize.
WernerOracle werner_bruteforce(const AmplifierParams& p, double eta, double epsilon = 1e-12);

struct PptReport {
    bool entangled;
    double min_eigenvalue;  // of the partial transpose
};
PptReport ppt_entangled(const Eigen::Matrix4cd& rho);
// Two spatial modes, cutoff 1; weight outside one photon per mode is rejected.
PptReport ppt_entangled(const DensityOperator& rho);

}  // namespace qiopa
