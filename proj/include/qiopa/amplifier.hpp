#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qiopa/fock.hpp"

namespace qiopa {

struct AmplifierParams {
    explicit AmplifierParams(double gain);
    double g;
    double C() const { return std::cosh(g); }
    double Gamma() const { return std::tanh(g); }
    double mbar() const { double s = std::sinh(g); return s * s; }
};

// Closed forms are first produced as explicit term lists: that keeps large-g
// states (millions of terms, far beyond a dense layout) usable for moments.
struct Term {
    Occ occ;
    cplx amp;
};

struct SparseState {
    int spatial_modes = 1;
    int polarizations = 2;
    std::vector<Term> terms;
    double deficit = 0;  // 1 - sum |amp|^2 of the enumerated terms
    double norm2() const;
    double mean_photons(int sub) const;
    double mean_photons_spatial(int spatial_mode) const;
};

enum class CutoffRule {
    per_sub_mode,   // smallest cutoff holding every term
    spatial_total,  // cutoff >= photon total per spatial mode: rotations never leak
};

struct Truncation {
    double epsilon = kDefaultEpsilon;
    CutoffRule rule = CutoffRule::spatial_total;
    std::optional<ModeLayout> layout;  // forced layout; dropped weight must stay below epsilon
};

ModeLayout fitting_layout(const SparseState& s, CutoffRule rule);
FockState to_dense(const SparseState& s, const Truncation& t = {});

// Which labels the returned amplitudes refer to.
enum class Labels {
    injection,  // the frame of the injected qubit, as the closed forms are written
    lab,        // H/V
};

SparseState twin_beam_terms(const AmplifierParams& p, double epsilon = kDefaultEpsilon);
// Two spatial modes; with polarizations = 2 only the H sub-modes are occupied.
FockState twin_beam(const AmplifierParams& p, int polarizations = 1, const Truncation& t = {});

// Single-mode squeezing exp[(s g/2)(a^dag^2 - a^2)] of |0> or |1>, s = +-1;
// one spatial mode, one polarization. Parity of the input is preserved.
SparseState degenerate_terms(const AmplifierParams& p, int photons_in, int sign = +1,
                             double epsilon = kDefaultEpsilon);

// Equatorial injection (H + e^{i phi} V)/sqrt2. Injection labels are those of
// equatorial_basis(phi); support is on (odd, even) occupations.
SparseState collinear_terms(const AmplifierParams& p, double phi, double epsilon = kDefaultEpsilon);
// Arbitrary injected polarization (lab components), H/V labels.
SparseState collinear_lab_terms(const AmplifierParams& p, const Eigen::Vector2cd& injected,
                                double epsilon = kDefaultEpsilon);
FockState collinear_macrostate(const AmplifierParams& p, double phi, const Truncation& t = {},
                               Labels labels = Labels::injection);

// Injection labels follow PolarizationFrame::basis() of the injected frame.
SparseState noncollinear_terms(const AmplifierParams& p, double epsilon = kDefaultEpsilon);
SparseState noncollinear_lab_terms(const AmplifierParams& p, const Eigen::Vector2cd& injected,
                                   double epsilon = kDefaultEpsilon);
FockState noncollinear_macrostate(const AmplifierParams& p, const PolarizationFrame& injected,
                                  const Truncation& t = {}, Labels labels = Labels::injection);

// Vacuum-seeded pair source, pi = H, pi_perp = V on both branches.
SparseState spdc_terms(const AmplifierParams& p, double epsilon = kDefaultEpsilon);
FockState spdc_singlet_macrostate(const AmplifierParams& p, const Truncation& t = {});

// First-order outputs in injection labels; not renormalized (norm^2 = 1 + 3g^2
// resp. 1 + 2g^2).
inline constexpr double kLinearizationGuard = 0.2;
FockState linearized_stimulated(double g);
FockState linearized_spontaneous(double g);

PolarizationFrame orthogonal_frame(const PolarizationFrame& f);

// <c_i^dag c_j> of one spatial mode, in the state's own labels.
Eigen::Matrix2cd coherence_matrix(const SparseState& s, int spatial_mode);
// Mean photon number along the lab polarization e, given label basis rows.
double photons_along(const Eigen::Matrix2cd& coherence, const Eigen::Matrix2cd& label_basis,
                     const Eigen::Vector2cd& e);

enum class Config { collinear, noncollinear };
const char* to_string(Config c);
Config config_from_string(const std::string& s);

struct FringePattern {
    Config config;
    double g;
    std::vector<double> phases;
    std::vector<double> plus, minus;
    double offset = 0, amplitude = 0;  // fitted M+ = offset + amplitude cos(phi - phase0)
    double visibility = 0;
};

// Mode-1 photon numbers in the +/- analysis frame as the injected equatorial
// phase sweeps.
FringePattern fringe_scan(Config config, const AmplifierParams& p, const std::vector<double>& phases,
                          double epsilon = kDefaultEpsilon);
// Least-squares fit of a + b cos + c sin; visibility (max-min)/(max+min).
double fitted_visibility(const std::vector<double>& phases, const std::vector<double>& values,
                         double* offset = nullptr, double* amplitude = nullptr);

enum class Generator { collinear, noncollinear, degenerate, twin };
const char* to_string(Generator g);

struct OracleOptions {
    double leakage_budget = 1e-6;
    std::size_t dense_limit = 400;  // components up to this size use eigendecomposition
    std::optional<bool> force_dense;
};

struct OracleResult {
    FockState state;
    double shell_leakage;  // probability on the cutoff shell
    double band_mass;      // probability in the top decile of occupations
    std::string route;     // "eigen" or "taylor"
    std::size_t component_dim;
};

// exp(tau A) |input>, A the truncated anti-Hermitian pair generator.
OracleResult oracle_evolve(Generator kind, double tau, const FockState& input,
                           const OracleOptions& opt = {});
nlohmann::json oracle_report(const OracleResult& r, const FockState& closed_form, const std::string& label);

}  // namespace qiopa
