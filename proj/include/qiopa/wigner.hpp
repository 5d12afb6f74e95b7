#pragma once

#include <vector>

#include "qiopa/amplifier.hpp"
#include "qiopa/channels.hpp"
#include "qiopa/fock.hpp"

namespace qiopa {

// Single bosonic mode: one spatial mode, one polarization.
bool is_single_mode(const ModeLayout& l);

// |eta| beyond this is rejected; the Laguerre recurrences are validated up to it.
inline constexpr double kMaxDisplacement = 400.0;

// chi(eta) = Tr[rho exp(eta a^dag - eta^* a)], exact matrix elements on the truncated space.
std::vector<cplx> characteristic_function(const DensityOperator& rho, const std::vector<cplx>& eta);

// W(alpha) = (2/pi) Tr[rho D(alpha) Pi D(alpha)^dag].
std::vector<double> wigner_values(const DensityOperator& rho, const std::vector<cplx>& alpha);
double wigner_at(const DensityOperator& rho, cplx alpha);
// (2/pi) sum (-1)^n rho_nn
double wigner_origin(const DensityOperator& rho);
double wigner_origin(const FockState& s);

struct GridSpec {
    double re_min = -6, re_max = 6, im_min = -6, im_max = 6;
    int re_points = 241, im_points = 241;
    void validate() const;
    double re(int i) const { return re_min + (re_max - re_min) * i / (re_points - 1); }
    double im(int j) const { return im_min + (im_max - im_min) * j / (im_points - 1); }
    double cell() const { return (re_max - re_min) / (re_points - 1) * (im_max - im_min) / (im_points - 1); }
};

// Window from the quadrature moments: mean +- `sigmas` standard deviations
// per axis.
GridSpec auto_grid(const DensityOperator& rho, int points = 241, double sigmas = 6.0);

struct QuadratureMoments {
    double mean_re, mean_im, var_re, var_im;  // of alpha = (x + i p), vacuum variance 1/4
};
QuadratureMoments quadrature_moments(const DensityOperator& rho);
// Gaussian-equivalent estimate of the probability outside the window.
double window_tail_estimate(const DensityOperator& rho, const GridSpec& g);

struct PhaseSpaceGrid {
    GridSpec spec;
    Eigen::MatrixXd W;  // W(i, j) at (re(i), im(j))
    double tail_mass = 0;      // window tail estimate
    double epsilon_grid = 0;   // declared normalization tolerance
    double fock_deficit = 0;   // truncation deficit of the input state
    double integral() const { return W.sum() * spec.cell(); }
};

// Rejects states whose window tail estimate exceeds epsilon_grid; 1 accepts
// any window (partial views such as a zoom on the origin).
PhaseSpaceGrid wigner_grid(const DensityOperator& rho, const GridSpec& spec, double epsilon_grid = 1e-3,
                           double fock_deficit = 0);

struct NegativityReport {
    double min_value;
    double negative_volume;  // integral of |W| where W < 0
    double re_at_min, im_at_min;
};
NegativityReport negativity_report(const PhaseSpaceGrid& g);

// exp[(g/2)(a^dag^2 - a^2)] |input>. Inputs on {|0>, |1>} use the closed
// forms on a fresh layout sized by `epsilon`; anything else goes through the
// generator oracle on the input's own layout.
FockState degenerate_opa_state(double g, const FockState& input, double epsilon = kDefaultEpsilon);

// Single-mode loss of a pure state without forming Kraus columns of full
// length: contributions with w(n,k)^2 below `prune` are skipped.
DensityOperator lossy_single_mode(const FockState& s, const LossSpec& spec, double prune = 1e-20);

}  // namespace qiopa
