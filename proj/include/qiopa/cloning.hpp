#pragma once

#include <utility>

#include "qiopa/fock.hpp"

namespace qiopa {

enum class CloneFlavor { universal, phase_covariant };
const char* to_string(CloneFlavor f);

struct CloningSpec {
    CloningSpec(int n_in, int m_out, CloneFlavor flavor = CloneFlavor::universal);
    int n_in, m_out;
    CloneFlavor flavor;
    double beta() const { return double(n_in) / m_out; }
};

double universal_clone_fidelity(const CloningSpec& s);
// N = 1 only; separate branches for odd and even M.
double phase_covariant_fidelity(const CloningSpec& s);
double unot_fidelity(int n_in);

// Single-photon polarization qubits live on ModeLayout(1, 1): |H> = |1,0>,
// |V> = |0,1>. Two-qubit states use ModeLayout(2, 1).
DensityOperator qubit_density(const Eigen::Vector2cd& lab_components);
DensityOperator qubit_density(const Eigen::Matrix2cd& rho);
Eigen::Matrix2cd qubit_block(const DensityOperator& r);

struct CloneOutput {
    DensityOperator clone1, clone2, anticlone;
    double clone_fidelity;      // <Psi|rho_C1|Psi>
    double anticlone_fidelity;  // <Psi_perp|rho_AC|Psi_perp>
};
// The 1 -> 2 covariant map, built as a three-qubit pure state and traced.
CloneOutput covariant_clone_map(const PolarizationFrame& input);

struct Symmetrized {
    DensityOperator state;  // two qubits, normalized
    double probability;
};
Symmetrized symmetrize_two_qubits(const DensityOperator& a, const DensityOperator& b);
// Fidelity of each output qubit (they are equal after symmetrization) to psi.
double marginal_fidelity(const DensityOperator& two_qubits, int which, const Eigen::Vector2cd& psi);

struct CloneExtract {
    double clone_fidelity;  // per-photon fidelity in the 2-photon sector of k1
    double unot_fidelity;   // fidelity to psi_perp of the 1-photon sector of k2
    double ratio_R;         // stimulated 2-photon vs spontaneous 1-photon probability on k1
    double ratio_R_star;    // psi_perp vs psi single-photon probability on k2
};
// From the linearized amplifier outputs (g within the linearization guard).
CloneExtract amplifier_clone_extract(double g);
// Same quantities read off any non-collinear output state in injection labels.
CloneExtract clone_extract_from_state(const FockState& s);

}  // namespace qiopa
