#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qiopa/errors.hpp"

namespace qiopa {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using Occ = std::array<int, 4>;

inline constexpr double kDefaultEpsilon = 1e-8;
// Dense density matrices above this flat dimension are refused: 8192^2 complex
// doubles is already 1 GiB.
inline constexpr std::size_t kMaxMixedDimension = 8192;

// One or two spatial modes, each carrying one or two polarization sub-modes.
// Sub-mode order is (mode0 pol0, mode0 pol1, mode1 pol0, mode1 pol1); the flat
// index is row-major over that order, first sub-mode slowest.
class ModeLayout {
public:
    ModeLayout() : ModeLayout(1, 1) {}
    ModeLayout(int spatial_modes, int cutoff, int polarizations = 2);
    ModeLayout(int polarizations, std::array<int, 2> cutoffs, int spatial_modes);

    int spatial_modes() const { return spatial_; }
    int polarizations() const { return pols_; }
    int sub_modes() const { return spatial_ * pols_; }
    int cutoff(int spatial_mode = 0) const { return cutoffs_[spatial_mode]; }
    int sub_cutoff(int sub) const { return cutoffs_[sub / pols_]; }
    std::size_t dimension() const { return dim_; }
    std::size_t stride(int sub) const { return strides_[sub]; }
    std::size_t spatial_dimension(int spatial_mode) const;

    std::size_t flat_index(const Occ& occ) const;
    Occ occupations(std::size_t flat) const;
    bool contains(const Occ& occ) const;

    // Layout of one spatial mode on its own.
    ModeLayout single(int spatial_mode) const;

    bool operator==(const ModeLayout& o) const;
    bool operator!=(const ModeLayout& o) const { return !(*this == o); }

private:
    int spatial_, pols_;
    std::array<int, 2> cutoffs_;
    std::array<std::size_t, 4> strides_{};
    std::size_t dim_;
    void finish();
};

class FockState {
public:
    FockState(ModeLayout layout, Vec amplitudes, double deficit = 0.0);

    const ModeLayout& layout() const { return layout_; }
    const Vec& amplitudes() const { return amps_; }
    cplx amplitude(const Occ& occ) const { return amps_[layout_.flat_index(occ)]; }
    double norm2() const;
    // 1 - |psi|^2 left behind by truncation when the state was built.
    double truncation_deficit() const { return deficit_; }
    double mean_photons(int sub) const;
    double mean_photons_spatial(int spatial_mode) const;

private:
    ModeLayout layout_;
    Vec amps_;
    double deficit_;
};

class DensityOperator {
public:
    DensityOperator(ModeLayout layout, Mat matrix);
    static DensityOperator from_pure(const FockState& s);

    const ModeLayout& layout() const { return layout_; }
    const Mat& matrix() const { return rho_; }
    double trace() const { return rho_.trace().real(); }
    double hermiticity_defect() const;
    double min_eigenvalue() const;
    double mean_photons(int sub) const;
    // Throws NumericalGuardError when the DensityOperator invariants fail.
    void validate(double eps_trunc = kDefaultEpsilon) const;

private:
    ModeLayout layout_;
    Mat rho_;
};

// Bloch-sphere frame. Row 0 of basis() holds the lab (H,V) components of pi,
// row 1 those of pi_perp:
//   pi      =  cos(t/2) H + e^{i p} sin(t/2) V
//   pi_perp = -e^{-i p} sin(t/2) H + cos(t/2) V
struct PolarizationFrame {
    double theta = 0.0;
    double phi = 0.0;
    Eigen::Matrix2cd basis() const;
    static PolarizationFrame hv() { return {0.0, 0.0}; }
    static PolarizationFrame diagonal() { return {M_PI / 2, 0.0}; }
    static PolarizationFrame circular() { return {M_PI / 2, M_PI / 2}; }
};

// Equatorial label basis used by the collinear closed form:
//   pi_phi = (H + e^{i phi} V)/sqrt2, pi_phi_perp = (H - e^{i phi} V)/sqrt2.
Eigen::Matrix2cd equatorial_basis(double phi);

FockState build_fock(const ModeLayout& layout, const Occ& occupations);
FockState vacuum(const ModeLayout& layout);

// Substitutes c_i^dag -> sum_k W(i,k) d_k^dag on one spatial mode, working one
// total-photon sector at a time. Amplitude pushed above the cutoff is dropped
// and its probability added to *leakage.
FockState apply_mode_unitary(const FockState& s, const Eigen::Matrix2cd& W, int spatial_mode,
                             double* leakage = nullptr);
DensityOperator apply_mode_unitary(const DensityOperator& r, const Eigen::Matrix2cd& W,
                                   int spatial_mode, double* leakage = nullptr);
void apply_mode_unitary_inplace(const ModeLayout& layout, cplx* amps, const Eigen::Matrix2cd& W,
                                int spatial_mode, double* leakage = nullptr);

// Active rotation a_H^dag -> a_pi^dag, a_V^dag -> a_pi_perp^dag.
FockState rotate_polarization(const FockState& s, const PolarizationFrame& f, int spatial_mode);
DensityOperator rotate_polarization(const DensityOperator& r, const PolarizationFrame& f,
                                    int spatial_mode);
// Re-express amplitudes given in label basis `from` in label basis `to`.
FockState change_labels(const FockState& s, const Eigen::Matrix2cd& from,
                        const Eigen::Matrix2cd& to, int spatial_mode, double* leakage = nullptr);

DensityOperator partial_trace(const DensityOperator& r, int keep);
DensityOperator reduced_density(const FockState& s, int keep);

cplx overlap(const FockState& a, const FockState& b);
double fidelity(const FockState& a, const FockState& b);
double fidelity(const DensityOperator& a, const DensityOperator& b);
double bures_from_fidelity(double F);
double bures_distance(const DensityOperator& a, const DensityOperator& b);
double bures_distance(const FockState& a, const FockState& b);
double trace_distance(const DensityOperator& a, const DensityOperator& b);

// rho = A A^dag with the columns of A stored explicitly. Lossy pure states live
// here so fidelities never need the full square matrix.
struct Ensemble {
    ModeLayout layout;
    Mat columns;
    double trace() const { return columns.squaredNorm(); }
    DensityOperator to_density() const;
};
double fidelity(const Ensemble& a, const Ensemble& b);
double bures_distance(const Ensemble& a, const Ensemble& b);
double trace_distance(const Ensemble& a, const Ensemble& b);

// Hermitian PSD square root and sqrt(F) helpers shared with other modules.
double sqrt_fidelity_dense(const Mat& a, const Mat& b);

nlohmann::json to_json(const ModeLayout& l);
ModeLayout layout_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FockState& s);
FockState fock_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DensityOperator& r);
DensityOperator density_from_json(const nlohmann::json& j);

const char* library_version();

}  // namespace qiopa
