#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "qiopa/channels.hpp"
#include "qiopa/io.hpp"
#include "qiopa/measurement.hpp"

namespace qiopa {

namespace {

constexpr double kLeakageTolerance = 1e-10;

void check_efficiency(double eta) {
    if (!(eta >= 0 && eta <= 1)) throw ValidationError("efficiency must lie in [0, 1]");
}

Eigen::Vector3d bloch(const PolarizationFrame& f) {
    return {std::sin(f.theta) * std::cos(f.phi), std::sin(f.theta) * std::sin(f.phi), std::cos(f.theta)};
}

}  // namespace

void OFilterSpec::validate() const {
    if (threshold < 0) throw ValidationError("O-filter threshold must be >= 0");
    check_efficiency(efficiency);
}

int ofilter_outcome(int n, int m, int k) {
    if (n - m > k) return +1;
    if (m - n > k) return -1;
    return 0;
}

Eigen::MatrixXd thin(const Eigen::MatrixXd& P, double eta) {
    check_efficiency(eta);
    if (eta == 1) return P;
    const int c = int(std::max(P.rows(), P.cols()));
    // B(n', n) = C(n, n') eta^n' (1-eta)^(n-n')
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(c, c);
    for (int n = 0; n < c; ++n)
        for (int k = 0; k <= n; ++k) B(n - k, n) = std::pow(loss_weight(n, k, eta), 2);
    return B.topLeftCorner(P.rows(), P.rows()) * P * B.topLeftCorner(P.cols(), P.cols()).transpose();
}

Eigen::MatrixXd photon_count_distribution(const Ensemble& e, int m, const Eigen::Matrix2cd& basis, double eta) {
    const ModeLayout& l = e.layout;
    if (l.polarizations() != 2) throw LayoutMismatchError("photon counting needs two polarizations");
    if (m < 0 || m >= l.spatial_modes()) throw ValidationError("no spatial mode " + std::to_string(m));
    const int c = l.cutoff(m);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(c + 1, c + 1);
    const Eigen::Matrix2cd W = basis.adjoint();  // lab labels -> frame labels
    const bool identity = (W - Eigen::Matrix2cd::Identity()).norm() == 0;
    std::vector<int> n(l.dimension()), k(l.dimension());
    for (std::size_t i = 0; i < l.dimension(); ++i) {
        n[i] = int((i / l.stride(2 * m)) % (c + 1));
        k[i] = int((i / l.stride(2 * m + 1)) % (c + 1));
    }
    Vec col;
    for (Eigen::Index j = 0; j < e.columns.cols(); ++j) {
        col = e.columns.col(j);
        if (!identity) {
            double leak = 0;
            apply_mode_unitary_inplace(l, col.data(), W, m, &leak);
            if (leak > kLeakageTolerance)
                throw TruncationError("frame change leaks " + format_double(leak) +
                                      " past the cutoff; use a spatial-total layout");
        }
        for (std::size_t i = 0; i < l.dimension(); ++i) P(n[i], k[i]) += std::norm(col[Eigen::Index(i)]);
    }
    return thin(P, eta);
}

OutcomeProbabilities ofilter_probabilities(const Eigen::MatrixXd& P, int k) {
    if (k < 0) throw ValidationError("O-filter threshold must be >= 0");
    OutcomeProbabilities o;
    for (Eigen::Index n = 0; n < P.rows(); ++n)
        for (Eigen::Index m = 0; m < P.cols(); ++m) {
            switch (ofilter_outcome(int(n), int(m), k)) {
            case 1: o.plus += P(n, m); break;
            case -1: o.minus += P(n, m); break;
            default: o.inconclusive += P(n, m);
            }
        }
    return o;
}

OutcomeProbabilities ofilter_probabilities(const Ensemble& e, const OFilterSpec& spec, int m) {
    spec.validate();
    return ofilter_probabilities(photon_count_distribution(e, m, spec.frame.basis(), spec.efficiency),
                                 spec.threshold);
}

OutcomeProbabilities ofilter_probabilities(const FockState& s, const OFilterSpec& spec, int m) {
    return ofilter_probabilities(to_ensemble(s), spec, m);
}

OutcomeProbabilities ofilter_probabilities(const DensityOperator& r, const OFilterSpec& spec, int m) {
    return ofilter_probabilities(to_ensemble(r), spec, m);
}

std::array<PolarizationFrame, 3> default_witness_frames() {
    return {PolarizationFrame::hv(), PolarizationFrame::diagonal(), PolarizationFrame::circular()};
}

WitnessReport ofilter_witness(const Ensemble& joint, int k, double eta,
                              const std::array<PolarizationFrame, 3>& frames) {
    OFilterSpec probe{k, {}, eta};
    probe.validate();
    WitnessReport r;
    double total_conclusive = 0;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Matrix2cd b = frames[i].basis();
        double corr = 0, conclusive = 0;
        for (int a = 0; a < 2; ++a) {
            Eigen::Vector2cd u = b.row(a).transpose();
            auto o = ofilter_probabilities(photon_count_distribution(condition_on_micro(joint, u), 0, b, eta), k);
            const double sa = a == 0 ? 1 : -1;
            corr += sa * (o.plus - o.minus);
            conclusive += o.conclusive();
        }
        if (conclusive < 1e-300)
            throw DegenerateOutcomeError("no conclusive O-filter events in basis " + std::to_string(i));
        r.V[i] = std::abs(corr) / conclusive;
        r.conclusive[i] = conclusive;
        total_conclusive += conclusive;
    }
    r.S = r.V[0] + r.V[1] + r.V[2];
    r.conclusive_fraction = total_conclusive / 3;
    return r;
}

WitnessReport pseudo_spin_witness(const Ensemble& joint, const MacroQubit& q,
                                  const std::array<PolarizationFrame, 3>& frames) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (std::abs(bloch(frames[i]).dot(bloch(frames[j]))) > 1e-9)
                throw ValidationError("witness frames must be orthogonal on the Bloch sphere");
    if (joint.layout.single(1) != q.phi_h.layout()) throw LayoutMismatchError("macro qubit layout differs");
    WitnessReport r;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Matrix2cd b = frames[i].basis();
        const Vec up = q.along(b.row(0).transpose()).amplitudes(), dn = q.along(b.row(1).transpose()).amplitudes();
        double corr = 0;
        for (int a = 0; a < 2; ++a) {
            Ensemble cond = condition_on_micro(joint, b.row(a).transpose());
            const double s = (up.adjoint() * cond.columns).squaredNorm() - (dn.adjoint() * cond.columns).squaredNorm();
            corr += (a == 0 ? 1 : -1) * s;
        }
        r.V[i] = std::abs(corr);
        r.conclusive[i] = 1;
    }
    r.S = r.V[0] + r.V[1] + r.V[2];
    r.conclusive_fraction = 1;
    return r;
}

namespace {

std::vector<double> bob_distribution(const Eigen::MatrixXd& P, const OFilterSpec& bob, BobObservable obs) {
    if (obs == BobObservable::photon_counts) return {P.data(), P.data() + P.size()};
    auto o = ofilter_probabilities(P, bob.threshold);
    return {o.plus, o.minus, o.inconclusive};
}

// Joint state part with no micro photon (absent for ideal inputs, kept so the
// marginal stays complete).
Ensemble micro_vacuum(const Ensemble& joint) {
    const ModeLayout& l = joint.layout;
    ModeLayout b = l.single(1);
    const Eigen::Index db = Eigen::Index(b.dimension());
    Mat out(db, joint.columns.cols());
    for (Eigen::Index c = 0; c < joint.columns.cols(); ++c) out.col(c) = joint.columns.col(c).segment(0, db);
    return {b, std::move(out)};
}

}  // namespace

NoSignalReport nosignaling_check(const Ensemble& joint, const PolarizationFrame& alice1,
                                 const PolarizationFrame& alice2, const OFilterSpec& bob, BobObservable obs) {
    bob.validate();
    const Eigen::Matrix2cd bb = bob.frame.basis();
    // micro photons beyond one (cutoff > 1 on A) are outside this model
    if (joint.layout.cutoff(0) != 1) throw LayoutMismatchError("micro branch must have cutoff 1");
    const Eigen::MatrixXd P0 = photon_count_distribution(micro_vacuum(joint), 0, bb, bob.efficiency);
    NoSignalReport r;
    std::array<std::vector<double>, 2> cond;
    for (int s = 0; s < 2; ++s) {
        const Eigen::Matrix2cd a = (s == 0 ? alice1 : alice2).basis();
        Eigen::MatrixXd P = P0;
        for (int o = 0; o < 2; ++o) {
            Eigen::MatrixXd Po =
                photon_count_distribution(condition_on_micro(joint, a.row(o).transpose()), 0, bb, bob.efficiency);
            P += Po;
            if (s == 0) {
                cond[o] = bob_distribution(Po, bob, obs);
                double tot = std::accumulate(cond[o].begin(), cond[o].end(), 0.0);
                if (tot > 0)
                    for (double& x : cond[o]) x /= tot;
            }
        }
        (s == 0 ? r.bob_first : r.bob_second) = bob_distribution(P, bob, obs);
    }
    for (std::size_t i = 0; i < r.bob_first.size(); ++i) {
        r.max_deviation = std::max(r.max_deviation, std::abs(r.bob_first[i] - r.bob_second[i]));
        r.conditional_gap = std::max(r.conditional_gap, std::abs(cond[0][i] - cond[1][i]));
    }
    return r;
}

MonteCarloNoSignal nosignaling_monte_carlo(const Ensemble& joint, const PolarizationFrame& alice1,
                                           const PolarizationFrame& alice2, const OFilterSpec& bob,
                                           std::size_t samples, std::uint64_t seed) {
    bob.validate();
    if (samples < 2) throw ValidationError("Monte-Carlo needs at least two samples");
    const Eigen::Matrix2cd bb = bob.frame.basis();
    std::mt19937_64 rng(seed);
    MonteCarloNoSignal r;
    r.samples = samples;
    for (int s = 0; s < 2; ++s) {
        const Eigen::Matrix2cd a = (s == 0 ? alice1 : alice2).basis();
        // exact Born weights over (a, n, m) before detection; only nonzero cells are sampled
        std::vector<double> w;
        std::vector<std::pair<int, int>> cell;
        for (int o = 0; o < 3; ++o) {
            Eigen::MatrixXd P = o < 2 ? photon_count_distribution(condition_on_micro(joint, a.row(o).transpose()), 0, bb)
                                      : photon_count_distribution(micro_vacuum(joint), 0, bb);
            for (Eigen::Index n = 0; n < P.rows(); ++n)
                for (Eigen::Index m = 0; m < P.cols(); ++m)
                    if (P(n, m) > 0) {
                        w.push_back(P(n, m));
                        cell.emplace_back(int(n), int(m));
                    }
        }
        std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
        std::array<double, 3> counts{};
        for (std::size_t t = 0; t < samples; ++t) {
            auto [n, m] = cell[pick(rng)];
            if (bob.efficiency < 1) {
                n = std::binomial_distribution<int>(n, bob.efficiency)(rng);
                m = std::binomial_distribution<int>(m, bob.efficiency)(rng);
            }
            int out = ofilter_outcome(n, m, bob.threshold);
            counts[out == 1 ? 0 : out == -1 ? 1 : 2] += 1;
        }
        for (int i = 0; i < 3; ++i) (s == 0 ? r.p_first : r.p_second)[i] = counts[i] / double(samples);
    }
    for (int i = 0; i < 3; ++i) {
        const double v = (r.p_first[i] * (1 - r.p_first[i]) + r.p_second[i] * (1 - r.p_second[i])) / double(samples);
        r.standard_error[i] = std::sqrt(v);
        if (v > 0) r.max_abs_z = std::max(r.max_abs_z, std::abs(r.p_first[i] - r.p_second[i]) / std::sqrt(v));
    }
    return r;
}

}  // namespace qiopa
