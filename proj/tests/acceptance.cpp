// Acceptance run: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qiopa/amplifier.hpp"
#include "qiopa/channels.hpp"
#include "qiopa/cloning.hpp"
#include "qiopa/errors.hpp"
#include "qiopa/kernels.hpp"
#include "qiopa/measurement.hpp"
#include "qiopa/wigner.hpp"
#include "test_util.hpp"

using namespace qiopa;

namespace {

// Collects failed checks and the measured values worth printing.
struct Checks {
    std::vector<std::string> failures;
    std::ostringstream notes;
    void require(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    template <class T>
    void note(const char* name, T v) {
        notes << (notes.tellp() > 0 ? ", " : "") << name << "=" << v;
    }
};

std::string fmt(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", x);
    return b;
}

Eigen::Matrix2cd random_unitary(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0, 1);
    Eigen::Matrix2cd m;
    for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = cplx(n(rng), n(rng));
    Eigen::HouseholderQR<Eigen::Matrix2cd> qr(m);
    return qr.householderQ();
}

Eigen::Vector2cd random_qubit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0, 1);
    return Eigen::Vector2cd(cplx(n(rng), n(rng)), cplx(n(rng), n(rng))).normalized();
}

PolarizationFrame random_frame(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0, 1);
    return {std::acos(1 - 2 * u(rng)), 2 * M_PI * u(rng)};
}

// |<a|b>| for states of equal mode structure but possibly different cutoffs.
double overlap_abs(const FockState& a, const FockState& b) {
    if (a.layout() == b.layout()) return std::abs(overlap(a, b));
    cplx s = 0;
    for (std::size_t i = 0; i < a.layout().dimension(); ++i) {
        if (a.amplitudes()[Eigen::Index(i)] == cplx(0)) continue;
        Occ o = a.layout().occupations(i);
        if (b.layout().contains(o)) s += std::conj(a.amplitudes()[Eigen::Index(i)]) * b.amplitude(o);
    }
    return std::abs(s);
}

void cloning(Checks& c) {
    auto h = covariant_clone_map(PolarizationFrame::hv());
    c.require(std::abs(h.clone_fidelity - 5.0 / 6) < 1e-12, "covariant map clone fidelity != 5/6");
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t)
        c.require(std::abs(covariant_clone_map(random_frame(rng)).clone_fidelity - 5.0 / 6) < 1e-12,
                  "covariant map not covariant");
    c.require(std::abs(universal_clone_fidelity({1, 2}) - 5.0 / 6) < 1e-15, "universal 1->2 table");
    auto amp = amplifier_clone_extract(0.05);
    c.require(std::abs(amp.clone_fidelity - 5.0 / 6) < 1e-3, "amplifier-extracted fidelity at g=0.05");
    c.require(std::abs(unot_fidelity(1) - 2.0 / 3) < 1e-15, "U-NOT 2/3");
    c.require(std::abs(amp.unot_fidelity - 2.0 / 3) < 1e-3, "amplifier-extracted U-NOT");
    const double pc2 = phase_covariant_fidelity({1, 2, CloneFlavor::phase_covariant});
    const double pc3 = phase_covariant_fidelity({1, 3, CloneFlavor::phase_covariant});
    c.require(std::abs(pc2 - 0.8536) < 1e-4, "phase-covariant 1->2");
    c.require(std::abs(pc3 - 0.8333) < 1e-4, "phase-covariant 1->3");
    c.note("F_map", fmt(h.clone_fidelity));
    c.note("F_amp(0.05)", fmt(amp.clone_fidelity));
    c.note("F_pc(1->2)", fmt(pc2));
    c.note("F_pc(1->3)", fmt(pc3));
}

void statistics(Checks& c) {
    double worst_tot = 0, worst_vis = 0;
    std::vector<double> ph;
    for (int i = 0; i < 24; ++i) ph.push_back(2 * M_PI * i / 24);
    for (double g : {0.5, 1.0, 1.5}) {
        AmplifierParams p(g);
        const double m = p.mbar();
        double nc = noncollinear_terms(p).mean_photons_spatial(0);
        double co = collinear_terms(p, 0.0).mean_photons_spatial(0);
        worst_tot = std::max({worst_tot, std::abs(nc - (3 * m + 1)) / (3 * m + 1),
                              std::abs(co - (4 * m + 1)) / (4 * m + 1)});
        double vn = fringe_scan(Config::noncollinear, p, ph).visibility;
        double vc = fringe_scan(Config::collinear, p, ph).visibility;
        worst_vis = std::max({worst_vis, std::abs(vn - (m + 1) / (3 * m + 1)),
                              std::abs(vc - (2 * m + 1) / (4 * m + 1))});
    }
    c.require(worst_tot < 1e-4, "mode totals");
    c.require(worst_vis < 1e-3, "fringe visibilities");
    std::vector<double> quad{0, M_PI / 2, M_PI, 3 * M_PI / 2};
    double ac = fringe_scan(Config::collinear, AmplifierParams(3.0), quad, 1e-6).visibility;
    double an = fringe_scan(Config::noncollinear, AmplifierParams(3.0), quad, 1e-6).visibility;
    c.require(std::abs(ac - 0.5) < 0.02, "collinear asymptote");
    c.require(std::abs(an - 1.0 / 3) < 0.02, "non-collinear asymptote");
    c.note("max_rel_total_err", fmt(worst_tot));
    c.note("max_vis_err", fmt(worst_vis));
    c.note("V_col(3)", fmt(ac));
    c.note("V_nc(3)", fmt(an));
}

void oracle(Checks& c) {
    double worst = 1;
    for (double g : {0.2, 0.6, 1.0}) {
        AmplifierParams p(g);
        auto tb = twin_beam(p);
        ModeLayout hv(1, tb.layout().cutoff(0) + 4);
        auto ev = oracle_evolve(Generator::collinear, g, vacuum(hv));
        worst = std::min(worst, overlap_abs(tb, FockState(ModeLayout(2, hv.cutoff(0), 1), ev.state.amplitudes())));

        auto col = collinear_macrostate(p, 0.8, {}, Labels::lab);
        ModeLayout cl(1, col.layout().cutoff(0) + 4);
        Vec in = Vec::Zero(Eigen::Index(cl.dimension()));
        in[Eigen::Index(cl.flat_index({1, 0, 0, 0}))] = M_SQRT1_2;
        in[Eigen::Index(cl.flat_index({0, 1, 0, 0}))] = std::polar(M_SQRT1_2, 0.8);
        worst = std::min(worst, overlap_abs(col, oracle_evolve(Generator::collinear, g, FockState(cl, in)).state));

        auto nc = noncollinear_macrostate(p, PolarizationFrame::hv());
        auto en = oracle_evolve(Generator::noncollinear, g, build_fock(nc.layout(), {1, 0, 0, 0}));
        worst = std::min(worst, overlap_abs(nc, en.state));
    }
    c.require(worst >= 1 - 1e-6, "overlap below 1 - 1e-6");
    c.note("min_overlap", fmt(worst));
    c.note("1-min_overlap", fmt(1 - worst));
}

void decoherence(Checks& c) {
    const double cat = coherent_cat_bures(1.0);
    c.require(std::abs(cat - 0.0959) < 1e-3, "coherent cat at x=1");
    std::vector<double> xs;
    for (int i = 1; i <= 30; ++i) xs.push_back(0.1 * i);
    auto pc = mqs_bures_curve(MqsKind::phase_covariant, 12.5, xs);
    auto co = mqs_bures_curve(MqsKind::coherent, 12.5, xs);
    double margin = 1;
    for (std::size_t i = 0; i < xs.size(); ++i) margin = std::min(margin, pc.points[i].D - co.points[i].D);
    c.require(margin > 0, "PC curve not above coherent curve");

    AmplifierParams p(0.25);
    std::mt19937_64 rng(3);
    const double ref = universal_bures_full(p, PolarizationFrame::hv(), 0.7, 1e-10);
    double spread = 0;
    for (int t = 0; t < 20; ++t)
        spread = std::max(spread, std::abs(universal_bures_full(p, random_frame(rng), 0.7, 1e-10) - ref));
    c.require(spread < 1e-6, "universal frame dependence");
    c.note("D_cat(1)", fmt(cat));
    c.note("D_pc(1)", fmt(pc.points[9].D));
    c.note("min(D_pc-D_coh)", fmt(margin));
    c.note("frame_spread", fmt(spread));
}

void wigner(Checks& c) {
    const double target = -M_2_PI;
    auto one = DensityOperator::from_pure(build_fock(ModeLayout(1, 1, 1), {1, 0, 0, 0}));
    const double w1 = wigner_at(one, 0);
    c.require(std::abs(w1 - target) < 1e-6, "W(0) of |1>");

    auto s = degenerate_opa_state(3.0, build_fock(ModeLayout(1, 1, 1), {1, 0, 0, 0}));
    const double ws = wigner_origin(s);
    c.require(std::abs(ws - target) < 1e-6, "W(0) of the g=3 squeezed photon");

    double worst_norm = 0;
    auto grid_of = [&](double R) {
        auto rho = R > 0 ? lossy_single_mode(s, LossSpec(1 - R)) : DensityOperator::from_pure(s);
        auto g = wigner_grid(rho, auto_grid(rho, 121), 1e-3, s.truncation_deficit());
        worst_norm = std::max(worst_norm, std::abs(g.integral() - 1));
        return negativity_report(g);
    };
    auto n0 = grid_of(0), n1 = grid_of(0.005), n2 = grid_of(0.5);
    c.require(std::abs(n0.min_value - target) < 1e-6, "grid minimum of the lossless state");
    c.require(n1.min_value < 0 && n1.negative_volume > 0, "no negativity at R=0.005");
    c.require(n2.min_value >= -1e-3, "negativity at R=0.5");
    c.require(worst_norm < 1e-3, "grid normalization");
    c.note("W0(|1>)", fmt(w1));
    c.note("W0(g=3)", fmt(ws));
    c.note("cutoff", s.layout().cutoff(0));
    c.note("minW(R=.005)", fmt(n1.min_value));
    c.note("minW(R=.5)", fmt(n2.min_value));
    c.note("max|int-1|", fmt(worst_norm));
    c.note("kernel", simd::kernels().name);
}

void werner(Checks& c) {
    double worst = 0;
    for (double g : {0.4, 0.8, 1.2})
        for (double eta : {0.1, 0.5, 0.9}) {
            AmplifierParams p(g);
            auto o = werner_bruteforce(p, eta);
            worst = std::max(worst, (o.rho - werner_extract(p, eta)).cwiseAbs().maxCoeff());
        }
    c.require(worst < 1e-6, "closed form vs brute force");
    // The eta -> 0 limit is 1/(2 tanh^2 g + 1): 0.33554 at g = 3, i.e. 2.2e-3
    // above 1/3, so the boundary is checked against the quoted 0.3364 and the
    // approach to 1/3 is followed to larger g.
    const double p3 = werner_weight(AmplifierParams(3.0), 1e-4);
    c.require(std::abs(p3 - 0.3364) < 1e-3, "p(g=3, eta=1e-4) not within 1e-3 of 0.3364");
    c.require(std::abs(p3 - 1 / (2 * std::pow(std::tanh(3.0), 2) + 1)) < 1e-4, "eta -> 0 limit at g=3");
    double prev = 1, g13 = -1;
    for (int i = 1; i <= 80; ++i) {
        const double w = werner_weight(AmplifierParams(0.1 * i), 1e-6);
        if (!(w < prev && w > 1.0 / 3)) c.require(false, "p not decreasing towards 1/3");
        if (g13 < 0 && w - 1.0 / 3 < 1e-3) g13 = 0.1 * i;
        prev = w;
    }
    c.require(g13 > 0, "p never within 1e-3 of 1/3");
    double eig = 0;
    bool flips = true;
    for (double p : {0.0, 0.1, 1.0 / 3 - 1e-8, 1.0 / 3, 1.0 / 3 + 1e-8, 0.5, 0.9, 1.0}) {
        auto r = ppt_entangled(werner_matrix(p));
        eig = std::max(eig, std::abs(r.min_eigenvalue - (1 - 3 * p) / 4));
        flips = flips && r.entangled == (p > 1.0 / 3);
    }
    c.require(eig < 1e-10, "PPT minimum eigenvalue");
    c.require(flips, "PPT verdict does not flip at 1/3");
    c.note("max_elem_diff", fmt(worst));
    c.note("p(g=3,eta=1e-4)", fmt(p3));
    c.note("p-1/3 at g=3", fmt(p3 - 1.0 / 3));
    c.note("first g with p-1/3<1e-3", fmt(g13));
    c.note("max_eig_err", fmt(eig));
}

void witness(Checks& c) {
    AmplifierParams p(0.6);
    auto joint = micro_macro_state(p);
    const ModeLayout& l = joint.layout();
    auto q = macro_qubit(p, l.single(1));
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0, 1);
    const auto dB = Eigen::Index(l.single(1).dimension());
    const auto iH = Eigen::Index(l.flat_index({1, 0, 0, 0})), iV = Eigen::Index(l.flat_index({0, 1, 0, 0}));
    double worst = -10;
    for (int t = 0; t < 1000; ++t) {
        const int rank = 1 + t % 4;
        Mat cols = Mat::Zero(Eigen::Index(l.dimension()), rank);
        std::vector<double> w(rank);
        double wt = 0;
        for (auto& x : w) wt += (x = u(rng));
        for (int k = 0; k < rank; ++k) {
            Eigen::Vector2cd a = random_qubit(rng), b = random_qubit(rng);
            // macro side: mostly on the macro-qubit span, with a random admixture
            Vec macro = q.along(b).amplitudes() * u(rng) +
                        test::random_state(l.single(1), unsigned(5000 + 7 * t + k)).amplitudes() * u(rng) * u(rng);
            macro.normalize();
            const double s = std::sqrt(w[k] / wt);
            cols.col(k).segment(iH, dB) = s * a[0] * macro;
            cols.col(k).segment(iV, dB) = s * a[1] * macro;
        }
        worst = std::max(worst, pseudo_spin_witness({l, cols}, q).S);
    }
    c.require(worst <= 1 + 1e-9, "separable state above 1");

    auto singlet = to_ensemble(micro_macro_state(AmplifierParams(0.0)));
    const double s3 = ofilter_witness(singlet, 0, 1.0).S;
    const double s3q = pseudo_spin_witness(singlet, macro_qubit(AmplifierParams(0.0), singlet.layout.single(1))).S;
    c.require(std::abs(s3 - 3) < 1e-9 && std::abs(s3q - 3) < 1e-9, "g=0 singlet S != 3");

    double dev = 0;
    // the traced non-collinear idler multiplies the ensemble width, so it runs at lower gain
    const std::vector<std::pair<Config, double>> sources = {{Config::collinear, 0.3}, {Config::collinear, 0.8},
                                                            {Config::collinear, 1.2}, {Config::noncollinear, 0.3},
                                                            {Config::noncollinear, 0.6}};
    for (auto [cfg, g] : sources) {
        auto jt = micro_macro(AmplifierParams(g), cfg);
        for (int t = 0; t < 10; ++t) {
            OFilterSpec bob{t % 4, random_frame(rng), 0.2 + 0.8 * u(rng)};
            auto a1 = random_frame(rng), a2 = random_frame(rng);
            dev = std::max(dev, nosignaling_check(jt, a1, a2, bob).max_deviation);
            dev = std::max(dev, nosignaling_check(jt, a1, a2, bob, BobObservable::photon_counts).max_deviation);
        }
    }
    c.require(dev < 1e-12, "Bob marginal depends on Alice's basis");
    c.note("max_separable_S", fmt(worst));
    c.note("S_singlet", fmt(s3));
    c.note("max_bob_dev", fmt(dev));
}

void properties(Checks& c) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 1);
    const int cases = 500;
    double norm_err = 0, trace_err = 0, comp_err = 0, compl_err = 0;
    int comb_bad = 0;
    for (int t = 0; t < cases; ++t) {
        // unitary polarization rotations keep the norm; loss keeps the trace
        ModeLayout l(1 + t % 2, 2 + t % 2);
        auto s = test::sector_closed_random(l, unsigned(10 + t));
        auto r = apply_mode_unitary(s, random_unitary(rng), int(t % l.spatial_modes()));
        norm_err = std::max(norm_err, std::abs(r.norm2() - 1));
        auto rho = test::random_density(ModeLayout(2, 2), 1 + t % 3, unsigned(20000 + t));
        double T1 = u(rng), T2 = u(rng);
        auto a = apply_loss(rho, LossSpec(T1));
        trace_err = std::max(trace_err, std::abs(a.trace() - 1));
        auto b = apply_loss(a, LossSpec(T2));
        auto d = apply_loss(rho, LossSpec(T1 * T2));
        comp_err = std::max(comp_err, (b.matrix() - d.matrix()).cwiseAbs().maxCoeff());

        OFilterSpec spec{int(u(rng) * 6), random_frame(rng), u(rng)};
        auto o = ofilter_probabilities(test::sector_closed_random(ModeLayout(1, 4), unsigned(40000 + t)), spec);
        compl_err = std::max(compl_err, std::abs(o.plus + o.minus + o.inconclusive - 1));
        if (o.plus < 0 || o.minus < 0 || o.inconclusive < 0) compl_err = 1;

        // comb: collinear amplitudes sit on (odd, even) only
        AmplifierParams p(1.5 * u(rng));
        auto terms = collinear_terms(p, 2 * M_PI * u(rng));
        for (const auto& term : terms.terms)
            if (term.amp != cplx(0) && (term.occ[0] % 2 == 0 || term.occ[1] % 2 == 1)) ++comb_bad;
        if (std::abs(terms.norm2() + terms.deficit - 1) > 1e-10) ++comb_bad;
    }
    c.require(norm_err < 1e-12, "rotation norm");
    c.require(trace_err < 1e-10, "loss trace");
    c.require(comp_err < 1e-10, "loss composition");
    c.require(compl_err < 1e-10, "O-filter completeness");
    c.require(comb_bad == 0, "comb support");
    c.note("cases", cases);
    c.note("norm", fmt(norm_err));
    c.note("trace", fmt(trace_err));
    c.note("T1T2", fmt(comp_err));
    c.note("ofilter", fmt(compl_err));
    c.note("comb_violations", comb_bad);
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Checks&)> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> all = {
        {1, "cloning constants", 1, cloning},
        {2, "macrostate statistics", 60, statistics},
        {3, "oracle equivalence", 60, oracle},
        {4, "decoherence curves", 600, decoherence},
        {5, "Wigner negativity and normalization", 300, wigner},
        {6, "Werner pipeline", 120, werner},
        {7, "witness and no-signaling", 300, witness},
        {8, "property suites", 300, properties},
    };
    int failed = 0;
    for (const auto& k : all) {
        Checks c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            k.run(c);
        } catch (const std::exception& e) {
            c.failures.push_back(std::string("exception: ") + e.what());
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt > k.budget_s) c.failures.push_back("runtime " + fmt(dt) + " s over budget");
        const bool ok = c.failures.empty();
        failed += !ok;
        std::printf("[%s] criterion %d: %s (%.2f s / %.0f s budget) %s", ok ? "PASS" : "FAIL", k.id, k.name, dt,
                    k.budget_s, c.notes.str().c_str());
        for (const auto& f : c.failures) std::printf(" | failed: %s", f.c_str());
        std::printf("\n");
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(all.size()) - failed, all.size());
    return failed;
}
