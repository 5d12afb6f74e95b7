#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "qiopa/wigner.hpp"
#include "test_util.hpp"

using namespace qiopa;

namespace {

DensityOperator fock_density(int n, int cutoff) {
    ModeLayout l(1, cutoff, 1);
    return DensityOperator::from_pure(build_fock(l, {n, 0, 0, 0}));
}

// Displacement by matrix exponential in an enlarged box, cropped.
Mat displacement(cplx beta, int cutoff, int pad = 80) {
    const int n = cutoff + pad;
    Mat a = Mat::Zero(n + 1, n + 1);
    for (int k = 1; k <= n; ++k) a(k - 1, k) = std::sqrt(double(k));
    Mat gen = beta * a.adjoint() - std::conj(beta) * a;
    Mat d = gen.exp();
    return d.topLeftCorner(cutoff + 1, cutoff + 1);
}

// Closed form for the squeezed photon: W_1 evaluated at S^-1 alpha.
double squeezed_photon_wigner(double g, cplx alpha) {
    const cplx b(alpha.real() * std::exp(-g), alpha.imag() * std::exp(g));
    const double r2 = std::norm(b);
    return M_2_PI * (4 * r2 - 1) * std::exp(-2 * r2);
}

// (2/pi) |<gamma|psi>|^2, the Wigner function after loss T = 1/2 evaluated at gamma / sqrt2.
double husimi_like(const FockState& s, cplx gamma) {
    cplx sum = 0;
    const Vec& a = s.amplitudes();
    const double lr = std::log(std::abs(gamma) + 1e-300), th = std::arg(gamma);
    for (Eigen::Index n = 0; n < a.size(); ++n) {
        if (a[n] == cplx(0)) continue;
        const double mag = std::exp(n * lr - 0.5 * std::lgamma(n + 1.0) - 0.5 * std::norm(gamma));
        sum += a[n] * mag * std::polar(1.0, -n * th);
    }
    return M_2_PI * std::norm(sum);
}

}  // namespace

TEST_CASE("characteristic function closed forms") {
    auto vac = fock_density(0, 30), one = fock_density(1, 30);
    std::vector<cplx> eta = {0.0, {0.3, 0.1}, {-1.2, 0.7}, {2.0, -2.5}, {0, 4}};
    auto cv = characteristic_function(vac, eta), c1 = characteristic_function(one, eta);
    CHECK(cv[0] == cplx(1.0));
    for (std::size_t p = 0; p < eta.size(); ++p) {
        const double r2 = std::norm(eta[p]);
        CHECK(std::abs(cv[p] - std::exp(-r2 / 2)) < 1e-8);
        CHECK(std::abs(c1[p] - (1 - r2) * std::exp(-r2 / 2)) < 1e-8);
    }
    CHECK_THROWS_AS(characteristic_function(vac, {cplx(500, 0)}), OutOfRangeError);
    CHECK_THROWS_AS(characteristic_function(test::random_density(ModeLayout(1, 2), 1, 1), eta),
                    LayoutMismatchError);
}

TEST_CASE("displacement matrix elements against matrix exponential") {
    ModeLayout l(1, 12, 1);
    auto r = test::random_density(l, 3, 4);
    std::vector<cplx> eta = {{0.4, -0.2}, {1.1, 0.9}, {-2.0, 0.3}};
    auto chi = characteristic_function(r, eta);
    for (std::size_t p = 0; p < eta.size(); ++p) {
        cplx ref = (r.matrix() * displacement(eta[p], 12)).trace();
        CHECK(std::abs(chi[p] - ref) < 1e-10);
    }
    // displaced parity: (2/pi) Tr[rho D(2 alpha) Pi]
    std::vector<cplx> alpha = {{0.2, 0.1}, {-0.7, 0.4}, {0.0, -1.3}};
    auto w = wigner_values(r, alpha);
    Mat parity = Mat::Zero(13, 13);
    for (int n = 0; n <= 12; ++n) parity(n, n) = n % 2 ? -1 : 1;
    for (std::size_t p = 0; p < alpha.size(); ++p) {
        cplx ref = M_2_PI * (r.matrix() * displacement(2.0 * alpha[p], 12) * parity).trace();
        CHECK(std::abs(ref.imag()) < 1e-10);
        CHECK(std::abs(w[p] - ref.real()) < 1e-10);
    }
}

TEST_CASE("Wigner trivial values") {
    CHECK(wigner_at(fock_density(0, 10), 0.0) == doctest::Approx(M_2_PI).epsilon(1e-12));
    CHECK(wigner_at(fock_density(1, 10), 0.0) == doctest::Approx(-M_2_PI).epsilon(1e-12));
    for (int n = 0; n < 6; ++n) {
        auto r = fock_density(n, 8);
        CHECK(std::abs(wigner_at(r, {0.8, -0.3}) - (n % 2 ? -1 : 1) * M_2_PI * std::exp(-2 * 0.73) *
                                                   std::assoc_laguerre(n, 0, 4 * 0.73)) < 1e-12);
    }
}

TEST_CASE("parity identity at the origin") {
    for (int t = 0; t < 10; ++t) {
        auto r = test::random_density(ModeLayout(1, 6, 1), 2, 40 + t);
        CHECK(std::abs(wigner_at(r, 0.0) - wigner_origin(r)) < 1e-12);
    }
}

TEST_CASE("Wigner agrees with the Fourier transform of chi") {
    auto r = test::random_density(ModeLayout(1, 3, 1), 2, 5);
    const int n = 161;
    const double L = 7, h = 2 * L / (n - 1);
    std::vector<cplx> eta;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) eta.emplace_back(-L + i * h, -L + j * h);
    auto chi = characteristic_function(r, eta);
    for (cplx alpha : {cplx(0.0), cplx(0.4, -0.3)}) {
        cplx sum = 0;
        for (std::size_t p = 0; p < eta.size(); ++p)
            sum += std::exp(alpha * std::conj(eta[p]) - std::conj(alpha) * eta[p]) * chi[p];
        double w = (sum * h * h / (M_PI * M_PI)).real();
        CHECK(std::abs(w - wigner_at(r, alpha)) < 1e-6);
    }
}

TEST_CASE("degenerate OPA state") {
    ModeLayout l(1, 20, 1);
    auto vac = build_fock(l, {0, 0, 0, 0}), one = build_fock(l, {1, 0, 0, 0});
    auto s0 = degenerate_opa_state(0.0, one);
    CHECK(std::abs(s0.amplitudes()[1] - 1.0) < 1e-15);
    auto sv = degenerate_opa_state(1.0, vac, 1e-12);
    CHECK(sv.mean_photons(0) == doctest::Approx(std::pow(std::sinh(1.0), 2)).epsilon(1e-9));
    CHECK(std::abs(sv.mean_photons(0) - 1.3811) < 1e-4);
    auto s1 = degenerate_opa_state(1.0, one, 1e-12);
    for (Eigen::Index n = 0; n < s1.amplitudes().size(); n += 2) CHECK(s1.amplitudes()[n] == cplx(0));
    CHECK(s1.mean_photons(0) == doctest::Approx(3 * std::pow(std::sinh(1.0), 2) + 1).epsilon(1e-9));

    // a general input goes through the generator oracle; on {0,1} both routes agree
    ModeLayout big(1, 60, 1);
    Vec a = Vec::Zero(61);
    a[0] = 0.6;
    a[1] = cplx(0, 0.8);
    FockState mix(big, a);
    auto cf = degenerate_opa_state(0.5, mix, 1e-14);
    auto orc = oracle_evolve(Generator::degenerate, 0.5, mix).state;
    cplx ov = 0;
    for (Eigen::Index n = 0; n < std::min(cf.amplitudes().size(), orc.amplitudes().size()); ++n)
        ov += std::conj(cf.amplitudes()[n]) * orc.amplitudes()[n];
    CHECK(std::abs(ov) > 1 - 1e-10);
    a[2] = 0.1;
    a /= a.norm();
    auto viaoracle = degenerate_opa_state(0.5, FockState(big, a));
    CHECK(viaoracle.norm2() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(degenerate_opa_state(-1, one), ValidationError);
}

TEST_CASE("squeezed photon Wigner function") {
    const double g = 1.0;
    ModeLayout l(1, 1, 1);
    auto s = degenerate_opa_state(g, build_fock(l, {1, 0, 0, 0}), 1e-14);
    auto r = DensityOperator::from_pure(s);
    for (cplx a : {cplx(0), cplx(1.5, 0.1), cplx(-0.3, 0.2), cplx(3.0, -0.05)})
        CHECK(std::abs(wigner_at(r, a) - squeezed_photon_wigner(g, a)) < 1e-9);
    // the Re quadrature is anti-squeezed
    auto q = quadrature_moments(r);
    CHECK(q.var_re == doctest::Approx(0.75 * std::exp(2 * g)).epsilon(1e-9));
    CHECK(q.var_im == doctest::Approx(0.75 * std::exp(-2 * g)).epsilon(1e-9));

    auto grid = wigner_grid(r, auto_grid(r, 161));
    CHECK(std::abs(grid.integral() - 1) < 1e-3);
    auto neg = negativity_report(grid);
    CHECK(neg.min_value == doctest::Approx(-M_2_PI).epsilon(1e-6));
    CHECK(neg.negative_volume > 0);
}

TEST_CASE("grid validation and tail check") {
    auto r = fock_density(1, 5);
    CHECK_THROWS_AS(wigner_grid(r, {-1, 1, -1, 1, 41, 41}), TailMassError);
    CHECK_THROWS_AS(wigner_grid(r, {1, -1, -6, 6, 41, 41}), ValidationError);
    CHECK_THROWS_AS(wigner_grid(r, {-6, 6, -6, 6, 1, 41}), ValidationError);
    auto vac = wigner_grid(fock_density(0, 5), {-6, 6, -6, 6, 121, 121});
    CHECK(std::abs(vac.integral() - 1) < 1e-3);
    auto n = negativity_report(vac);
    CHECK(n.min_value >= -1e-10);
    CHECK(n.negative_volume < 1e-12);
}

TEST_CASE("loss on the squeezed photon") {
    const double g = 0.8;
    ModeLayout l(1, 1, 1);
    auto s = degenerate_opa_state(g, build_fock(l, {1, 0, 0, 0}), 1e-14);
    auto exact = apply_loss(s, LossSpec(0.5));
    auto pruned = lossy_single_mode(s, LossSpec(0.5));
    CHECK((exact.matrix() - pruned.matrix()).cwiseAbs().maxCoeff() < 1e-9);
    // at T = 1/2 the Wigner function is the Husimi function of the input, rescaled
    for (cplx a : {cplx(0), cplx(0.5, 0.2), cplx(-1.0, 0.7)})
        CHECK(std::abs(wigner_at(pruned, a) - husimi_like(s, std::sqrt(2.0) * a)) < 1e-9);
    double prev = -1;
    for (double R : {0.0, 0.005, 0.1, 0.5}) {
        auto lossy = lossy_single_mode(s, LossSpec(1 - R));
        CHECK(lossy.trace() == doctest::Approx(1.0).epsilon(1e-9));
        double w0 = wigner_origin(lossy);
        CHECK(w0 >= prev);
        prev = w0;
    }
    CHECK(std::abs(prev) < 1e-9);
}

TEST_CASE("large-argument accuracy against the squeezed photon closed form") {
    const double g = 2.0;
    ModeLayout l(1, 1, 1);
    auto r = DensityOperator::from_pure(degenerate_opa_state(g, build_fock(l, {1, 0, 0, 0}), 1e-14));
    // far out the error is set by the dropped Fock tail (~1e-8 here), not by the recurrence
    for (cplx a : {cplx(0), cplx(5.0, 0.01), cplx(12.0, -0.03), cplx(25.0, 0.0), cplx(-18.0, 0.05)})
        CHECK(std::abs(wigner_at(r, a) - squeezed_photon_wigner(g, a)) < 1e-7);
    CHECK(std::abs(wigner_origin(r) + M_2_PI) < 1e-6);
}
