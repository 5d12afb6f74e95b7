#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qiopa/io.hpp"
#include "qiopa/kernels.hpp"
#include "qiopa/wigner.hpp"

namespace qiopa {

namespace {

void require_single_mode(const ModeLayout& l, const char* what) {
    if (!is_single_mode(l))
        throw LayoutMismatchError(std::string(what) + ": needs a single bosonic mode (one spatial mode, one polarization)");
}

void require_hermitian(const DensityOperator& r) {
    if (r.hermiticity_defect() > 1e-10) throw ValidationError("density operator is not Hermitian");
}

// Distinct values of x = |beta|^2 (merged within 1e-13 relative) and, per
// point, the index of its radius.
struct Radii {
    std::vector<double> x;
    std::vector<std::size_t> of_point;
};

Radii group_radii(const std::vector<double>& xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    Radii r;
    r.of_point.resize(xs.size());
    for (std::size_t i : order) {
        if (r.x.empty() || xs[i] - r.x.back() > 1e-13 * std::max(1.0, xs[i])) r.x.push_back(xs[i]);
        r.of_point[i] = r.x.size() - 1;
    }
    return r;
}

// For every diagonal L: S_L(x_r) = sum_m rho(m, m+L) sign^m g_m^(L)(x_r), x_r = |beta|^2.
// Calls use(L, re, im) with per-radius sums; all-zero diagonals are skipped.
template <class Use>
void diagonal_sums(const Mat& rho, const std::vector<double>& x, double sign, Use&& use) {
    const int c = int(rho.rows()) - 1;
    const auto& k = simd::kernels();
    std::vector<double> dre, dim, a, b, ore(x.size()), oim(x.size());
    for (int L = 0; L <= c; ++L) {
        std::size_t len = 0;
        for (int m = 0; m + L <= c; ++m)
            if (rho(m, m + L) != cplx(0)) len = std::size_t(m) + 1;
        if (len == 0) continue;
        dre.resize(len);
        dim.resize(len);
        a.resize(len);
        b.resize(len);
        for (std::size_t m = 0; m < len; ++m) {
            dre[m] = rho(Eigen::Index(m), Eigen::Index(m + L)).real();
            dim[m] = rho(Eigen::Index(m), Eigen::Index(m + L)).imag();
            a[m] = std::sqrt(double(m) * double(m + L));
            b[m] = 1 / std::sqrt(double(m + 1) * double(m + L + 1));
        }
        simd::LaguerreDiag d{dre.data(), dim.data(), len, L, sign, a.data(), b.data(), 0.5 * std::lgamma(L + 1.0)};
        k.laguerre_sum(d, x.data(), x.size(), ore.data(), oim.data());
        use(L, ore, oim);
    }
}

}  // namespace

bool is_single_mode(const ModeLayout& l) { return l.spatial_modes() == 1 && l.polarizations() == 1; }

std::vector<cplx> characteristic_function(const DensityOperator& r, const std::vector<cplx>& eta) {
    require_single_mode(r.layout(), "characteristic_function");
    require_hermitian(r);
    std::vector<double> xs(eta.size());
    for (std::size_t p = 0; p < eta.size(); ++p) {
        if (!(std::abs(eta[p]) <= kMaxDisplacement))
            throw OutOfRangeError("displacement beyond the validity radius " + format_double(kMaxDisplacement));
        xs[p] = std::norm(eta[p]);
    }
    Radii rad = group_radii(xs);
    std::vector<cplx> out(eta.size(), 0.0);
    diagonal_sums(r.matrix(), rad.x, +1.0, [&](int L, const std::vector<double>& re, const std::vector<double>& im) {
        for (std::size_t p = 0; p < eta.size(); ++p) {
            const cplx s(re[rad.of_point[p]], im[rad.of_point[p]]);
            const cplx e = std::polar(1.0, L * std::arg(eta[p]));
            out[p] += e * s;
            if (L > 0) out[p] += (L % 2 ? -1.0 : 1.0) * std::conj(e * s);
        }
    });
    return out;
}

std::vector<double> wigner_values(const DensityOperator& r, const std::vector<cplx>& alpha) {
    require_single_mode(r.layout(), "wigner");
    require_hermitian(r);
    std::vector<double> xs(alpha.size());
    for (std::size_t p = 0; p < alpha.size(); ++p) {
        if (!(2 * std::abs(alpha[p]) <= kMaxDisplacement))
            throw OutOfRangeError("phase-space point beyond the validity radius");
        xs[p] = 4 * std::norm(alpha[p]);
    }
    Radii rad = group_radii(xs);
    std::vector<double> out(alpha.size(), 0.0);
    std::vector<double> theta(alpha.size());
    for (std::size_t p = 0; p < alpha.size(); ++p) theta[p] = std::arg(alpha[p]);
    diagonal_sums(r.matrix(), rad.x, -1.0, [&](int L, const std::vector<double>& re, const std::vector<double>& im) {
        const double w = L == 0 ? 1.0 : 2.0;
        for (std::size_t p = 0; p < alpha.size(); ++p) {
            const std::size_t q = rad.of_point[p];
            out[p] += w * (std::cos(L * theta[p]) * re[q] - std::sin(L * theta[p]) * im[q]);
        }
    });
    for (double& v : out) v *= M_2_PI;
    return out;
}

double wigner_at(const DensityOperator& r, cplx alpha) { return wigner_values(r, {alpha})[0]; }

double wigner_origin(const DensityOperator& r) {
    require_single_mode(r.layout(), "wigner");
    double s = 0;
    for (Eigen::Index n = 0; n < r.matrix().rows(); ++n) s += (n % 2 ? -1 : 1) * r.matrix()(n, n).real();
    return M_2_PI * s;
}

double wigner_origin(const FockState& st) {
    require_single_mode(st.layout(), "wigner");
    double s = 0;
    for (Eigen::Index n = 0; n < st.amplitudes().size(); ++n) s += (n % 2 ? -1 : 1) * std::norm(st.amplitudes()[n]);
    return M_2_PI * s;
}

void GridSpec::validate() const {
    if (!(re_max > re_min) || !(im_max > im_min) || !std::isfinite(re_max - re_min) ||
        !std::isfinite(im_max - im_min))
        throw ValidationError("grid ranges must be finite, nonempty intervals");
    if (re_points < 2 || im_points < 2) throw ValidationError("grid needs at least two points per axis");
    if (std::size_t(re_points) * std::size_t(im_points) > 4'000'000)
        throw DimensionGuardError("grid above 4e6 points");
}

QuadratureMoments quadrature_moments(const DensityOperator& r) {
    require_single_mode(r.layout(), "quadrature_moments");
    const Mat& m = r.matrix();
    const Eigen::Index c = m.rows() - 1;
    // <a>, <a^2>, <a^dag a>
    cplx ea = 0, ea2 = 0;
    double n = 0;
    for (Eigen::Index k = 0; k <= c; ++k) {
        n += k * m(k, k).real();
        if (k >= 1) ea += std::sqrt(double(k)) * m(k, k - 1);
        if (k >= 2) ea2 += std::sqrt(double(k) * double(k - 1)) * m(k, k - 2);
    }
    // x = (a + a^dag)/2, p = (a - a^dag)/(2i)
    const double mx = ea.real(), mp = ea.imag();
    const double xx = (2 * ea2.real() + 2 * n + 1) / 4, pp = (-2 * ea2.real() + 2 * n + 1) / 4;
    return {mx, mp, xx - mx * mx, pp - mp * mp};
}

GridSpec auto_grid(const DensityOperator& r, int points, double sigmas) {
    auto q = quadrature_moments(r);
    const double hx = std::max(1e-2, sigmas * std::sqrt(q.var_re)), hp = std::max(1e-2, sigmas * std::sqrt(q.var_im));
    GridSpec g{q.mean_re - hx, q.mean_re + hx, q.mean_im - hp, q.mean_im + hp, points, points};
    g.validate();
    return g;
}

double window_tail_estimate(const DensityOperator& r, const GridSpec& g) {
    auto q = quadrature_moments(r);
    auto side = [](double lo, double hi, double mean, double var) {
        const double s = std::sqrt(2 * std::max(var, 1e-300));
        return 0.5 * std::erfc((hi - mean) / s) + 0.5 * std::erfc((mean - lo) / s);
    };
    return std::min(1.0, side(g.re_min, g.re_max, q.mean_re, q.var_re) + side(g.im_min, g.im_max, q.mean_im, q.var_im));
}

PhaseSpaceGrid wigner_grid(const DensityOperator& r, const GridSpec& spec, double eps_grid, double deficit) {
    spec.validate();
    if (!(eps_grid > 0 && eps_grid <= 1)) throw ValidationError("epsilon_grid must lie in (0, 1]");
    PhaseSpaceGrid g;
    g.spec = spec;
    g.epsilon_grid = eps_grid;
    g.fock_deficit = deficit;
    g.tail_mass = window_tail_estimate(r, spec);
    if (g.tail_mass > eps_grid)
        throw TailMassError("estimated probability outside the window " + format_double(g.tail_mass) +
                            " exceeds epsilon_grid " + format_double(eps_grid));
    std::vector<cplx> pts;
    pts.reserve(std::size_t(spec.re_points) * spec.im_points);
    for (int i = 0; i < spec.re_points; ++i)
        for (int j = 0; j < spec.im_points; ++j) pts.emplace_back(spec.re(i), spec.im(j));
    auto w = wigner_values(r, pts);
    g.W.resize(spec.re_points, spec.im_points);
    for (int i = 0; i < spec.re_points; ++i)
        for (int j = 0; j < spec.im_points; ++j) g.W(i, j) = w[std::size_t(i) * spec.im_points + j];
    return g;
}

NegativityReport negativity_report(const PhaseSpaceGrid& g) {
    Eigen::Index i, j;
    const double mn = g.W.minCoeff(&i, &j);
    const double neg = g.W.unaryExpr([](double v) { return v < 0 ? -v : 0.0; }).sum() * g.spec.cell();
    return {mn, neg, g.spec.re(int(i)), g.spec.im(int(j))};
}

FockState degenerate_opa_state(double g, const FockState& in, double eps) {
    require_single_mode(in.layout(), "degenerate_opa_state");
    AmplifierParams p(g);
    const Vec& a = in.amplitudes();
    const bool low = a.size() <= 2 || a.tail(a.size() - 2).cwiseAbs().maxCoeff() == 0;
    if (!low) {
        OracleResult o = oracle_evolve(Generator::degenerate, g, in);
        return o.state;
    }
    const SparseState s0 = degenerate_terms(p, 0, +1, eps), s1 = degenerate_terms(p, 1, +1, eps);
    int c = 1;
    for (const auto* s : {&s0, &s1})
        for (const Term& t : s->terms) c = std::max(c, t.occ[0]);
    ModeLayout l(1, c, 1);
    Vec out = Vec::Zero(c + 1);
    const cplx c0 = a[0], c1 = a.size() > 1 ? a[1] : cplx(0);
    for (const Term& t : s0.terms) out[t.occ[0]] += c0 * t.amp;
    for (const Term& t : s1.terms) out[t.occ[0]] += c1 * t.amp;
    const double deficit = std::norm(c0) * s0.deficit + std::norm(c1) * s1.deficit;
    return FockState(l, out, deficit);
}

DensityOperator lossy_single_mode(const FockState& s, const LossSpec& spec, double prune) {
    require_single_mode(s.layout(), "lossy_single_mode");
    const ModeLayout& l = s.layout();
    if (l.dimension() > kMaxMixedDimension)
        throw DimensionGuardError("mixed-state dimension " + std::to_string(l.dimension()) + " exceeds guard " +
                                  std::to_string(kMaxMixedDimension));
    const int c = l.cutoff(0);
    const Vec& psi = s.amplitudes();
    Mat rho = Mat::Zero(c + 1, c + 1);
    // Kraus column k: v_k[n-k] = w(n,k) psi_n. Columns are batched so the
    // update over their joint significant span is one matrix product.
    constexpr int kBatch = 32;
    Mat V = Mat::Zero(c + 1, kBatch);
    int filled = 0, lo = c + 1, hi = -1;
    auto flush = [&] {
        if (filled == 0) return;
        const int len = hi - lo + 1;
        auto blk = V.block(lo, 0, len, filled);
        rho.block(lo, lo, len, len).noalias() += blk * blk.adjoint();
        V.leftCols(filled).setZero();
        filled = 0;
        lo = c + 1;
        hi = -1;
    };
    for (int k = 0; k <= c; ++k) {
        int clo = -1, chi = -1;
        for (int n = k; n <= c; ++n) {
            const cplx x = loss_weight(n, k, spec.T) * psi[n];
            if (std::norm(x) < prune) continue;
            V(n - k, filled) = x;
            if (clo < 0) clo = n - k;
            chi = n - k;
        }
        if (clo < 0) continue;
        lo = std::min(lo, clo);
        hi = std::max(hi, chi);
        if (++filled == kBatch) flush();
    }
    flush();
    return DensityOperator(l, std::move(rho));
}

}  // namespace qiopa
