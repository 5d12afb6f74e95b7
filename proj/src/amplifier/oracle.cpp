#include <cmath>
#include <queue>
#include <string>
#include <unordered_map>

#include "qiopa/amplifier.hpp"

namespace qiopa {

namespace {

struct Pair {
    int i, j;
    double coef;
};

std::vector<Pair> generator_pairs(Generator kind, const ModeLayout& l) {
    switch (kind) {
    case Generator::collinear:
        if (l.spatial_modes() != 1 || l.polarizations() != 2)
            throw ValidationError("collinear generator acts on one spatial mode with two polarizations");
        return {{0, 1, 1.0}};
    case Generator::noncollinear:
        if (l.spatial_modes() != 2 || l.polarizations() != 2)
            throw ValidationError("non-collinear generator acts on two spatial modes with two polarizations");
        return {{0, 3, 1.0}, {1, 2, -1.0}};
    case Generator::degenerate:
        if (l.sub_modes() != 1) throw ValidationError("degenerate generator acts on a single sub-mode");
        return {{0, 0, 0.5}};
    case Generator::twin:
        if (l.sub_modes() != 2) throw ValidationError("twin-beam generator acts on two sub-modes");
        return {{0, 1, 1.0}};
    }
    throw ValidationError("unknown generator");
}

// A = sum coef (a_i^dag a_j^dag - a_i a_j), truncated to the layout box, as
// sparse rows over a BFS component.
struct Component {
    std::vector<std::size_t> flat;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;  // (local col, A value)
};

Component build_component(const ModeLayout& l, const std::vector<Pair>& pairs, const Vec& input) {
    Component c;
    std::unordered_map<std::size_t, std::size_t> local;
    std::queue<std::size_t> todo;
    auto visit = [&](std::size_t f) {
        auto [it, fresh] = local.emplace(f, c.flat.size());
        if (fresh) {
            c.flat.push_back(f);
            todo.push(f);
        }
        return it->second;
    };
    for (std::size_t f = 0; f < l.dimension(); ++f)
        if (input[f] != cplx(0)) visit(f);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> edges;  // raw (to flat) per local
    while (!todo.empty()) {
        std::size_t f = todo.front();
        todo.pop();
        std::size_t from = local[f];
        if (c.rows.size() <= from) c.rows.resize(from + 1);
        Occ o = l.occupations(f);
        for (const Pair& p : pairs) {
            // raising: coef sqrt((n_i+1)(n_j+1)) (or sqrt((n+1)(n+2)) for i == j)
            Occ up = o;
            up[p.i] += 1;
            up[p.j] += 1;
            if (l.contains(up)) {
                double amp = p.i == p.j ? std::sqrt((o[p.i] + 1.0) * (o[p.i] + 2.0))
                                        : std::sqrt((o[p.i] + 1.0) * (o[p.j] + 1.0));
                std::size_t to = visit(l.flat_index(up));
                // column `from` of A contributes to row `to`
                if (c.rows.size() <= to) c.rows.resize(to + 1);
                c.rows[to].push_back({from, p.coef * amp});
            }
            Occ dn = o;
            dn[p.i] -= 1;
            dn[p.j] -= 1;
            if (dn[p.i] >= 0 && dn[p.j] >= 0) {
                double amp = p.i == p.j ? std::sqrt(double(o[p.i]) * (o[p.i] - 1.0))
                                        : std::sqrt(double(o[p.i]) * o[p.j]);
                std::size_t to = visit(l.flat_index(dn));
                if (c.rows.size() <= to) c.rows.resize(to + 1);
                c.rows[to].push_back({from, -p.coef * amp});
            }
        }
    }
    c.rows.resize(c.flat.size());
    return c;
}

Eigen::VectorXcd generator_times(const Component& c, const Eigen::VectorXcd& x) {
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
    for (std::size_t r = 0; r < c.rows.size(); ++r)
        for (auto [col, v] : c.rows[r]) y[r] += v * x[col];
    return y;
}

double one_norm(const Component& c) {
    std::vector<double> colsum(c.flat.size(), 0.0);
    for (const auto& row : c.rows)
        for (auto [col, v] : row) colsum[col] += std::abs(v);
    double m = 0;
    for (double s : colsum) m = std::max(m, s);
    return m;
}

Eigen::VectorXcd taylor_expm(const Component& c, double tau, Eigen::VectorXcd x) {
    double nrm = one_norm(c) * tau;
    int steps = std::max(1, int(std::ceil(nrm / 2)));
    double h = tau / steps;
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXcd term = x, acc = x;
        for (int k = 1; k < 200; ++k) {
            term = generator_times(c, term) * (h / k);
            acc += term;
            if (term.norm() < 1e-17 * acc.norm()) break;
        }
        x = std::move(acc);
    }
    return x;
}

Eigen::VectorXcd eigen_expm(const Component& c, double tau, const Eigen::VectorXcd& x) {
    const Eigen::Index n = Eigen::Index(c.flat.size());
    Mat H = Mat::Zero(n, n);  // H = i A is Hermitian
    for (std::size_t r = 0; r < c.rows.size(); ++r)
        for (auto [col, v] : c.rows[r]) H(r, col) += cplx(0, v);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (H + H.adjoint()));
    Eigen::VectorXcd ph(n);
    for (Eigen::Index k = 0; k < n; ++k) ph[k] = std::polar(1.0, -tau * es.eigenvalues()[k]);
    return es.eigenvectors() * ph.asDiagonal() * (es.eigenvectors().adjoint() * x);
}

cplx cross_overlap(const FockState& a, const FockState& b) {
    if (a.layout() == b.layout()) return overlap(a, b);
    if (a.layout().spatial_modes() != b.layout().spatial_modes() ||
        a.layout().polarizations() != b.layout().polarizations())
        throw LayoutMismatchError("states live on different mode structures");
    cplx s = 0;
    for (std::size_t i = 0; i < a.layout().dimension(); ++i) {
        if (a.amplitudes()[i] == cplx(0)) continue;
        Occ o = a.layout().occupations(i);
        if (b.layout().contains(o)) s += std::conj(a.amplitudes()[i]) * b.amplitude(o);
    }
    return s;
}

}  // namespace

const char* to_string(Generator g) {
    switch (g) {
    case Generator::collinear: return "collinear";
    case Generator::noncollinear: return "noncollinear";
    case Generator::degenerate: return "degenerate";
    case Generator::twin: return "twin";
    }
    return "?";
}

OracleResult oracle_evolve(Generator kind, double tau, const FockState& input, const OracleOptions& opt) {
    if (!std::isfinite(tau) || tau < 0) throw ValidationError("evolution time must be finite and >= 0");
    const ModeLayout& l = input.layout();
    auto pairs = generator_pairs(kind, l);
    Component c = build_component(l, pairs, input.amplitudes());
    Eigen::VectorXcd x(c.flat.size());
    for (std::size_t k = 0; k < c.flat.size(); ++k) x[k] = input.amplitudes()[c.flat[k]];

    bool dense = opt.force_dense ? *opt.force_dense : c.flat.size() <= opt.dense_limit;
    if (dense && c.flat.size() > 4000)
        throw DimensionGuardError("component too large for the eigendecomposition route");
    Eigen::VectorXcd y = tau == 0 ? x : (dense ? eigen_expm(c, tau, x) : taylor_expm(c, tau, x));

    Vec out = Vec::Zero(l.dimension());
    double shell = 0, band = 0;
    for (std::size_t k = 0; k < c.flat.size(); ++k) {
        out[c.flat[k]] = y[k];
        Occ o = l.occupations(c.flat[k]);
        bool on_shell = false, in_band = false;
        for (int s = 0; s < l.sub_modes(); ++s) {
            int cut = l.sub_cutoff(s);
            on_shell |= o[s] == cut;
            in_band |= o[s] >= int(std::ceil(0.9 * cut));
        }
        double w = std::norm(y[k]);
        if (on_shell) shell += w;
        if (in_band) band += w;
    }
    if (shell > opt.leakage_budget)
        throw TruncationError("oracle cutoff too small: probability " + std::to_string(shell) +
                              " on the cutoff shell exceeds budget " + std::to_string(opt.leakage_budget));
    return {FockState(l, std::move(out)), shell, band, dense ? "eigen" : "taylor", c.flat.size()};
}

nlohmann::json oracle_report(const OracleResult& r, const FockState& closed_form, const std::string& label) {
    double ov = std::abs(cross_overlap(closed_form, r.state));
    return {{"label", label},
            {"route", r.route},
            {"component_dim", r.component_dim},
            {"cutoff", r.state.layout().cutoff(0)},
            {"shell_leakage", r.shell_leakage},
            {"band_mass", r.band_mass},
            {"closed_form_deficit", closed_form.truncation_deficit()},
            {"overlap", ov}};
}

}  // namespace qiopa
