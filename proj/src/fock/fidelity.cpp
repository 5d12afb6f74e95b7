#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qiopa/fock.hpp"

namespace qiopa {

namespace {

Mat psd_sqrt(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
    // Eigenvalues at rounding level are zeros of a rank-deficient operator;
    // keeping their square roots would inject O(1e-8) noise.
    const double floor = 64 * std::numeric_limits<double>::epsilon() * es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::VectorXd l = es.eigenvalues().unaryExpr([floor](double x) { return x > floor ? std::sqrt(x) : 0.0; });
    return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint();
}

double sqrt_fidelity_block(const Mat& a, const Mat& b) {
    if (a.rows() == 1) return std::sqrt(std::max(0.0, a(0, 0).real()) * std::max(0.0, b(0, 0).real()));
    // ||sqrt(a) sqrt(b)||_1 rather than tr sqrt(sqrt(a) b sqrt(a)): eigenvalue
    // noise near zero enters linearly instead of under a square root.
    Eigen::BDCSVD<Mat> svd(psd_sqrt(a) * psd_sqrt(b));
    return svd.singularValues().sum();
}

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void join(int a, int b) { p[find(a)] = find(b); }
};

void same_layout(const ModeLayout& a, const ModeLayout& b, const char* what) {
    if (a != b) throw LayoutMismatchError(std::string(what) + ": layouts differ");
}

}  // namespace

// Both operators are split along the connected components of their joint
// sparsity pattern; loss channels keep most structure block diagonal, which
// turns one large eigenproblem into many small ones.
double sqrt_fidelity_dense(const Mat& a, const Mat& b) {
    const int n = int(a.rows());
    UnionFind uf(n);
    std::vector<char> live(n, 0);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (a(i, j) != cplx(0) || b(i, j) != cplx(0)) {
                live[i] = live[j] = 1;
                if (i != j) uf.join(i, j);
            }
    std::vector<std::vector<int>> groups(n);
    for (int i = 0; i < n; ++i)
        if (live[i]) groups[uf.find(i)].push_back(i);
    double total = 0;
    for (auto& g : groups) {
        if (g.empty()) continue;
        const int k = int(g.size());
        Mat ab(k, k), bb(k, k);
        for (int j = 0; j < k; ++j)
            for (int i = 0; i < k; ++i) {
                ab(i, j) = a(g[i], g[j]);
                bb(i, j) = b(g[i], g[j]);
            }
        if (ab.trace().real() <= 0 || bb.trace().real() <= 0) continue;
        total += sqrt_fidelity_block(ab, bb);
    }
    return total;
}

double fidelity(const FockState& a, const FockState& b) { return std::norm(overlap(a, b)); }

double fidelity(const DensityOperator& a, const DensityOperator& b) {
    same_layout(a.layout(), b.layout(), "fidelity");
    double s = sqrt_fidelity_dense(a.matrix(), b.matrix());
    return std::clamp(s * s, 0.0, 1.0);
}

double bures_from_fidelity(double F) {
    return std::sqrt(std::max(0.0, 1.0 - std::sqrt(std::clamp(F, 0.0, 1.0))));
}

double bures_distance(const DensityOperator& a, const DensityOperator& b) {
    same_layout(a.layout(), b.layout(), "bures_distance");
    double s = std::min(1.0, sqrt_fidelity_dense(a.matrix(), b.matrix()));
    return std::sqrt(std::max(0.0, 1.0 - s));
}

double bures_distance(const FockState& a, const FockState& b) {
    double s = std::min(1.0, std::abs(overlap(a, b)));
    return std::sqrt(std::max(0.0, 1.0 - s));
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
    same_layout(a.layout(), b.layout(), "trace_distance");
    Mat d = a.matrix() - b.matrix();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// sqrt(F) = || A^dag B ||_1 for rho = A A^dag, sigma = B B^dag. Columns that
// share no row support decouple, so A^dag B is block diagonal after grouping.
static double sqrt_fidelity_ensemble(const Ensemble& a, const Ensemble& b) {
    same_layout(a.layout, b.layout, "fidelity");
    const Eigen::Index ra = a.columns.cols(), rb = b.columns.cols(), n = a.columns.rows();
    if (ra == 0 || rb == 0) return 0.0;
    UnionFind uf{int(n)};
    std::vector<int> first(ra + rb, -1);
    auto link = [&](const Mat& m, Eigen::Index off) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index i = 0; i < n; ++i)
                if (m(i, c) != cplx(0)) {
                    if (first[off + c] < 0) first[off + c] = int(i);
                    else uf.join(int(i), first[off + c]);
                }
    };
    link(a.columns, 0);
    link(b.columns, ra);
    std::vector<std::vector<Eigen::Index>> ca(n), cb(n);
    for (Eigen::Index c = 0; c < ra; ++c)
        if (first[c] >= 0) ca[uf.find(first[c])].push_back(c);
    for (Eigen::Index c = 0; c < rb; ++c)
        if (first[ra + c] >= 0) cb[uf.find(first[ra + c])].push_back(c);
    double total = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
        if (ca[r].empty() || cb[r].empty()) continue;
        Mat g = a.columns(Eigen::all, ca[r]).adjoint() * b.columns(Eigen::all, cb[r]);
        Eigen::BDCSVD<Mat> svd(g);
        total += svd.singularValues().sum();
    }
    return total;
}

double fidelity(const Ensemble& a, const Ensemble& b) {
    double s = sqrt_fidelity_ensemble(a, b);
    return std::clamp(s * s, 0.0, 1.0);
}

double bures_distance(const Ensemble& a, const Ensemble& b) {
    double s = std::min(1.0, sqrt_fidelity_ensemble(a, b));
    return std::sqrt(std::max(0.0, 1.0 - s));
}

// rho - sigma = C J C^dag with C = [A B], J = diag(1, -1). Its nonzero spectrum
// equals that of G^{1/2} J G^{1/2}, G = C^dag C.
double trace_distance(const Ensemble& a, const Ensemble& b) {
    same_layout(a.layout, b.layout, "trace_distance");
    const Eigen::Index ra = a.columns.cols(), rb = b.columns.cols();
    Mat c(a.columns.rows(), ra + rb);
    c << a.columns, b.columns;
    Mat g = c.adjoint() * c;
    Mat s = psd_sqrt(g);
    Eigen::VectorXd j(ra + rb);
    j.head(ra).setOnes();
    j.tail(rb).setConstant(-1.0);
    Mat m = s * j.asDiagonal() * s;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qiopa
