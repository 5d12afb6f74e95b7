#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "qiopa/channels.hpp"

namespace qiopa {

namespace {

constexpr std::size_t kMaxColumnEntries = std::size_t(1) << 27;

std::uint64_t pack(const Occ& o) {
    std::uint64_t k = 0;
    for (int v : o) k = (k << 16) | std::uint64_t(std::uint16_t(v));
    return k;
}

using Column = std::vector<std::pair<std::uint64_t, cplx>>;

std::vector<Column> lossy_columns(const SparseState& s, const std::array<double, 4>& T) {
    const int subs = s.spatial_modes * s.polarizations;
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<std::unordered_map<std::uint64_t, cplx>> cols;
    std::size_t entries = 0;
    for (const Term& t : s.terms) {
        Occ k{0, 0, 0, 0};
        // odometer over lost-photon patterns 0 <= k_i <= occ_i
        while (true) {
            double w = 1;
            Occ kept{0, 0, 0, 0};
            for (int i = 0; i < subs; ++i) {
                w *= loss_weight(t.occ[i], k[i], T[i]);
                kept[i] = t.occ[i] - k[i];
            }
            if (w != 0) {
                auto [it, fresh] = index.try_emplace(pack(k), cols.size());
                if (fresh) cols.emplace_back();
                cols[it->second][pack(kept)] += w * t.amp;
                if (++entries > kMaxColumnEntries)
                    throw DimensionGuardError("lossy Kraus expansion exceeds guard");
            }
            int i = 0;
            for (; i < subs; ++i) {
                if (k[i] < t.occ[i]) {
                    ++k[i];
                    break;
                }
                k[i] = 0;
            }
            if (i == subs) break;
        }
    }
    std::vector<Column> out;
    out.reserve(cols.size());
    for (auto& c : cols) out.emplace_back(c.begin(), c.end());
    return out;
}

struct UnionFind {
    std::vector<int> p;
    int add() {
        p.push_back(int(p.size()));
        return p.back();
    }
    int find(int x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void join(int a, int b) { p[find(a)] = find(b); }
};

void check_T(const SparseState& s, const std::array<double, 4>& T) {
    for (int i = 0; i < s.spatial_modes * s.polarizations; ++i)
        if (!(T[i] >= 0 && T[i] <= 1)) throw ValidationError("transmittivity must lie in [0, 1]");
}

}  // namespace

double lossy_fidelity(const SparseState& a, const SparseState& b, const std::array<double, 4>& T) {
    if (a.spatial_modes != b.spatial_modes || a.polarizations != b.polarizations)
        throw LayoutMismatchError("lossy_fidelity: mode structures differ");
    check_T(a, T);
    auto ca = lossy_columns(a, T), cb = lossy_columns(b, T);

    std::unordered_map<std::uint64_t, int> row;
    UnionFind uf;
    auto link = [&](const std::vector<Column>& cs) {
        for (const Column& c : cs) {
            int first = -1;
            for (const auto& [key, v] : c) {
                auto [it, fresh] = row.try_emplace(key, 0);
                if (fresh) it->second = uf.add();
                if (first < 0) first = it->second;
                else uf.join(first, it->second);
            }
        }
    };
    link(ca);
    link(cb);

    // per component: local row numbering and member columns of each side
    std::vector<int> local(uf.p.size(), -1), rows_in(uf.p.size(), 0);
    for (auto& [key, r] : row) local[r] = rows_in[uf.find(r)]++;
    std::vector<std::vector<int>> ga(uf.p.size()), gb(uf.p.size());
    for (std::size_t c = 0; c < ca.size(); ++c)
        if (!ca[c].empty()) ga[uf.find(row[ca[c][0].first])].push_back(int(c));
    for (std::size_t c = 0; c < cb.size(); ++c)
        if (!cb[c].empty()) gb[uf.find(row[cb[c][0].first])].push_back(int(c));

    auto fill = [&](const std::vector<Column>& cs, const std::vector<int>& members, int nrows) {
        Mat m = Mat::Zero(nrows, Eigen::Index(members.size()));
        for (std::size_t j = 0; j < members.size(); ++j)
            for (const auto& [key, v] : cs[members[j]]) m(local[row[key]], Eigen::Index(j)) = v;
        return m;
    };
    double s = 0;
    for (std::size_t r = 0; r < uf.p.size(); ++r) {
        if (ga[r].empty() || gb[r].empty()) continue;
        Mat A = fill(ca, ga[r], rows_in[r]), B = fill(cb, gb[r], rows_in[r]);
        Eigen::BDCSVD<Mat> svd(A.adjoint() * B);
        s += svd.singularValues().sum();
    }
    return std::clamp(s * s, 0.0, 1.0);
}

}  // namespace qiopa
