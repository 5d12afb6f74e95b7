#include <cmath>

#include "qiopa/fock.hpp"

namespace qiopa {

using nlohmann::json;

json to_json(const ModeLayout& l) {
    json c = json::array();
    for (int m = 0; m < l.spatial_modes(); ++m) c.push_back(l.cutoff(m));
    return {{"spatial_modes", l.spatial_modes()}, {"polarizations", l.polarizations()}, {"cutoffs", c}};
}

ModeLayout layout_from_json(const json& j) {
    try {
        int sm = j.at("spatial_modes").get<int>();
        int pol = j.at("polarizations").get<int>();
        const json& c = j.at("cutoffs");
        if (!c.is_array() || int(c.size()) != sm) throw ValidationError("layout json: cutoffs length mismatch");
        std::array<int, 2> cut{c[0].get<int>(), sm == 2 ? c[1].get<int>() : c[0].get<int>()};
        return ModeLayout(pol, cut, sm);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("layout json: ") + e.what());
    }
}

json to_json(const FockState& s) {
    json amps = json::array();
    const Vec& v = s.amplitudes();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > 1e-14) amps.push_back({i, v[i].real(), v[i].imag()});
    return {{"kind", "fock_state"},
            {"version", library_version()},
            {"layout", to_json(s.layout())},
            {"truncation_deficit", s.truncation_deficit()},
            {"amplitudes", amps}};
}

FockState fock_from_json(const json& j) {
    try {
        ModeLayout l = layout_from_json(j.at("layout"));
        Vec v = Vec::Zero(l.dimension());
        for (const json& e : j.at("amplitudes")) {
            auto i = e.at(0).get<long long>();
            if (i < 0 || std::size_t(i) >= l.dimension()) throw ValidationError("state json: index out of range");
            v[i] = cplx(e.at(1).get<double>(), e.at(2).get<double>());
        }
        double d = j.contains("truncation_deficit") ? j["truncation_deficit"].get<double>() : 0.0;
        return FockState(l, std::move(v), d);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("state json: ") + e.what());
    }
}

json to_json(const DensityOperator& r) {
    json el = json::array();
    const Mat& m = r.matrix();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (std::abs(m(i, j)) > 1e-14) el.push_back({i, j, m(i, j).real(), m(i, j).imag()});
    return {{"kind", "density_operator"},
            {"version", library_version()},
            {"layout", to_json(r.layout())},
            {"elements", el}};
}

DensityOperator density_from_json(const json& j) {
    try {
        ModeLayout l = layout_from_json(j.at("layout"));
        if (l.dimension() > kMaxMixedDimension) throw DimensionGuardError("density json: dimension over guard");
        Mat m = Mat::Zero(l.dimension(), l.dimension());
        for (const json& e : j.at("elements")) {
            auto a = e.at(0).get<long long>(), b = e.at(1).get<long long>();
            if (a < 0 || b < 0 || std::size_t(a) >= l.dimension() || std::size_t(b) >= l.dimension())
                throw ValidationError("density json: index out of range");
            m(a, b) = cplx(e.at(2).get<double>(), e.at(3).get<double>());
        }
        return DensityOperator(l, std::move(m));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("density json: ") + e.what());
    }
}

}  // namespace qiopa
