#include <string>

#include "qiopa/fock.hpp"

namespace qiopa {

ModeLayout::ModeLayout(int spatial_modes, int cutoff, int polarizations)
    : ModeLayout(polarizations, {cutoff, cutoff}, spatial_modes) {}

ModeLayout::ModeLayout(int polarizations, std::array<int, 2> cutoffs, int spatial_modes)
    : spatial_(spatial_modes), pols_(polarizations), cutoffs_(cutoffs) {
    if (spatial_ < 1 || spatial_ > 2)
        throw ValidationError("layout: spatial_modes must be 1 or 2, got " + std::to_string(spatial_));
    if (pols_ < 1 || pols_ > 2)
        throw ValidationError("layout: polarizations must be 1 or 2, got " + std::to_string(pols_));
    if (spatial_ == 1) cutoffs_[1] = cutoffs_[0];
    for (int m = 0; m < spatial_; ++m)
        if (cutoffs_[m] < 1)
            throw ValidationError("layout: cutoff must be >= 1, got " + std::to_string(cutoffs_[m]));
    finish();
}

void ModeLayout::finish() {
    std::size_t s = 1;
    for (int k = sub_modes() - 1; k >= 0; --k) {
        strides_[k] = s;
        s *= std::size_t(sub_cutoff(k)) + 1;
    }
    dim_ = s;
}

std::size_t ModeLayout::spatial_dimension(int m) const {
    std::size_t d = 1;
    for (int p = 0; p < pols_; ++p) d *= std::size_t(cutoffs_[m]) + 1;
    return d;
}

bool ModeLayout::contains(const Occ& occ) const {
    for (int k = 0; k < 4; ++k) {
        if (occ[k] < 0) return false;
        if (k >= sub_modes()) {
            if (occ[k] != 0) return false;
        } else if (occ[k] > sub_cutoff(k)) {
            return false;
        }
    }
    return true;
}

std::size_t ModeLayout::flat_index(const Occ& occ) const {
    if (!contains(occ))
        throw OutOfRangeError("occupation (" + std::to_string(occ[0]) + "," + std::to_string(occ[1]) +
                              "," + std::to_string(occ[2]) + "," + std::to_string(occ[3]) +
                              ") outside layout");
    std::size_t i = 0;
    for (int k = 0; k < sub_modes(); ++k) i += strides_[k] * std::size_t(occ[k]);
    return i;
}

Occ ModeLayout::occupations(std::size_t flat) const {
    if (flat >= dim_) throw OutOfRangeError("flat index outside layout");
    Occ o{0, 0, 0, 0};
    for (int k = 0; k < sub_modes(); ++k) {
        o[k] = int(flat / strides_[k]);
        flat %= strides_[k];
    }
    return o;
}

ModeLayout ModeLayout::single(int m) const {
    if (m < 0 || m >= spatial_) throw ValidationError("layout: no spatial mode " + std::to_string(m));
    return ModeLayout(1, cutoffs_[m], pols_);
}

bool ModeLayout::operator==(const ModeLayout& o) const {
    if (spatial_ != o.spatial_ || pols_ != o.pols_) return false;
    for (int m = 0; m < spatial_; ++m)
        if (cutoffs_[m] != o.cutoffs_[m]) return false;
    return true;
}

}  // namespace qiopa
