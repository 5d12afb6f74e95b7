#include <cstdlib>
#include <cstring>

#include "qiopa/kernels.hpp"

namespace qiopa::simd {

#if defined(QIOPA_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(QIOPA_HAVE_AVX2)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& kernels() {
    static const KernelTable& chosen = [] () -> const KernelTable& {
        const char* env = std::getenv("QIOPA_KERNELS");
        if (env && std::strcmp(env, "scalar") == 0) return scalar_kernels();
        if (const KernelTable* t = avx2_kernels()) return *t;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace qiopa::simd
