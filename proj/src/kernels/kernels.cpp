#include "bclean/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace bclean::kernels {
namespace {

const Ops& choose() {
    if (const char* env = std::getenv("BCLEAN_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return scalar_ops();
#if defined(BCLEAN_BUILD_AVX2)
        if (std::strcmp(env, "avx2") == 0) return avx2_ops();
#endif
#if defined(BCLEAN_BUILD_NEON)
        if (std::strcmp(env, "neon") == 0) return neon_ops();
#endif
        // Unknown or unsupported request: fall through to auto-detection.
    }
#if defined(BCLEAN_BUILD_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return avx2_ops();
    }
#endif
#if defined(BCLEAN_BUILD_NEON)
    return neon_ops();
#else
    return scalar_ops();
#endif
}

}  // namespace

const Ops& active() {
    static const Ops& ops = choose();
    return ops;
}

std::string_view active_name() { return active().name; }

}  // namespace bclean::kernels
