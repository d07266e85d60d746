#include "qaoa/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace qaoa::kernels {

namespace {

const Ops& select() {
    const char* forced = std::getenv("QAOA_KERNELS");
    if (forced != nullptr) {
        if (std::strcmp(forced, "scalar") == 0) return scalar_ops();
        if (std::strcmp(forced, "avx2") == 0 && avx2_ops() != nullptr) return *avx2_ops();
    }
    if (const Ops* simd = avx2_ops()) return *simd;
    return scalar_ops();
}

}  // namespace

const Ops& active() {
    static const Ops& ops = select();
    return ops;
}

}  // namespace qaoa::kernels
