#pragma once

#include <complex>
#include <cstddef>

// Data-parallel inner loops of the statevector simulator. Each operation has a
// scalar reference implementation and an AVX2 variant; the active table is
// picked once at startup from CPUID, overridable with QAOA_KERNELS=scalar|avx2.

namespace qaoa::kernels {

using cd = std::complex<double>;

struct Ops {
    // amps[i] *= phasors[i]
    void (*cmul)(cd* amps, const cd* phasors, std::size_t n);
    // (a[i], b[i]) -> (c*a[i] + i*s*b[i], i*s*a[i] + c*b[i])
    void (*pair_rotate)(cd* a, cd* b, std::size_t n, double c, double s);
    // same butterfly on adjacent pairs (a[2i], a[2i+1]); n = number of pairs
    void (*pair_rotate_adjacent)(cd* a, std::size_t n, double c, double s);
    // out[i] = |amps[i]|^2
    void (*abs2)(const cd* amps, double* out, std::size_t n);
    // Re sum_i conj(a[i]) * b[i]
    double (*dot_conj_re)(const cd* a, const cd* b, std::size_t n);
    const char* name;
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // null when unsupported by the build or the CPU
const Ops& active();

}  // namespace qaoa::kernels
