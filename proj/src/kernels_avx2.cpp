#include "qaoa/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define QAOA_BUILD_AVX2 1
#include <immintrin.h>
#else
#define QAOA_BUILD_AVX2 0
#endif

namespace qaoa::kernels {

#if QAOA_BUILD_AVX2

namespace {

// One ymm register holds two interleaved complex doubles [re0, im0, re1, im1].

inline __m256d cmul4(__m256d a, __m256d b) {
    const __m256d b_re = _mm256_movedup_pd(b);
    const __m256d b_im = _mm256_permute_pd(b, 0xF);
    const __m256d a_sw = _mm256_permute_pd(a, 0x5);
    return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

void cmul_avx2(cd* amps, const cd* phasors, std::size_t n) {
    auto* pa = reinterpret_cast<double*>(amps);
    const auto* pp = reinterpret_cast<const double*>(phasors);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d a = _mm256_loadu_pd(pa + 2 * i);
        const __m256d p = _mm256_loadu_pd(pp + 2 * i);
        _mm256_storeu_pd(pa + 2 * i, cmul4(a, p));
    }
    for (; i < n; ++i) amps[i] *= phasors[i];
}

// i*s*z on interleaved lanes: (re, im) -> (-s*im, s*re)
inline __m256d mul_is(__m256d z, __m256d s_signed) {
    return _mm256_mul_pd(_mm256_permute_pd(z, 0x5), s_signed);
}

void pair_rotate_avx2(cd* a, cd* b, std::size_t n, double c, double s) {
    auto* pa = reinterpret_cast<double*>(a);
    auto* pb = reinterpret_cast<double*>(b);
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vs = _mm256_setr_pd(-s, s, -s, s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(pa + 2 * i);
        const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
        _mm256_storeu_pd(pa + 2 * i, _mm256_fmadd_pd(va, vc, mul_is(vb, vs)));
        _mm256_storeu_pd(pb + 2 * i, _mm256_fmadd_pd(vb, vc, mul_is(va, vs)));
    }
    const cd is(0.0, s);
    for (; i < n; ++i) {
        const cd a0 = a[i];
        const cd b0 = b[i];
        a[i] = c * a0 + is * b0;
        b[i] = is * a0 + c * b0;
    }
}

void pair_rotate_adjacent_avx2(cd* a, std::size_t n, double c, double s) {
    auto* pa = reinterpret_cast<double*>(a);
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vs = _mm256_setr_pd(-s, s, -s, s);
    std::size_t i = 0;
    for (; i + 1 <= n; i += 1) {
        // one pair (a0, a1) per ymm: [re0, im0, re1, im1]
        const __m256d z = _mm256_loadu_pd(pa + 4 * i);
        const __m256d partner = _mm256_permute2f128_pd(z, z, 0x01);
        _mm256_storeu_pd(pa + 4 * i, _mm256_fmadd_pd(z, vc, mul_is(partner, vs)));
    }
}

void abs2_avx2(const cd* amps, double* out, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(amps);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(pa + 2 * i);
        const __m256d y = _mm256_loadu_pd(pa + 2 * i + 4);
        const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(x, x), _mm256_mul_pd(y, y));
        _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, _MM_SHUFFLE(3, 1, 2, 0)));
    }
    for (; i < n; ++i)
        out[i] = amps[i].real() * amps[i].real() + amps[i].imag() * amps[i].imag();
}

double dot_conj_re_avx2(const cd* a, const cd* b, std::size_t n) {
    const auto* pa = reinterpret_cast<const double*>(a);
    const auto* pb = reinterpret_cast<const double*>(b);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i), acc);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = lanes[0] + lanes[1] + lanes[2] + lanes[3];
    for (; i < n; ++i)
        sum += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return sum;
}

}  // namespace

const Ops* avx2_ops() {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
    static const Ops ops{cmul_avx2,
                         pair_rotate_avx2,
                         pair_rotate_adjacent_avx2,
                         abs2_avx2,
                         dot_conj_re_avx2,
                         "avx2"};
    return &ops;
}

#else

const Ops* avx2_ops() { return nullptr; }

#endif

}  // namespace qaoa::kernels
