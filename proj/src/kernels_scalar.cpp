#include "qaoa/kernels.hpp"

namespace qaoa::kernels {

namespace {

void cmul_scalar(cd* amps, const cd* phasors, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) amps[i] *= phasors[i];
}

void pair_rotate_scalar(cd* a, cd* b, std::size_t n, double c, double s) {
    const cd is(0.0, s);
    for (std::size_t i = 0; i < n; ++i) {
        const cd a0 = a[i];
        const cd b0 = b[i];
        a[i] = c * a0 + is * b0;
        b[i] = is * a0 + c * b0;
    }
}

void pair_rotate_adjacent_scalar(cd* a, std::size_t n, double c, double s) {
    const cd is(0.0, s);
    for (std::size_t i = 0; i < n; ++i) {
        const cd a0 = a[2 * i];
        const cd b0 = a[2 * i + 1];
        a[2 * i] = c * a0 + is * b0;
        a[2 * i + 1] = is * a0 + c * b0;
    }
}

void abs2_scalar(const cd* amps, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] = amps[i].real() * amps[i].real() + amps[i].imag() * amps[i].imag();
}

double dot_conj_re_scalar(const cd* a, const cd* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return acc;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{cmul_scalar,
                         pair_rotate_scalar,
                         pair_rotate_adjacent_scalar,
                         abs2_scalar,
                         dot_conj_re_scalar,
                         "scalar"};
    return ops;
}

}  // namespace qaoa::kernels
