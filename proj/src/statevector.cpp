#include "qaoa/statevector.hpp"

#include <cmath>
#include <stdexcept>

#include "qaoa/kernels.hpp"

namespace qaoa {

namespace {

using cd = std::complex<double>;

void check_oracle_size(int n) {
    if (n < 1 || n > kOracleMaxSites)
        throw std::invalid_argument("statevector: N must be in [1, " +
                                    std::to_string(kOracleMaxSites) + "]");
}

}  // namespace

double StateVector::norm2() const {
    double acc = 0.0;
    for (const cd& a : amps) acc += std::norm(a);
    return acc;
}

StateVector prepare_plus(int n) {
    check_oracle_size(n);
    StateVector state;
    state.n_sites = n;
    const std::size_t dim = std::size_t{1} << n;
    state.amps.assign(dim, cd(std::pow(2.0, -0.5 * n), 0.0));
    return state;
}

std::vector<double> classical_energy_table(const ChainSpec& spec) {
    validate_spec(spec);
    check_oracle_size(spec.n_sites);
    const int n = spec.n_sites;
    const std::size_t dim = std::size_t{1} << n;
    std::vector<double> table(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        double e = 0.0;
        for (int j = 0; j < n; ++j) {
            const int jn = (j + 1) % n;
            const bool violated = ((c >> j) ^ (c >> jn)) & 1U;
            e += violated ? spec.couplings[j] : -spec.couplings[j];
        }
        table[c] = e;
    }
    return table;
}

void apply_uz(StateVector& state, const std::vector<double>& energy_table, double gamma) {
    if (energy_table.size() != state.amps.size())
        throw std::invalid_argument("apply_uz: dimension mismatch");
    thread_local std::vector<cd> phasors;
    phasors.resize(state.amps.size());
    for (std::size_t c = 0; c < phasors.size(); ++c)
        phasors[c] = std::polar(1.0, -gamma * energy_table[c]);
    kernels::active().cmul(state.amps.data(), phasors.data(), state.amps.size());
}

void apply_uz(StateVector& state, const ChainSpec& spec, double gamma) {
    if (spec.n_sites != state.n_sites)
        throw std::invalid_argument("apply_uz: dimension mismatch");
    apply_uz(state, classical_energy_table(spec), gamma);
}

void apply_ux(StateVector& state, double beta) {
    const auto& ops = kernels::active();
    const double c = std::cos(beta);
    const double s = std::sin(beta);
    const std::size_t dim = state.amps.size();
    for (int j = 0; j < state.n_sites; ++j) {
        const std::size_t stride = std::size_t{1} << j;
        if (stride == 1) {
            ops.pair_rotate_adjacent(state.amps.data(), dim / 2, c, s);
            continue;
        }
        for (std::size_t base = 0; base < dim; base += 2 * stride)
            ops.pair_rotate(state.amps.data() + base, state.amps.data() + base + stride,
                            stride, c, s);
    }
}

MeasurementRecord measure_bonds(const StateVector& state, const ChainSpec& spec) {
    validate_spec(spec);
    if (spec.n_sites != state.n_sites ||
        state.amps.size() != (std::size_t{1} << spec.n_sites))
        throw std::invalid_argument("measure_bonds: dimension mismatch");
    const auto& ops = kernels::active();
    const int n = spec.n_sites;
    const std::size_t dim = state.amps.size();

    thread_local std::vector<double> probs;
    probs.resize(dim);
    ops.abs2(state.amps.data(), probs.data(), dim);

    MeasurementRecord rec;
    rec.zz_bonds.resize(n);
    rec.x_sites.resize(n);
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        double zz = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const bool violated = ((c >> j) ^ (c >> jn)) & 1U;
            zz += violated ? -probs[c] : probs[c];
        }
        rec.zz_bonds[j] = zz;
    }
    for (int j = 0; j < n; ++j) {
        const std::size_t stride = std::size_t{1} << j;
        double x = 0.0;
        if (stride == 1) {
            for (std::size_t c = 0; c < dim; c += 2) {
                const cd& a0 = state.amps[c];
                const cd& a1 = state.amps[c + 1];
                x += a0.real() * a1.real() + a0.imag() * a1.imag();
            }
        } else {
            for (std::size_t base = 0; base < dim; base += 2 * stride)
                x += ops.dot_conj_re(state.amps.data() + base,
                                     state.amps.data() + base + stride, stride);
        }
        rec.x_sites[j] = 2.0 * x;
    }
    for (int j = 0; j < n; ++j) {
        rec.hz -= spec.couplings[j] * rec.zz_bonds[j];
        rec.hx -= rec.x_sites[j];
    }
    rec.energy = rec.hz + spec.h_target * rec.hx;
    return rec;
}

std::pair<std::vector<MeasurementRecord>, double> run_schedule(const ChainSpec& spec,
                                                               const Schedule& sched) {
    validate_schedule(sched);
    const auto energies = classical_energy_table(spec);
    StateVector state = prepare_plus(spec.n_sites);
    std::vector<MeasurementRecord> trace;
    trace.reserve(sched.gammas.size());
    for (int t = 0; t < sched.depth(); ++t) {
        apply_uz(state, energies, sched.gammas[t]);
        apply_ux(state, sched.betas[t]);
        trace.push_back(measure_bonds(state, spec));
    }
    const double e_p = trace.empty() ? 0.0 : trace.back().energy;
    return {std::move(trace), e_p};
}

}  // namespace qaoa
