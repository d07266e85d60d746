#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "qaoa/chain.hpp"
#include "qaoa/measurement.hpp"

namespace qaoa {

inline constexpr int kOracleMaxSites = 20;

// Exact 2^N-amplitude state. Basis index c encodes the z-configuration bit by
// bit: bit j = spin j, bit value 0 = up (s^z = +1).
struct StateVector {
    int n_sites = 0;
    std::vector<std::complex<double>> amps;

    double norm2() const;
};

StateVector prepare_plus(int n);

// Diagonal classical energies E_z(c) for all 2^N configurations.
std::vector<double> classical_energy_table(const ChainSpec& spec);

// e^{-i gamma H_z}: phase exp(-i gamma E_z(c)) on each basis amplitude.
void apply_uz(StateVector& state, const ChainSpec& spec, double gamma);
void apply_uz(StateVector& state, const std::vector<double>& energy_table, double gamma);

// e^{-i beta H_x} with H_x = -sum_j s^x_j, applied as N single-site rotations.
void apply_ux(StateVector& state, double beta);

MeasurementRecord measure_bonds(const StateVector& state, const ChainSpec& spec);

std::pair<std::vector<MeasurementRecord>, double> run_schedule(const ChainSpec& spec,
                                                               const Schedule& sched);

}  // namespace qaoa
