#pragma once

#include <vector>

namespace qaoa {

// Observable record shared by all simulator back-ends: per-bond <s^z_j s^z_{j+1}>
// (bond N wraps), per-site <s^x_j>, the two Hamiltonian terms, and the target
// energy E = <H_z> + h <H_x>.
struct MeasurementRecord {
    std::vector<double> zz_bonds;
    std::vector<double> x_sites;
    double hz = 0.0;
    double hx = 0.0;
    double energy = 0.0;
};

}  // namespace qaoa
