#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qaoa/chain.hpp"
#include "qaoa/measurement.hpp"

namespace qaoa {

// Quadratic fermion Hamiltonian H = sum a_ij c+_i c_j
//   + 1/2 sum (b_ij c+_i c+_j + h.c.) + constant, with a hermitian (real here)
// and b antisymmetric. Obtained from the spin chain by Jordan-Wigner with
// s^x_j = 1 - 2 n_j; the boundary bond carries the antiperiodic sign of the
// even-parity sector.
struct QuadraticHamiltonian {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
    double constant = 0.0;

    int n() const { return static_cast<int>(a.rows()); }
    // 2N x 2N single-particle matrix [[a, b], [-conj(b), -conj(a)]]
    Eigen::MatrixXd bdg_matrix() const;
};

std::pair<QuadraticHamiltonian, QuadraticHamiltonian> build_quadratic(const ChainSpec& spec);

struct BdgEigensystem {
    Eigen::VectorXd eigenvalues;  // 2N, symmetric about 0
    Eigen::MatrixXd eigenvectors; // 2N x 2N orthogonal (the BdG matrix is real), columns are modes
};

BdgEigensystem bdg_eigensystem(const QuadraticHamiltonian& h);

// Bogoliubov frame of a fermionic Gaussian state: c_i = sum_m u_im d_m + conj(v_im) d+_m,
// the state being the vacuum of the d modes. Vacuum of the c fermions: u = I, v = 0.
struct GaussianState {
    Eigen::MatrixXcd u;
    Eigen::MatrixXcd v;

    int n() const { return static_cast<int>(u.rows()); }
    // || u+ u + v+ v - I ||_max
    double isometry_error() const;
};

GaussianState init_vacuum(int n);

// Multiplies the stacked frame [u; v] by exp(-i theta H_bdg).
void evolve(GaussianState& state, const BdgEigensystem& eig, double theta);

// Fast path for H_x (a = 2I, b = 0): diagonal BdG evolution.
void evolve_field(GaussianState& state, double beta);

// g_ij = <c+_i c_j>, f_ij = <c_i c_j>
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> correlators(const GaussianState& state);

MeasurementRecord measure(const GaussianState& state, const ChainSpec& spec);

// Cached per-instance data for repeated schedule evolution.
struct FermionPlan {
    ChainSpec spec;
    BdgEigensystem hz_eig;

    explicit FermionPlan(const ChainSpec& s);
    void apply_layer(GaussianState& state, double gamma, double beta) const;
};

std::pair<std::vector<MeasurementRecord>, double> run_schedule_fermion(const ChainSpec& spec,
                                                                       const Schedule& sched);

// Momentum-space evolution for uniform chains: N/2 independent 2-level modes,
// k = (2m-1) pi / N. O(N) per step.
struct UniformKState {
    std::vector<Eigen::Vector2cd> psi;  // one 2-vector per k > 0
};

struct UniformKPlan {
    ChainSpec spec;
    std::vector<double> k;

    explicit UniformKPlan(const ChainSpec& s);
    UniformKState init() const;
    void apply_layer(UniformKState& state, double gamma, double beta) const;
    MeasurementRecord measure(const UniformKState& state) const;
};

std::pair<std::vector<MeasurementRecord>, double> run_schedule_uniform_k(const ChainSpec& spec,
                                                                         const Schedule& sched);

}  // namespace qaoa
