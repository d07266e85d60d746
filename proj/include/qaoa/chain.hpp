#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qaoa {

// Problem instance: periodic chain of N Ising bonds J_j >= 0, bond j couples
// sites j and j+1 (site N wraps to site 1). h_target is kept for bookkeeping;
// all in-scope metrics assume h_target = 0.
struct ChainSpec {
    int n_sites = 0;
    double h_target = 0.0;
    std::optional<std::uint64_t> seed;  // set only for disordered instances
    std::vector<double> couplings;

    double coupling_sum() const;
    bool is_uniform() const;
};

// The 2P variational angles of a depth-P circuit.
struct Schedule {
    std::vector<double> gammas;
    std::vector<double> betas;

    int depth() const { return static_cast<int>(gammas.size()); }
};

struct EnergyExtremes {
    double e_min = 0.0;
    double e_max = 0.0;
};

void validate_spec(const ChainSpec& spec);
void validate_schedule(const Schedule& sched);

ChainSpec make_uniform(int n, double j, double h);
ChainSpec make_disordered(int n, double h, std::uint64_t seed);

// Exact classical extremes of the h=0 target Hamiltonian on an even ring.
EnergyExtremes classical_extremes(const ChainSpec& spec);

// (E_P - E_min) / (E_max - E_min), in [0, 1].
double residual_energy_density(double e_p, const EnergyExtremes& ext);

// Lower bound on the residual energy density: 1/(2p+2) while 2p < n, else 0.
double qaoa_bound(int p, int n);

// Interpolation parameters s_t = gamma_t / (gamma_t + beta_t).
std::vector<double> schedule_to_s(const Schedule& sched);

void save_instance(const ChainSpec& spec, const std::string& path);
ChainSpec load_instance(const std::string& path);

void save_schedule(const Schedule& sched, const std::string& path);
Schedule load_schedule(const std::string& path);

}  // namespace qaoa
