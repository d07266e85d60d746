#pragma once

#include <functional>
#include <vector>

#include "qaoa/chain.hpp"
#include "qaoa/env.hpp"
#include "qaoa/ppo.hpp"

namespace qaoa {

using EnergyFn = std::function<double(const Schedule&)>;

// E_P as a pure function of the schedule; each call runs one full simulation.
EnergyFn energy_objective(const ChainSpec& spec, Backend backend);

struct OptimizeOptions {
    int max_iterations = 500;
    double grad_tol = 1e-8;   // infinity norm
    double fd_step = 1e-5;    // central differences
};

struct OptimizeReport {
    Schedule initial;
    Schedule final_schedule;
    double eps_initial = 0.0;
    double eps_final = 0.0;
    double e_initial = 0.0;
    double e_final = 0.0;
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
};

// BFGS minimization of E_P over the 2P unconstrained angles.
OptimizeReport local_optimize(const ChainSpec& spec, const Schedule& init, Backend backend,
                              const OptimizeOptions& opts = {});

struct BaselineEntry {
    int p = 0;
    Schedule schedule;
    double eps = 0.0;
};

// Iterative smooth-schedule construction: grid search + LO at P = 1, then each
// depth warm-started by linear re-interpolation of the previous optimum.
std::vector<BaselineEntry> iterative_baseline(const ChainSpec& spec, int p_max, Backend backend,
                                              const OptimizeOptions& opts = {});

// RL+LO: refine every evaluated schedule.
std::vector<OptimizeReport> refine(const std::vector<ResultRecord>& records,
                                   const ChainSpec& spec, Backend backend,
                                   const OptimizeOptions& opts = {});

}  // namespace qaoa
