#include "qaoa/schedule_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>

#include "qaoa/fermion.hpp"
#include "qaoa/statevector.hpp"

namespace qaoa {

EnergyFn energy_objective(const ChainSpec& spec, Backend backend) {
    validate_spec(spec);
    if (backend == Backend::oracle) {
        if (spec.n_sites > kOracleMaxSites)
            throw std::invalid_argument("energy_objective: oracle backend limited to N <= " +
                                        std::to_string(kOracleMaxSites));
        auto table = std::make_shared<const std::vector<double>>(classical_energy_table(spec));
        return [spec, table](const Schedule& sched) {
            validate_schedule(sched);
            StateVector state = prepare_plus(spec.n_sites);
            for (int t = 0; t < sched.depth(); ++t) {
                apply_uz(state, *table, sched.gammas[t]);
                apply_ux(state, sched.betas[t]);
            }
            return measure_bonds(state, spec).energy;
        };
    }
    if (spec.is_uniform() && spec.couplings.front() > 0.0) {
        auto plan = std::make_shared<const UniformKPlan>(spec);
        return [plan](const Schedule& sched) {
            validate_schedule(sched);
            UniformKState state = plan->init();
            for (int t = 0; t < sched.depth(); ++t)
                plan->apply_layer(state, sched.gammas[t], sched.betas[t]);
            return plan->measure(state).energy;
        };
    }
    auto plan = std::make_shared<const FermionPlan>(spec);
    return [spec, plan](const Schedule& sched) {
        validate_schedule(sched);
        GaussianState state = init_vacuum(spec.n_sites);
        for (int t = 0; t < sched.depth(); ++t)
            plan->apply_layer(state, sched.gammas[t], sched.betas[t]);
        return measure(state, spec).energy;
    };
}

namespace {

Eigen::VectorXd pack(const Schedule& sched) {
    const int p = sched.depth();
    Eigen::VectorXd x(2 * p);
    for (int t = 0; t < p; ++t) {
        x(t) = sched.gammas[t];
        x(p + t) = sched.betas[t];
    }
    return x;
}

Schedule unpack(const Eigen::VectorXd& x) {
    const int p = static_cast<int>(x.size()) / 2;
    Schedule sched;
    sched.gammas.assign(x.data(), x.data() + p);
    sched.betas.assign(x.data() + p, x.data() + 2 * p);
    return sched;
}

Eigen::VectorXd fd_gradient(const EnergyFn& f, const Eigen::VectorXd& x, double step) {
    Eigen::VectorXd grad(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + step;
        const double fp = f(unpack(probe));
        probe(i) = x(i) - step;
        const double fm = f(unpack(probe));
        probe(i) = x(i);
        grad(i) = (fp - fm) / (2.0 * step);
    }
    return grad;
}

}  // namespace

OptimizeReport local_optimize(const ChainSpec& spec, const Schedule& init, Backend backend,
                              const OptimizeOptions& opts) {
    validate_schedule(init);
    const EnergyFn f = energy_objective(spec, backend);
    const EnergyExtremes ext = classical_extremes(spec);
    const Eigen::Index dim = 2 * init.depth();

    Eigen::VectorXd x = pack(init);
    double fx = f(init);
    Eigen::VectorXd grad = fd_gradient(f, x, opts.fd_step);
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);

    OptimizeReport report;
    report.initial = init;
    report.e_initial = fx;
    report.eps_initial = residual_energy_density(fx, ext);

    bool line_search_ok = true;
    int iter = 0;
    for (; iter < opts.max_iterations; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) break;

        Eigen::VectorXd direction = -(h_inv * grad);
        if (direction.dot(grad) >= 0.0) {  // lost positive definiteness
            h_inv.setIdentity();
            direction = -grad;
        }

        // backtracking Armijo line search; before any curvature information is
        // in, cap the trial step so the iterate stays in the local basin
        // instead of jumping to a distant symmetry copy of the optimum
        const double slope = grad.dot(direction);
        const double max_step = 0.1;
        double alpha = 1.0;
        const double dnorm = direction.norm();
        if (dnorm > max_step) alpha = max_step / dnorm;
        double f_new = fx;
        Eigen::VectorXd x_new = x;
        bool accepted = false;
        while (alpha > 1e-14) {
            x_new = x + alpha * direction;
            f_new = f(unpack(x_new));
            if (f_new <= fx + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            line_search_ok = false;
            break;
        }

        const Eigen::VectorXd grad_new = fd_gradient(f, x_new, opts.fd_step);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
            const Eigen::MatrixXd left = identity - rho * s * y.transpose();
            h_inv = left * h_inv * left.transpose() + rho * s * s.transpose();
        }
        x = x_new;
        fx = f_new;
        grad = grad_new;
    }

    report.final_schedule = unpack(x);
    report.e_final = fx;
    report.eps_final = residual_energy_density(fx, ext);
    report.iterations = iter;
    report.grad_norm = grad.lpNorm<Eigen::Infinity>();
    report.converged = line_search_ok && report.grad_norm <= opts.grad_tol;
    return report;
}

namespace {

// piecewise-linear resampling of the previous optimum onto p_new points,
// sample positions (t + 1/2) / p
std::vector<double> reinterpolate(const std::vector<double>& old_vals, int p_new) {
    const int p_old = static_cast<int>(old_vals.size());
    std::vector<double> out(p_new);
    for (int t = 0; t < p_new; ++t) {
        const double u = (t + 0.5) / p_new;
        const double pos = u * p_old - 0.5;
        if (pos <= 0.0) {
            out[t] = old_vals.front();
        } else if (pos >= p_old - 1) {
            out[t] = old_vals.back();
        } else {
            const int lo = static_cast<int>(std::floor(pos));
            const double frac = pos - lo;
            out[t] = (1.0 - frac) * old_vals[lo] + frac * old_vals[lo + 1];
        }
    }
    return out;
}

}  // namespace

std::vector<BaselineEntry> iterative_baseline(const ChainSpec& spec, int p_max, Backend backend,
                                              const OptimizeOptions& opts) {
    if (p_max < 1) throw std::invalid_argument("iterative_baseline: p_max must be >= 1");
    const EnergyFn f = energy_objective(spec, backend);

    // P = 1: dense grid over [0, pi/2]^2, then LO. The landscape can hold
    // several degenerate minima; refine the leading grid candidates and keep
    // the small-angle representative, which is the annealing-like one and the
    // only warm start that keeps later depths inside the action box.
    constexpr int kGrid = 64;
    std::vector<std::pair<double, Schedule>> probes;
    probes.reserve(kGrid * kGrid);
    for (int ig = 0; ig < kGrid; ++ig) {
        for (int ib = 0; ib < kGrid; ++ib) {
            const Schedule probe{{kActionHigh * ig / (kGrid - 1.0)},
                                 {kActionHigh * ib / (kGrid - 1.0)}};
            probes.emplace_back(f(probe), probe);
        }
    }
    std::sort(probes.begin(), probes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    Schedule best;
    double best_e = std::numeric_limits<double>::infinity();
    double best_angles = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < probes.size() && c < 8; ++c) {
        const OptimizeReport rep = local_optimize(spec, probes[c].second, backend, opts);
        const double angles = rep.final_schedule.gammas[0] + rep.final_schedule.betas[0];
        if (rep.e_final < best_e - 1e-9 ||
            (rep.e_final < best_e + 1e-9 && angles < best_angles)) {
            best_e = rep.e_final;
            best_angles = angles;
            best = rep.final_schedule;
        }
    }

    std::vector<BaselineEntry> entries;
    Schedule current = best;
    for (int p = 1; p <= p_max; ++p) {
        if (p > 1) {
            current.gammas = reinterpolate(entries.back().schedule.gammas, p);
            current.betas = reinterpolate(entries.back().schedule.betas, p);
        }
        const OptimizeReport report = local_optimize(spec, current, backend, opts);
        entries.push_back({p, report.final_schedule, report.eps_final});
    }
    return entries;
}

std::vector<OptimizeReport> refine(const std::vector<ResultRecord>& records,
                                   const ChainSpec& spec, Backend backend,
                                   const OptimizeOptions& opts) {
    std::vector<OptimizeReport> reports;
    reports.reserve(records.size());
    for (const ResultRecord& rec : records)
        reports.push_back(local_optimize(spec, rec.schedule, backend, opts));
    return reports;
}

}  // namespace qaoa
