#include "qaoa/env.hpp"

#include <algorithm>
#include <cmath>

namespace qaoa {

Observation observation_of(const MeasurementRecord& rec, const ChainSpec& spec, bool bare) {
    if (bare) return {rec.hz, rec.hx};
    const double jsum = spec.coupling_sum();
    if (jsum <= 0.0)
        throw std::invalid_argument("observation_of: degenerate instance, sum of couplings is 0");
    return {rec.hz / jsum, rec.hx / spec.n_sites};
}

Environment::Environment(ChainSpec spec, EpisodeConfig cfg)
    : spec_(std::move(spec)), cfg_(cfg) {
    validate_spec(spec_);
    if (cfg_.p_steps < 1) throw std::invalid_argument("env: p_steps must be >= 1");
    if (!cfg_.bare_observation && spec_.coupling_sum() <= 0.0)
        throw std::invalid_argument("env: degenerate instance, sum of couplings is 0");
    if (cfg_.backend == Backend::oracle) {
        if (spec_.n_sites > kOracleMaxSites)
            throw std::invalid_argument("env: oracle backend limited to N <= " +
                                        std::to_string(kOracleMaxSites));
        sv_energy_table_ = classical_energy_table(spec_);
    } else if (spec_.is_uniform() && spec_.couplings.front() > 0.0) {
        kplan_ = std::make_shared<const UniformKPlan>(spec_);
    } else {
        fplan_ = std::make_shared<const FermionPlan>(spec_);
    }
    if (spec_.h_target == 0.0) extremes_ = classical_extremes(spec_);
    reset();
}

MeasurementRecord Environment::measure_now() const {
    if (sv_) return measure_bonds(*sv_, spec_);
    if (kstate_) return kplan_->measure(*kstate_);
    return measure(*gauss_, spec_);
}

Observation Environment::reset() {
    t_ = 0;
    has_final_ = false;
    trace_.clear();
    if (cfg_.backend == Backend::oracle) {
        sv_ = std::make_unique<StateVector>(prepare_plus(spec_.n_sites));
    } else if (kplan_) {
        kstate_ = std::make_unique<UniformKState>(kplan_->init());
    } else {
        gauss_ = std::make_unique<GaussianState>(init_vacuum(spec_.n_sites));
    }
    return observation_of(measure_now(), spec_, cfg_.bare_observation);
}

Environment::StepResult Environment::step(const Action& action) {
    if (done()) throw std::runtime_error("env: step on a finished episode");
    Action applied = action;
    applied.gamma = std::clamp(action.gamma, kActionLow, kActionHigh);
    applied.beta = std::clamp(action.beta, kActionLow, kActionHigh);
    if (applied.gamma != action.gamma || applied.beta != action.beta) ++clip_events_;

    if (sv_) {
        apply_uz(*sv_, sv_energy_table_, applied.gamma);
        apply_ux(*sv_, applied.beta);
    } else if (kstate_) {
        kplan_->apply_layer(*kstate_, applied.gamma, applied.beta);
    } else {
        fplan_->apply_layer(*gauss_, applied.gamma, applied.beta);
    }
    ++t_;

    const MeasurementRecord rec = measure_now();
    StepResult result;
    result.obs = observation_of(rec, spec_, cfg_.bare_observation);
    result.done = (t_ >= cfg_.p_steps);
    if (result.done) {
        has_final_ = true;
        final_energy_ = rec.energy;
        if (cfg_.reward_mode == RewardMode::raw) {
            result.reward = -rec.energy;
        } else {
            result.reward = -residual_energy_density(rec.energy, extremes_);
        }
    }
    trace_.push_back({t_, applied, result.obs, result.reward});
    return result;
}

double Environment::final_energy() const {
    if (!has_final_) throw std::runtime_error("env: episode not finished");
    return final_energy_;
}

std::vector<double> Environment::observation_vector(const Observation& obs) const {
    std::vector<double> x{obs.hz_density, obs.hx_density};
    if (cfg_.append_progress)
        x.push_back(static_cast<double>(t_) / cfg_.p_steps);
    return x;
}

}  // namespace qaoa
