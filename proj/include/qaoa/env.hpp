#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qaoa/chain.hpp"
#include "qaoa/fermion.hpp"
#include "qaoa/measurement.hpp"
#include "qaoa/statevector.hpp"

namespace qaoa {

// Intensive two-component observation shown to the agent.
struct Observation {
    double hz_density = 0.0;  // <H_z> / sum_j J_j
    double hx_density = 0.0;  // <H_x> / N
};

struct Action {
    double gamma = 0.0;
    double beta = 0.0;
};

inline constexpr double kActionLow = 0.0;
inline constexpr double kActionHigh = 1.5707963267948966;  // pi/2

enum class Backend { oracle, fermion };
enum class RewardMode { raw, normalized };

struct EpisodeConfig {
    int p_steps = 1;
    Backend backend = Backend::oracle;
    RewardMode reward_mode = RewardMode::raw;
    bool bare_observation = false;   // skip intensive normalization
    bool append_progress = false;    // append t/P to the observation vector
};

Observation observation_of(const MeasurementRecord& rec, const ChainSpec& spec,
                           bool bare = false);

struct StepRecord {
    int t = 0;
    Action action;          // clipped values actually applied
    Observation obs;
    double reward = 0.0;
};

class Environment {
  public:
    Environment(ChainSpec spec, EpisodeConfig cfg);

    Observation reset();

    struct StepResult {
        Observation obs;
        double reward = 0.0;
        bool done = false;
    };
    StepResult step(const Action& action);

    int step_count() const { return t_; }
    bool done() const { return t_ >= cfg_.p_steps; }
    double final_energy() const;
    const std::vector<StepRecord>& trace() const { return trace_; }
    long clip_events() const { return clip_events_; }
    const ChainSpec& spec() const { return spec_; }
    const EpisodeConfig& config() const { return cfg_; }
    int observation_dim() const { return cfg_.append_progress ? 3 : 2; }
    std::vector<double> observation_vector(const Observation& obs) const;

  private:
    MeasurementRecord measure_now() const;

    ChainSpec spec_;
    EpisodeConfig cfg_;
    int t_ = 0;
    long clip_events_ = 0;
    bool has_final_ = false;
    double final_energy_ = 0.0;
    EnergyExtremes extremes_;
    std::vector<StepRecord> trace_;

    // exactly one engine is active, chosen from backend and uniformity
    std::unique_ptr<StateVector> sv_;
    std::vector<double> sv_energy_table_;
    std::shared_ptr<const FermionPlan> fplan_;
    std::unique_ptr<GaussianState> gauss_;
    std::shared_ptr<const UniformKPlan> kplan_;
    std::unique_ptr<UniformKState> kstate_;
};

}  // namespace qaoa
