#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qaoa/chain.hpp"
#include "qaoa/env.hpp"
#include "qaoa/neural.hpp"

namespace qaoa {

struct TrainConfig {
    int n_epochs = 1024;
    int n_episodes_per_epoch = 100;
    int p_steps = 1;
    double discount = 1.0;
    double gae_lambda = 0.97;
    double clip_ratio = 0.2;
    double policy_lr = 3e-4;
    double value_lr = 1e-3;
    int policy_iters = 80;
    int value_iters = 80;
    double kl_stop = 0.015;
    std::uint64_t master_seed = 0;
};

void validate_config(const TrainConfig& cfg);

// One epoch of on-policy experience, flattened; episode e occupies the
// column range [e*P, (e+1)*P).
struct RolloutBuffer {
    int p_steps = 0;
    int n_episodes = 0;
    Eigen::MatrixXd obs;          // obs_dim x (episodes * P), pre-action observations
    Eigen::Matrix2Xd actions;     // raw (unclipped) policy samples
    Eigen::VectorXd logp;
    Eigen::VectorXd values;
    Eigen::VectorXd rewards;
    Eigen::VectorXd advantages_raw;
    Eigen::VectorXd advantages;   // normalized over the epoch
    Eigen::VectorXd returns;
    std::vector<double> final_energies;  // one per episode

    int size() const { return p_steps * n_episodes; }
};

std::uint64_t episode_seed(std::uint64_t master_seed, int epoch, int episode);

RolloutBuffer collect_epoch(Environment& env, const GaussianPolicy& policy,
                            const ValueNet& value, const TrainConfig& cfg, int epoch_index);

void compute_gae(RolloutBuffer& buffer, double discount, double lambda);

// Full-batch gradient of the clipped surrogate (ascent direction), plus the
// diagnostics evaluated at the same policy iterate.
struct SurrogateGradient {
    MlpGrads mean_grads;
    Eigen::Vector2d log_std_grad = Eigen::Vector2d::Zero();
    double loss = 0.0;       // negative clipped surrogate
    double kl = 0.0;         // mean(logp_old - logp_new)
    double clip_frac = 0.0;
};

SurrogateGradient surrogate_gradient(const GaussianPolicy& policy, const RolloutBuffer& buffer,
                                     double clip_ratio);

struct UpdateStats {
    double policy_loss = 0.0;  // negative clipped surrogate at the first iterate
    double value_loss = 0.0;   // MSE after the value fit
    double kl = 0.0;
    double clip_frac = 0.0;
    int policy_iters_used = 0;
};

struct PpoOptimState {
    AdamState policy_adam;
    Adam2 log_std_adam;
    AdamState value_adam;
};

UpdateStats ppo_update(GaussianPolicy& policy, ValueNet& value, PpoOptimState& optim,
                       const RolloutBuffer& buffer, const TrainConfig& cfg);

struct EpochLog {
    int epoch = 0;
    double mean_reward = 0.0;
    double mean_eps = 0.0;
    double kl = 0.0;
    double clip_frac = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
};

struct TrainResult {
    PolicyCheckpoint checkpoint;
    std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(int epoch, const PolicyCheckpoint&)>;

TrainResult train(const ChainSpec& spec, const TrainConfig& cfg, const EpisodeConfig& env_cfg,
                  const EpochCallback& on_epoch = nullptr);

struct ResultRecord {
    int run_id = 0;
    Schedule schedule;       // clipped angles actually applied
    double e_p = 0.0;
    double eps = 0.0;
    double reward = 0.0;
    std::vector<double> s;   // NaN entries where gamma_t + beta_t = 0
    std::vector<StepRecord> trace;
};

std::vector<ResultRecord> evaluate(const PolicyCheckpoint& ckpt, const ChainSpec& spec,
                                   int runs, bool deterministic, const EpisodeConfig& env_cfg,
                                   std::uint64_t eval_seed);

PolicyCheckpoint make_checkpoint(const GaussianPolicy& policy, const ValueNet& value,
                                 const EpisodeConfig& env_cfg);

}  // namespace qaoa
