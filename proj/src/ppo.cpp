#include "qaoa/ppo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qaoa {

void validate_config(const TrainConfig& cfg) {
    if (cfg.n_epochs < 1 || cfg.n_episodes_per_epoch < 1 || cfg.p_steps < 1 ||
        cfg.policy_iters < 1 || cfg.value_iters < 1)
        throw std::invalid_argument("train config: counts must be positive");
    if (!(cfg.clip_ratio > 0.0 && cfg.clip_ratio < 1.0))
        throw std::invalid_argument("train config: clip_ratio must be in (0,1)");
    if (!(cfg.discount > 0.0 && cfg.discount <= 1.0))
        throw std::invalid_argument("train config: discount must be in (0,1]");
    if (cfg.gae_lambda < 0.0 || cfg.gae_lambda > 1.0 || cfg.policy_lr <= 0.0 ||
        cfg.value_lr <= 0.0 || cfg.kl_stop <= 0.0)
        throw std::invalid_argument("train config: invalid optimizer settings");
}

std::uint64_t episode_seed(std::uint64_t master_seed, int epoch, int episode) {
    // splitmix64 over the packed identifiers
    std::uint64_t x = master_seed * 0x9e3779b97f4a7c15ULL +
                      static_cast<std::uint64_t>(epoch) * 0xbf58476d1ce4e5b9ULL +
                      static_cast<std::uint64_t>(episode) + 1;
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

RolloutBuffer collect_epoch(Environment& env, const GaussianPolicy& policy,
                            const ValueNet& value, const TrainConfig& cfg, int epoch_index) {
    const int p = cfg.p_steps;
    const int n_epi = cfg.n_episodes_per_epoch;
    const int m = p * n_epi;
    const int obs_dim = env.observation_dim();

    RolloutBuffer buf;
    buf.p_steps = p;
    buf.n_episodes = n_epi;
    buf.obs.resize(obs_dim, m);
    buf.actions.resize(2, m);
    buf.logp.resize(m);
    buf.values.resize(m);
    buf.rewards.resize(m);
    buf.final_energies.reserve(n_epi);

    for (int ep = 0; ep < n_epi; ++ep) {
        std::mt19937_64 rng(episode_seed(cfg.master_seed, epoch_index, ep));
        Observation obs = env.reset();
        for (int t = 0; t < p; ++t) {
            const int i = ep * p + t;
            const std::vector<double> x = env.observation_vector(obs);
            const Eigen::Map<const Eigen::VectorXd> xv(x.data(),
                                                       static_cast<Eigen::Index>(x.size()));
            const GaussianSample sample = gaussian_sample(policy, xv, rng);
            buf.obs.col(i) = xv;
            buf.actions.col(i) = sample.action_raw;
            buf.logp(i) = sample.logp;
            buf.values(i) = mlp_forward(value, xv)(0, 0);
            const auto result = env.step({sample.action_raw(0), sample.action_raw(1)});
            buf.rewards(i) = result.reward;
            obs = result.obs;
        }
        buf.final_energies.push_back(env.final_energy());
    }
    return buf;
}

void compute_gae(RolloutBuffer& buf, double discount, double lambda) {
    const int p = buf.p_steps;
    const int m = buf.size();
    buf.advantages_raw.resize(m);
    buf.returns.resize(m);
    for (int ep = 0; ep < buf.n_episodes; ++ep) {
        double adv = 0.0;
        for (int t = p - 1; t >= 0; --t) {
            const int i = ep * p + t;
            const double v_next = (t + 1 < p) ? buf.values(i + 1) : 0.0;  // terminal bootstrap
            const double delta = buf.rewards(i) + discount * v_next - buf.values(i);
            adv = delta + discount * lambda * adv;
            buf.advantages_raw(i) = adv;
            buf.returns(i) = adv + buf.values(i);
        }
    }
    const double mean = buf.advantages_raw.mean();
    const double var = (buf.advantages_raw.array() - mean).square().mean();
    buf.advantages = (buf.advantages_raw.array() - mean) / (std::sqrt(var) + 1e-8);
}

SurrogateGradient surrogate_gradient(const GaussianPolicy& policy, const RolloutBuffer& buf,
                                     double clip_ratio) {
    const int m = buf.size();
    const Eigen::Matrix2Xd mean = mlp_forward(policy.mean_net, buf.obs);

    SurrogateGradient ev;
    Eigen::Matrix2Xd upstream(2, m);
    const Eigen::Array2d inv_var = (-2.0 * policy.log_std).array().exp();
    double surrogate = 0.0;
    double logp_gap = 0.0;
    int clipped = 0;
    for (int i = 0; i < m; ++i) {
        const double logp_new = gaussian_logp(mean.col(i), policy.log_std, buf.actions.col(i));
        const double rho = std::exp(logp_new - buf.logp(i));
        const double adv = buf.advantages(i);
        const double clipped_rho =
            std::min(std::max(rho, 1.0 - clip_ratio), 1.0 + clip_ratio);
        surrogate += std::min(rho * adv, clipped_rho * adv);
        logp_gap += buf.logp(i) - logp_new;
        if (std::abs(rho - 1.0) > clip_ratio) ++clipped;

        // per-sample dSurrogate/dlogp_new; zero where the clip is active
        const bool active = (adv >= 0.0) ? (rho <= 1.0 + clip_ratio) : (rho >= 1.0 - clip_ratio);
        const double coeff = active ? rho * adv / m : 0.0;
        const Eigen::Array2d diff = (buf.actions.col(i) - mean.col(i)).array();
        upstream.col(i) = (coeff * diff * inv_var).matrix();
        ev.log_std_grad += (coeff * (diff.square() * inv_var - 1.0)).matrix();
    }
    ev.mean_grads = mlp_gradients(policy.mean_net, buf.obs, upstream);
    ev.loss = -surrogate / m;
    ev.kl = logp_gap / m;
    ev.clip_frac = static_cast<double>(clipped) / m;
    return ev;
}

UpdateStats ppo_update(GaussianPolicy& policy, ValueNet& value, PpoOptimState& optim,
                       const RolloutBuffer& buf, const TrainConfig& cfg) {
    const int m = buf.size();
    UpdateStats stats;

    for (int iter = 0; iter < cfg.policy_iters; ++iter) {
        SurrogateGradient ev = surrogate_gradient(policy, buf, cfg.clip_ratio);
        if (iter == 0) stats.policy_loss = ev.loss;
        stats.kl = ev.kl;
        stats.clip_frac = ev.clip_frac;
        if (!std::isfinite(ev.loss))
            throw std::runtime_error("ppo_update: non-finite policy loss (kl=" +
                                     std::to_string(ev.kl) + ")");
        if (ev.kl > cfg.kl_stop) break;
        stats.policy_iters_used = iter + 1;

        for (auto& g : ev.mean_grads.w) g = -g;  // adam descends; we ascend
        for (auto& g : ev.mean_grads.b) g = -g;
        adam_step(policy.mean_net, ev.mean_grads, optim.policy_adam, cfg.policy_lr);
        Eigen::Vector2d neg_ls = -ev.log_std_grad;
        adam_step(policy.log_std, neg_ls, optim.log_std_adam, cfg.policy_lr);
        policy.clamp_log_std();
    }

    for (int iter = 0; iter < cfg.value_iters; ++iter) {
        const Eigen::MatrixXd pred = mlp_forward(value, buf.obs);
        const Eigen::ArrayXd err = pred.row(0).transpose().array() - buf.returns.array();
        stats.value_loss = err.square().mean();
        if (!std::isfinite(stats.value_loss))
            throw std::runtime_error("ppo_update: non-finite value loss");
        const Eigen::MatrixXd upstream = (2.0 / m) * err.matrix().transpose();
        const MlpGrads grads = mlp_gradients(value, buf.obs, upstream);
        adam_step(value, grads, optim.value_adam, cfg.value_lr);
    }
    // report the post-fit error, not the one of the last descent iterate
    const Eigen::MatrixXd pred = mlp_forward(value, buf.obs);
    stats.value_loss = (pred.row(0).transpose().array() - buf.returns.array()).square().mean();

    return stats;
}

PolicyCheckpoint make_checkpoint(const GaussianPolicy& policy, const ValueNet& value,
                                 const EpisodeConfig& env_cfg) {
    PolicyCheckpoint ckpt;
    ckpt.policy = policy;
    ckpt.value = value;
    ckpt.obs_mode = env_cfg.bare_observation ? "bare" : "intensive";
    ckpt.action_bounds = Eigen::Vector2d(kActionLow, kActionHigh);
    ckpt.meta = nlohmann::json::object();
    return ckpt;
}

TrainResult train(const ChainSpec& spec, const TrainConfig& cfg, const EpisodeConfig& env_cfg,
                  const EpochCallback& on_epoch) {
    validate_config(cfg);
    if (env_cfg.p_steps != cfg.p_steps)
        throw std::invalid_argument("train: p_steps mismatch between configs");
    Environment env(spec, env_cfg);
    const EnergyExtremes ext = classical_extremes(spec);

    GaussianPolicy policy = make_policy(env.observation_dim(),
                                        episode_seed(cfg.master_seed, -1, 0));
    ValueNet value = make_value_net(env.observation_dim(),
                                    episode_seed(cfg.master_seed, -1, 1));
    PpoOptimState optim;
    optim.policy_adam = adam_init(policy.mean_net);
    optim.value_adam = adam_init(value);

    TrainResult result;
    result.log.reserve(cfg.n_epochs);
    for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
        RolloutBuffer buf = collect_epoch(env, policy, value, cfg, epoch);
        compute_gae(buf, cfg.discount, cfg.gae_lambda);
        const UpdateStats stats = ppo_update(policy, value, optim, buf, cfg);

        EpochLog log;
        log.epoch = epoch;
        double reward_sum = 0.0;
        double eps_sum = 0.0;
        for (int ep = 0; ep < buf.n_episodes; ++ep) {
            reward_sum += buf.rewards(ep * buf.p_steps + buf.p_steps - 1);
            eps_sum += residual_energy_density(buf.final_energies[ep], ext);
        }
        log.mean_reward = reward_sum / buf.n_episodes;
        log.mean_eps = eps_sum / buf.n_episodes;
        log.kl = stats.kl;
        log.clip_frac = stats.clip_frac;
        log.policy_loss = stats.policy_loss;
        log.value_loss = stats.value_loss;
        result.log.push_back(log);

        if (on_epoch) on_epoch(epoch, make_checkpoint(policy, value, env_cfg));
    }
    result.checkpoint = make_checkpoint(policy, value, env_cfg);
    result.checkpoint.meta["n"] = spec.n_sites;
    result.checkpoint.meta["p"] = cfg.p_steps;
    result.checkpoint.meta["master_seed"] = cfg.master_seed;
    return result;
}

std::vector<ResultRecord> evaluate(const PolicyCheckpoint& ckpt, const ChainSpec& spec,
                                   int runs, bool deterministic, const EpisodeConfig& env_cfg,
                                   std::uint64_t eval_seed) {
    if ((ckpt.obs_mode == "bare") != env_cfg.bare_observation)
        throw std::invalid_argument("evaluate: checkpoint observation mode does not match env");
    Environment env(spec, env_cfg);
    if (ckpt.policy.mean_net.sizes.front() != env.observation_dim())
        throw std::invalid_argument("evaluate: checkpoint input size does not match env");
    const EnergyExtremes ext = classical_extremes(spec);

    std::vector<ResultRecord> records;
    records.reserve(runs);
    for (int run = 0; run < runs; ++run) {
        std::mt19937_64 rng(episode_seed(eval_seed, 0x7e57, run));
        ResultRecord rec;
        rec.run_id = run;
        Observation obs = env.reset();
        for (int t = 0; t < env_cfg.p_steps; ++t) {
            const std::vector<double> x = env.observation_vector(obs);
            const Eigen::Map<const Eigen::VectorXd> xv(x.data(),
                                                       static_cast<Eigen::Index>(x.size()));
            Eigen::Vector2d action;
            if (deterministic) {
                action = mlp_forward(ckpt.policy.mean_net, xv);
            } else {
                action = gaussian_sample(ckpt.policy, xv, rng).action_raw;
            }
            const auto result = env.step({action(0), action(1)});
            obs = result.obs;
            rec.reward = result.reward;
        }
        for (const StepRecord& sr : env.trace()) {
            rec.schedule.gammas.push_back(sr.action.gamma);
            rec.schedule.betas.push_back(sr.action.beta);
            const double denom = sr.action.gamma + sr.action.beta;
            rec.s.push_back(denom != 0.0 ? sr.action.gamma / denom
                                         : std::numeric_limits<double>::quiet_NaN());
        }
        rec.trace = env.trace();
        rec.e_p = env.final_energy();
        rec.eps = residual_energy_density(rec.e_p, ext);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace qaoa
