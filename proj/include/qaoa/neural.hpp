#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace qaoa {

// Dense ReLU MLP with linear output. Fixed small architectures (in->32->16->out);
// forward and reverse passes are batched, columns are samples.
struct MlpParams {
    std::vector<int> sizes;
    std::vector<Eigen::MatrixXd> w;  // w[l]: sizes[l+1] x sizes[l]
    std::vector<Eigen::VectorXd> b;
};

struct MlpGrads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
};

MlpParams mlp_init(const std::vector<int>& sizes, std::uint64_t seed);
Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x);
// Gradient of sum(upstream .* output) with respect to all parameters.
MlpGrads mlp_gradients(const MlpParams& params, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& upstream);
MlpGrads mlp_zero_grads(const MlpParams& params);

// Deterministic standard normal (Box-Muller), portable across toolchains.
double standard_normal(std::mt19937_64& rng);

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;
inline constexpr double kLogStdInit = -0.5;

struct GaussianPolicy {
    MlpParams mean_net;            // in -> 2
    Eigen::Vector2d log_std;       // state-independent, learned

    void clamp_log_std();
};

GaussianPolicy make_policy(int obs_dim, std::uint64_t seed);

struct GaussianSample {
    Eigen::Vector2d action_raw;
    double logp = 0.0;
};

GaussianSample gaussian_sample(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
                               std::mt19937_64& rng);
double gaussian_logp(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                     const Eigen::Vector2d& action);

using ValueNet = MlpParams;
ValueNet make_value_net(int obs_dim, std::uint64_t seed);

// Bias-corrected Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8), descent step.
struct AdamState {
    std::vector<Eigen::ArrayXXd> mw, vw;
    std::vector<Eigen::ArrayXd> mb, vb;
    long t = 0;
};

AdamState adam_init(const MlpParams& params);
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr);

struct Adam2 {
    Eigen::Array2d m = Eigen::Array2d::Zero();
    Eigen::Array2d v = Eigen::Array2d::Zero();
    long t = 0;
};

void adam_step(Eigen::Vector2d& param, const Eigen::Vector2d& grad, Adam2& state, double lr);

// Transferable artifact: both networks plus observation/action metadata.
struct PolicyCheckpoint {
    GaussianPolicy policy;
    ValueNet value;
    std::string obs_mode = "intensive";  // or "bare"
    Eigen::Vector2d action_bounds;
    nlohmann::json meta;
};

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path);
PolicyCheckpoint load_checkpoint(const std::string& path);

}  // namespace qaoa
