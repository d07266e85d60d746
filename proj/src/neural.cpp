#include "qaoa/neural.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace qaoa {

double standard_normal(std::mt19937_64& rng) {
    // Box-Muller on [0,1) doubles built from the top 53 bits.
    double u1 = 0.0;
    while (u1 == 0.0) u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

MlpParams mlp_init(const std::vector<int>& sizes, std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("mlp_init: need at least two layers");
    std::mt19937_64 rng(seed);
    MlpParams params;
    params.sizes = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int rows = sizes[l + 1];
        const int cols = sizes[l];
        Eigen::MatrixXd w(rows, cols);
        const double scale = std::sqrt(2.0 / cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) w(r, c) = scale * standard_normal(rng);
        params.w.push_back(std::move(w));
        params.b.push_back(Eigen::VectorXd::Zero(rows));
    }
    return params;
}

Eigen::MatrixXd mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x) {
    if (x.rows() != params.sizes.front())
        throw std::invalid_argument("mlp_forward: input dimension mismatch");
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < params.w.size(); ++l) {
        Eigen::MatrixXd z = (params.w[l] * a).colwise() + params.b[l];
        if (l + 1 < params.w.size()) z = z.cwiseMax(0.0);  // ReLU on hidden layers
        a = std::move(z);
    }
    return a;
}

MlpGrads mlp_zero_grads(const MlpParams& params) {
    MlpGrads grads;
    for (std::size_t l = 0; l < params.w.size(); ++l) {
        grads.w.push_back(Eigen::MatrixXd::Zero(params.w[l].rows(), params.w[l].cols()));
        grads.b.push_back(Eigen::VectorXd::Zero(params.b[l].size()));
    }
    return grads;
}

MlpGrads mlp_gradients(const MlpParams& params, const Eigen::MatrixXd& x,
                       const Eigen::MatrixXd& upstream) {
    if (x.rows() != params.sizes.front())
        throw std::invalid_argument("mlp_gradients: input dimension mismatch");
    if (upstream.rows() != params.sizes.back() || upstream.cols() != x.cols())
        throw std::invalid_argument("mlp_gradients: upstream shape mismatch");

    const std::size_t n_layers = params.w.size();
    std::vector<Eigen::MatrixXd> acts(n_layers + 1);
    acts[0] = x;
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd z = (params.w[l] * acts[l]).colwise() + params.b[l];
        if (l + 1 < n_layers) z = z.cwiseMax(0.0);
        acts[l + 1] = std::move(z);
    }

    MlpGrads grads = mlp_zero_grads(params);
    Eigen::MatrixXd delta = upstream;
    for (std::size_t l = n_layers; l-- > 0;) {
        grads.w[l] = delta * acts[l].transpose();
        grads.b[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = params.w[l].transpose() * delta;
            // ReLU mask: post-activation is zero exactly where the unit was inactive
            delta = (acts[l].array() > 0.0).cast<double>() * delta.array();
        }
    }
    return grads;
}

void GaussianPolicy::clamp_log_std() {
    log_std = log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

GaussianPolicy make_policy(int obs_dim, std::uint64_t seed) {
    GaussianPolicy policy;
    policy.mean_net = mlp_init({obs_dim, 32, 16, 2}, seed);
    // start near the middle of the action box with weak state dependence: a
    // full-scale head can place the whole initial distribution outside the
    // box, where clipping flattens every reward and kills the gradient
    policy.mean_net.w.back() *= 0.01;
    policy.mean_net.b.back().setConstant(0.7853981633974483);  // pi/4
    policy.log_std = Eigen::Vector2d::Constant(kLogStdInit);
    return policy;
}

double gaussian_logp(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                     const Eigen::Vector2d& action) {
    double logp = 0.0;
    for (int d = 0; d < 2; ++d) {
        const double sigma = std::exp(log_std(d));
        const double z = (action(d) - mean(d)) / sigma;
        logp += -0.5 * z * z - log_std(d) - 0.5 * std::log(2.0 * M_PI);
    }
    return logp;
}

GaussianSample gaussian_sample(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
                               std::mt19937_64& rng) {
    const Eigen::Vector2d mean = mlp_forward(policy.mean_net, obs);
    GaussianSample sample;
    for (int d = 0; d < 2; ++d)
        sample.action_raw(d) = mean(d) + std::exp(policy.log_std(d)) * standard_normal(rng);
    sample.logp = gaussian_logp(mean, policy.log_std, sample.action_raw);
    return sample;
}

ValueNet make_value_net(int obs_dim, std::uint64_t seed) {
    return mlp_init({obs_dim, 32, 16, 1}, seed);
}

AdamState adam_init(const MlpParams& params) {
    AdamState state;
    for (std::size_t l = 0; l < params.w.size(); ++l) {
        state.mw.push_back(Eigen::ArrayXXd::Zero(params.w[l].rows(), params.w[l].cols()));
        state.vw.push_back(Eigen::ArrayXXd::Zero(params.w[l].rows(), params.w[l].cols()));
        state.mb.push_back(Eigen::ArrayXd::Zero(params.b[l].size()));
        state.vb.push_back(Eigen::ArrayXd::Zero(params.b[l].size()));
    }
    return state;
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <typename Param, typename Grad, typename Moment>
void adam_apply(Param& p, const Grad& g, Moment& m, Moment& v, long t, double lr) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g * g;
    const double mc = 1.0 - std::pow(kBeta1, static_cast<double>(t));
    const double vc = 1.0 - std::pow(kBeta2, static_cast<double>(t));
    p -= (lr * (m / mc) / ((v / vc).sqrt() + kAdamEps)).matrix();
}

}  // namespace

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state, double lr) {
    ++state.t;
    for (std::size_t l = 0; l < params.w.size(); ++l) {
        adam_apply(params.w[l], grads.w[l].array(), state.mw[l], state.vw[l], state.t, lr);
        adam_apply(params.b[l], grads.b[l].array(), state.mb[l], state.vb[l], state.t, lr);
    }
}

void adam_step(Eigen::Vector2d& param, const Eigen::Vector2d& grad, Adam2& state, double lr) {
    ++state.t;
    adam_apply(param, grad.array(), state.m, state.v, state.t, lr);
}

// ---- checkpoint persistence ----

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.size();
    if (rows == 0) throw std::invalid_argument("checkpoint: empty weight matrix");
    const auto cols = j.at(0).size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j.at(r).size() != cols) throw std::invalid_argument("checkpoint: ragged weight matrix");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

nlohmann::json net_to_json(const MlpParams& params) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < params.w.size(); ++l) {
        nlohmann::json bias = nlohmann::json::array();
        for (Eigen::Index i = 0; i < params.b[l].size(); ++i) bias.push_back(params.b[l](i));
        layers.push_back({matrix_to_json(params.w[l]), bias});
    }
    return layers;
}

MlpParams net_from_json(const nlohmann::json& arch, const nlohmann::json& layers) {
    MlpParams params;
    params.sizes = arch.get<std::vector<int>>();
    if (layers.size() + 1 != params.sizes.size())
        throw std::invalid_argument("checkpoint: layer count does not match arch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd w = matrix_from_json(layers.at(l).at(0));
        const auto bias = layers.at(l).at(1).get<std::vector<double>>();
        if (w.rows() != params.sizes[l + 1] || w.cols() != params.sizes[l] ||
            static_cast<int>(bias.size()) != params.sizes[l + 1])
            throw std::invalid_argument("checkpoint: weight shape does not match arch");
        params.w.push_back(std::move(w));
        params.b.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), bias.size()));
    }
    return params;
}

}  // namespace

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::string& path) {
    nlohmann::json j;
    j["arch"] = ckpt.policy.mean_net.sizes;
    j["weights"] = net_to_json(ckpt.policy.mean_net);
    j["log_std"] = {ckpt.policy.log_std(0), ckpt.policy.log_std(1)};
    j["value_arch"] = ckpt.value.sizes;
    j["value_weights"] = net_to_json(ckpt.value);
    j["obs_mode"] = ckpt.obs_mode;
    j["action_bounds"] = {ckpt.action_bounds(0), ckpt.action_bounds(1)};
    j["meta"] = ckpt.meta.is_null() ? nlohmann::json::object() : ckpt.meta;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

PolicyCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("malformed checkpoint " + path + ": " + e.what());
    }
    for (const char* key : {"arch", "weights", "log_std", "value_arch", "value_weights",
                            "obs_mode", "action_bounds", "meta"})
        if (!j.contains(key))
            throw std::invalid_argument("checkpoint " + path + ": missing key '" + key + "'");
    PolicyCheckpoint ckpt;
    ckpt.policy.mean_net = net_from_json(j.at("arch"), j.at("weights"));
    const auto ls = j.at("log_std").get<std::vector<double>>();
    if (ls.size() != 2) throw std::invalid_argument("checkpoint: log_std must have 2 entries");
    ckpt.policy.log_std = Eigen::Vector2d(ls[0], ls[1]);
    ckpt.value = net_from_json(j.at("value_arch"), j.at("value_weights"));
    ckpt.obs_mode = j.at("obs_mode").get<std::string>();
    const auto ab = j.at("action_bounds").get<std::vector<double>>();
    if (ab.size() != 2) throw std::invalid_argument("checkpoint: action_bounds must have 2 entries");
    ckpt.action_bounds = Eigen::Vector2d(ab[0], ab[1]);
    ckpt.meta = j.at("meta");
    return ckpt;
}

}  // namespace qaoa
