#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "qaoa/neural.hpp"

using namespace qaoa;

namespace {

double loss_of(const MlpParams& params, const Eigen::MatrixXd& x, const Eigen::MatrixXd& up) {
    return (up.array() * mlp_forward(params, x).array()).sum();
}

}  // namespace

TEST_CASE("mlp_init shapes and determinism") {
    const MlpParams net = mlp_init({3, 32, 16, 2}, 42);
    REQUIRE(net.w.size() == 3);
    CHECK(net.w[0].rows() == 32);
    CHECK(net.w[0].cols() == 3);
    CHECK(net.w[1].rows() == 16);
    CHECK(net.w[2].rows() == 2);
    CHECK(net.b[2].size() == 2);
    for (const auto& b : net.b) CHECK(b.cwiseAbs().maxCoeff() == 0.0);

    const MlpParams same = mlp_init({3, 32, 16, 2}, 42);
    const MlpParams other = mlp_init({3, 32, 16, 2}, 43);
    CHECK(net.w[0] == same.w[0]);
    CHECK(net.w[0] != other.w[0]);
}

TEST_CASE("mlp_forward on hand-computed examples") {
    // single linear layer
    MlpParams lin;
    lin.sizes = {2, 2};
    lin.w.push_back((Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, -1.0).finished());
    lin.b.push_back((Eigen::VectorXd(2) << 0.5, 0.5).finished());
    Eigen::MatrixXd x(2, 1);
    x << 2.0, 3.0;
    const Eigen::MatrixXd y = mlp_forward(lin, x);
    CHECK(y(0, 0) == doctest::Approx(2.5));
    CHECK(y(1, 0) == doctest::Approx(-2.5));

    // one hidden ReLU unit: out = relu(x) - relu(-x) = x, but gradients differ
    MlpParams relu;
    relu.sizes = {1, 2, 1};
    relu.w.push_back((Eigen::MatrixXd(2, 1) << 1.0, -1.0).finished());
    relu.b.push_back(Eigen::VectorXd::Zero(2));
    relu.w.push_back((Eigen::MatrixXd(1, 2) << 1.0, -1.0).finished());
    relu.b.push_back(Eigen::VectorXd::Zero(1));
    Eigen::MatrixXd xs(1, 3);
    xs << -2.0, 0.5, 3.0;
    const Eigen::MatrixXd ys = mlp_forward(relu, xs);
    CHECK(ys(0, 0) == doctest::Approx(-2.0));
    CHECK(ys(0, 1) == doctest::Approx(0.5));
    CHECK(ys(0, 2) == doctest::Approx(3.0));

    // batching: columns are independent samples
    const MlpParams net = mlp_init({2, 32, 16, 2}, 1);
    Eigen::MatrixXd batch = Eigen::MatrixXd::Random(2, 5);
    const Eigen::MatrixXd all = mlp_forward(net, batch);
    for (int i = 0; i < 5; ++i) {
        const Eigen::MatrixXd one = mlp_forward(net, batch.col(i));
        CHECK((all.col(i) - one.col(0)).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("mlp_gradients against finite differences") {
    const MlpParams net = mlp_init({3, 32, 16, 2}, 7);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::MatrixXd x(3, 5);
    Eigen::MatrixXd up(2, 5);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = dist(rng);
    for (int i = 0; i < up.size(); ++i) up.data()[i] = dist(rng);

    const MlpGrads grads = mlp_gradients(net, x, up);
    const double h = 1e-6;
    int probes = 0;
    std::uniform_int_distribution<int> pick_layer(0, 2);
    while (probes < 100) {
        MlpParams pert = net;
        const int l = pick_layer(rng);
        double analytic = 0.0;
        double* slot = nullptr;
        if (dist(rng) > 0.0) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(net.w[l].size()) - 1);
            const int idx = pick(rng);
            slot = pert.w[l].data() + idx;
            analytic = grads.w[l].data()[idx];
        } else {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(net.b[l].size()) - 1);
            const int idx = pick(rng);
            slot = pert.b[l].data() + idx;
            analytic = grads.b[l].data()[idx];
        }
        const double saved = *slot;
        *slot = saved + h;
        const double hi = loss_of(pert, x, up);
        *slot = saved - h;
        const double lo = loss_of(pert, x, up);
        const double fd = (hi - lo) / (2.0 * h);
        CHECK(std::abs(fd - analytic) <= 1e-5 * (1.0 + std::abs(fd)));
        ++probes;
    }
}

TEST_CASE("standard_normal moments") {
    std::mt19937_64 rng(123);
    double sum = 0.0;
    double sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = standard_normal(rng);
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) <= 0.01);
    CHECK(std::abs(sum2 / n - 1.0) <= 0.02);
}

TEST_CASE("gaussian_logp is a normalized density") {
    const Eigen::Vector2d mean(0.3, -0.7);
    const Eigen::Vector2d log_std(-0.5, 0.2);

    // trapezoid integration of exp(logp), factorized over the two components
    double integral = 1.0;
    for (int d = 0; d < 2; ++d) {
        const double sigma = std::exp(log_std(d));
        const double lo = mean(d) - 10.0 * sigma;
        const double hi = mean(d) + 10.0 * sigma;
        const int steps = 4000;
        const double dx = (hi - lo) / steps;
        double acc = 0.0;
        for (int i = 0; i <= steps; ++i) {
            const double xi = lo + i * dx;
            Eigen::Vector2d a = mean;
            a(d) = xi;
            // divide out the untouched component, evaluated at its own mean
            const double lp = gaussian_logp(mean, log_std, a);
            const double marginal =
                std::exp(lp) * std::sqrt(2.0 * M_PI) * std::exp(log_std(1 - d));
            const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
            acc += w * marginal * dx;
        }
        integral *= acc;
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

    // symmetry and monotonicity in the distance from the mean
    CHECK(gaussian_logp(mean, log_std, mean + Eigen::Vector2d(0.1, 0.0)) ==
          doctest::Approx(gaussian_logp(mean, log_std, mean - Eigen::Vector2d(0.1, 0.0))));
    CHECK(gaussian_logp(mean, log_std, mean) >
          gaussian_logp(mean, log_std, mean + Eigen::Vector2d(0.5, 0.0)));
}

TEST_CASE("gaussian_sample statistics and logp consistency") {
    const GaussianPolicy policy = make_policy(2, 11);
    const Eigen::VectorXd obs = (Eigen::VectorXd(2) << 0.2, -0.9).finished();
    const Eigen::Vector2d mean = mlp_forward(policy.mean_net, obs).col(0);

    std::mt19937_64 rng(17);
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    Eigen::Vector2d acc2 = Eigen::Vector2d::Zero();
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const GaussianSample s = gaussian_sample(policy, obs, rng);
        CHECK(s.logp ==
              doctest::Approx(gaussian_logp(mean, policy.log_std, s.action_raw)).epsilon(1e-12));
        acc += s.action_raw;
        acc2 += s.action_raw.cwiseProduct(s.action_raw);
    }
    const Eigen::Vector2d emp_mean = acc / n;
    for (int d = 0; d < 2; ++d) {
        const double sigma = std::exp(policy.log_std(d));
        CHECK(std::abs(emp_mean(d) - mean(d)) <= 5.0 * sigma / std::sqrt(double(n)));
        const double var = acc2(d) / n - emp_mean(d) * emp_mean(d);
        CHECK(std::abs(var - sigma * sigma) <= 0.05 * sigma * sigma);
    }
}

TEST_CASE("policy construction and log_std clamping") {
    GaussianPolicy policy = make_policy(3, 5);
    CHECK(policy.mean_net.sizes == std::vector<int>{3, 32, 16, 2});
    CHECK(policy.log_std(0) == doctest::Approx(kLogStdInit));
    CHECK(policy.log_std(1) == doctest::Approx(kLogStdInit));

    policy.log_std << -9.0, 4.0;
    policy.clamp_log_std();
    CHECK(policy.log_std(0) == doctest::Approx(kLogStdMin));
    CHECK(policy.log_std(1) == doctest::Approx(kLogStdMax));

    const ValueNet value = make_value_net(2, 6);
    CHECK(value.sizes == std::vector<int>{2, 32, 16, 1});
}

TEST_CASE("adam matches the reference recursion") {
    // independent recursion for a single scalar parameter, constant gradient
    Eigen::Vector2d param(1.0, -2.0);
    Adam2 st;
    const Eigen::Vector2d grad(0.5, -1.5);
    const double lr = 0.01;

    double m0 = 0.0, v0 = 0.0, x0 = 1.0;
    double m1 = 0.0, v1 = 0.0, x1 = -2.0;
    for (int t = 1; t <= 7; ++t) {
        adam_step(param, grad, st, lr);
        m0 = 0.9 * m0 + 0.1 * grad(0);
        v0 = 0.999 * v0 + 0.001 * grad(0) * grad(0);
        x0 -= lr * (m0 / (1.0 - std::pow(0.9, t))) /
              (std::sqrt(v0 / (1.0 - std::pow(0.999, t))) + 1e-8);
        m1 = 0.9 * m1 + 0.1 * grad(1);
        v1 = 0.999 * v1 + 0.001 * grad(1) * grad(1);
        x1 -= lr * (m1 / (1.0 - std::pow(0.9, t))) /
              (std::sqrt(v1 / (1.0 - std::pow(0.999, t))) + 1e-8);
        CHECK(param(0) == doctest::Approx(x0).epsilon(1e-12));
        CHECK(param(1) == doctest::Approx(x1).epsilon(1e-12));
    }
}

TEST_CASE("adam minimizes a quadratic through the network interface") {
    // one-parameter "network": sizes {1, 1}, loss (w - 3)^2
    MlpParams net;
    net.sizes = {1, 1};
    net.w.push_back(Eigen::MatrixXd::Zero(1, 1));
    net.b.push_back(Eigen::VectorXd::Zero(1));
    AdamState st = adam_init(net);
    for (int it = 0; it < 3000; ++it) {
        MlpGrads g = mlp_zero_grads(net);
        g.w[0](0, 0) = 2.0 * (net.w[0](0, 0) - 3.0);
        adam_step(net, g, st, 0.01);
    }
    CHECK(net.w[0](0, 0) == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("checkpoint round trip") {
    const std::string path = "/tmp/qaoa_neural_test_ckpt.json";
    PolicyCheckpoint ckpt;
    ckpt.policy = make_policy(2, 21);
    ckpt.policy.log_std << -0.3, 0.1;
    ckpt.value = make_value_net(2, 22);
    ckpt.obs_mode = "intensive";
    ckpt.action_bounds << 0.0, 1.5707963267948966;
    ckpt.meta = {{"n", 8}, {"p", 4}};
    save_checkpoint(ckpt, path);

    const PolicyCheckpoint loaded = load_checkpoint(path);
    CHECK(loaded.obs_mode == "intensive");
    CHECK(loaded.action_bounds(1) == doctest::Approx(1.5707963267948966));
    CHECK(loaded.meta.at("n").get<int>() == 8);
    CHECK((loaded.policy.log_std - ckpt.policy.log_std).cwiseAbs().maxCoeff() <= 1e-15);

    const Eigen::VectorXd obs = (Eigen::VectorXd(2) << -0.4, 0.7).finished();
    const Eigen::MatrixXd a = mlp_forward(ckpt.policy.mean_net, obs);
    const Eigen::MatrixXd b = mlp_forward(loaded.policy.mean_net, obs);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15);
    const Eigen::MatrixXd va = mlp_forward(ckpt.value, obs);
    const Eigen::MatrixXd vb = mlp_forward(loaded.value, obs);
    CHECK((va - vb).cwiseAbs().maxCoeff() <= 1e-15);
    std::remove(path.c_str());
}

TEST_CASE("checkpoint validation") {
    const std::string path = "/tmp/qaoa_neural_test_bad.json";
    {
        std::ofstream out(path);
        out << "{\"arch\": [2, 32, 16, 2]}";  // missing everything else
    }
    CHECK_THROWS(load_checkpoint(path));
    {
        std::ofstream out(path);
        out << "garbage";
    }
    CHECK_THROWS(load_checkpoint(path));
    std::remove(path.c_str());
    CHECK_THROWS(load_checkpoint("/tmp/qaoa_no_such_file.json"));
}
