#include "qaoa/chain.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace qaoa {

double ChainSpec::coupling_sum() const {
    double s = 0.0;
    for (double j : couplings) s += j;
    return s;
}

bool ChainSpec::is_uniform() const {
    for (double j : couplings)
        if (j != couplings.front()) return false;
    return true;
}

void validate_spec(const ChainSpec& spec) {
    if (spec.n_sites < 4 || spec.n_sites % 2 != 0)
        throw std::invalid_argument("chain: N must be even and >= 4, got " +
                                    std::to_string(spec.n_sites));
    if (static_cast<int>(spec.couplings.size()) != spec.n_sites)
        throw std::invalid_argument("chain: couplings length must equal N");
    for (double j : spec.couplings)
        if (!std::isfinite(j) || j < 0.0 || j > 1.0)
            throw std::invalid_argument("chain: couplings must be finite and in [0,1]");
    if (!std::isfinite(spec.h_target) || spec.h_target < 0.0)
        throw std::invalid_argument("chain: h_target must be finite and >= 0");
}

void validate_schedule(const Schedule& sched) {
    if (sched.gammas.empty() || sched.gammas.size() != sched.betas.size())
        throw std::invalid_argument("schedule: need P >= 1 with equal-length gamma/beta");
    for (double g : sched.gammas)
        if (!std::isfinite(g)) throw std::invalid_argument("schedule: non-finite gamma");
    for (double b : sched.betas)
        if (!std::isfinite(b)) throw std::invalid_argument("schedule: non-finite beta");
}

ChainSpec make_uniform(int n, double j, double h) {
    ChainSpec spec;
    spec.n_sites = n;
    spec.h_target = h;
    spec.couplings.assign(static_cast<std::size_t>(n > 0 ? n : 0), j);
    validate_spec(spec);
    return spec;
}

ChainSpec make_disordered(int n, double h, std::uint64_t seed) {
    ChainSpec spec;
    spec.n_sites = n;
    spec.h_target = h;
    spec.seed = seed;
    std::mt19937_64 rng(seed);
    spec.couplings.resize(static_cast<std::size_t>(n > 0 ? n : 0));
    for (double& j : spec.couplings)
        j = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // uniform on [0,1)
    validate_spec(spec);
    return spec;
}

EnergyExtremes classical_extremes(const ChainSpec& spec) {
    validate_spec(spec);
    if (spec.h_target != 0.0)
        throw std::invalid_argument("classical_extremes: only h_target = 0 is supported");
    // Even ring: all bonds satisfied (aligned) or all violated (alternating).
    const double sum = spec.coupling_sum();
    return {-sum, +sum};
}

double residual_energy_density(double e_p, const EnergyExtremes& ext) {
    constexpr double slack = 1e-9;
    if (!(e_p >= ext.e_min - slack && e_p <= ext.e_max + slack))
        throw std::runtime_error("residual_energy_density: energy outside spectrum range");
    return (e_p - ext.e_min) / (ext.e_max - ext.e_min);
}

double qaoa_bound(int p, int n) {
    if (2 * p < n) return 1.0 / (2.0 * p + 2.0);
    return 0.0;
}

std::vector<double> schedule_to_s(const Schedule& sched) {
    validate_schedule(sched);
    std::vector<double> s(sched.gammas.size());
    for (std::size_t t = 0; t < s.size(); ++t) {
        const double denom = sched.gammas[t] + sched.betas[t];
        if (denom == 0.0)
            throw std::invalid_argument("schedule_to_s: gamma_t + beta_t = 0");
        s[t] = sched.gammas[t] / denom;
    }
    return s;
}

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void require_keys(const nlohmann::json& j, const std::set<std::string>& keys,
                  const std::string& what) {
    if (!j.is_object()) throw std::invalid_argument(what + ": expected a JSON object");
    for (const auto& item : j.items())
        if (!keys.count(item.key()))
            throw std::invalid_argument(what + ": unexpected key '" + item.key() + "'");
    for (const auto& k : keys)
        if (!j.contains(k)) throw std::invalid_argument(what + ": missing key '" + k + "'");
}

}  // namespace

void save_instance(const ChainSpec& spec, const std::string& path) {
    validate_spec(spec);
    nlohmann::json j;
    j["n"] = spec.n_sites;
    j["h"] = spec.h_target;
    if (spec.seed)
        j["seed"] = *spec.seed;
    else
        j["seed"] = nullptr;
    j["couplings"] = spec.couplings;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

ChainSpec load_instance(const std::string& path) {
    const auto j = load_json_file(path);
    require_keys(j, {"n", "h", "seed", "couplings"}, "instance file");
    ChainSpec spec;
    spec.n_sites = j.at("n").get<int>();
    spec.h_target = j.at("h").get<double>();
    if (!j.at("seed").is_null()) spec.seed = j.at("seed").get<std::uint64_t>();
    spec.couplings = j.at("couplings").get<std::vector<double>>();
    validate_spec(spec);
    return spec;
}

void save_schedule(const Schedule& sched, const std::string& path) {
    validate_schedule(sched);
    nlohmann::json j;
    j["p"] = sched.depth();
    j["gammas"] = sched.gammas;
    j["betas"] = sched.betas;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

Schedule load_schedule(const std::string& path) {
    const auto j = load_json_file(path);
    require_keys(j, {"p", "gammas", "betas"}, "schedule file");
    Schedule sched;
    sched.gammas = j.at("gammas").get<std::vector<double>>();
    sched.betas = j.at("betas").get<std::vector<double>>();
    if (j.at("p").get<int>() != sched.depth())
        throw std::invalid_argument("schedule file: p does not match array lengths");
    validate_schedule(sched);
    return sched;
}

}  // namespace qaoa
