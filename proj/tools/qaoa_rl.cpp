// Experiment surface: instance generation, training, testing, transfer,
// sweeps and smooth-schedule baselines. All tabular output is CSV, structured
// artifacts are JSON, and every command appends a manifest record.
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qaoa/chain.hpp"
#include "qaoa/env.hpp"
#include "qaoa/neural.hpp"
#include "qaoa/ppo.hpp"
#include "qaoa/schedule_opt.hpp"

using json = nlohmann::json;
using namespace qaoa;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct GlobalOptions {
    int threads = 1;
    std::string manifest_path = "qaoa_manifest.jsonl";
};

void append_manifest(const GlobalOptions& global, const std::string& command,
                     const json& config, const std::vector<std::string>& outputs) {
    json entry;
    entry["command"] = command;
    entry["config"] = config;
    entry["outputs"] = outputs;
    entry["version"] = "1";
    entry["timestamp"] = static_cast<long>(std::time(nullptr));
    std::ofstream out(global.manifest_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open manifest " + global.manifest_path);
    out << entry.dump() << "\n";
}

Backend resolve_backend(const std::string& name, const ChainSpec& spec) {
    if (name == "oracle") return Backend::oracle;
    if (name == "fermion") return Backend::fermion;
    if (name == "auto") return spec.n_sites <= 14 ? Backend::oracle : Backend::fermion;
    throw std::invalid_argument("unknown backend '" + name + "'");
}

// Config file support: a JSON object whose keys are long option names for the
// chosen subcommand. Values from the file are injected right after the
// subcommand token so explicit command-line flags (parsed later) win.
std::vector<std::string> inject_config(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--config") config_path = args[i + 1];
    for (const auto& a : args)
        if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("cannot open config file " + config_path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw std::invalid_argument("config file " + config_path + ": " + e.what());
    }
    if (!cfg.is_object()) throw std::invalid_argument("config file must hold a JSON object");

    std::vector<std::string> out;
    out.push_back(args.empty() ? "" : args[0]);  // subcommand name
    for (const auto& [key, value] : cfg.items()) {
        // an explicit command-line flag overrides the file entirely
        bool overridden = false;
        for (std::size_t i = 1; i < args.size(); ++i)
            if (args[i] == "--" + key || args[i].rfind("--" + key + "=", 0) == 0)
                overridden = true;
        if (overridden) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back("--" + key);
        } else if (value.is_string()) {
            out.push_back("--" + key + "=" + value.get<std::string>());
        } else {
            out.push_back("--" + key + "=" + value.dump());
        }
    }
    for (std::size_t i = 1; i < args.size(); ++i) out.push_back(args[i]);
    return out;
}

std::string schedule_file_name(const std::string& out_csv, int run_id, bool refined) {
    std::string base = out_csv;
    const std::size_t dot = base.rfind(".csv");
    if (dot != std::string::npos) base = base.substr(0, dot);
    return base + "_run" + std::to_string(run_id) + (refined ? "_refined" : "") + ".json";
}

struct EvalOutput {
    std::vector<ResultRecord> records;
    std::vector<OptimizeReport> refinements;  // empty unless localopt
};

EvalOutput run_evaluation(const PolicyCheckpoint& ckpt, const ChainSpec& spec, Backend backend,
                          int runs, bool deterministic, bool localopt, std::uint64_t seed) {
    EpisodeConfig env_cfg;
    env_cfg.p_steps = ckpt.meta.at("p").get<int>();
    env_cfg.backend = backend;
    env_cfg.bare_observation = (ckpt.obs_mode == "bare");
    EvalOutput out;
    out.records = evaluate(ckpt, spec, runs, deterministic, env_cfg, seed);
    if (localopt) out.refinements = refine(out.records, spec, backend);
    return out;
}

void write_results_csv(const std::string& path, const EvalOutput& eval, const ChainSpec& spec,
                       std::uint64_t seed, std::vector<std::string>& outputs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "run_id,p,n,seed,eps,eps_refined,e_p,reward,schedule_path\n";
    for (std::size_t i = 0; i < eval.records.size(); ++i) {
        const ResultRecord& rec = eval.records[i];
        const bool refined = !eval.refinements.empty();
        const double eps_refined = refined ? eval.refinements[i].eps_final : rec.eps;
        const std::string sched_path = schedule_file_name(path, rec.run_id, false);
        save_schedule(rec.schedule, sched_path);
        outputs.push_back(sched_path);
        if (refined) {
            const std::string ref_path = schedule_file_name(path, rec.run_id, true);
            save_schedule(eval.refinements[i].final_schedule, ref_path);
            outputs.push_back(ref_path);
        }
        out << rec.run_id << ',' << rec.schedule.depth() << ',' << spec.n_sites << ','
            << seed << ',' << fmt(rec.eps) << ',' << fmt(eps_refined) << ','
            << fmt(rec.e_p) << ',' << fmt(rec.reward) << ',' << sched_path << "\n";
    }
    outputs.push_back(path);
}

void write_trace_jsonl(const std::string& path, const EvalOutput& eval,
                       std::vector<std::string>& outputs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (const ResultRecord& rec : eval.records) {
        for (const StepRecord& step : rec.trace) {
            json line;
            line["run"] = rec.run_id;
            line["t"] = step.t;
            line["gamma"] = step.action.gamma;
            line["beta"] = step.action.beta;
            line["obs"] = {step.obs.hz_density, step.obs.hx_density};
            line["reward"] = step.reward;
            out << line.dump() << "\n";
        }
    }
    outputs.push_back(path);
}

// ---- subcommands ----

int cmd_instance(const GlobalOptions& global, int n, std::optional<std::uint64_t> seed,
                 bool uniform, double j, double h, const std::string& out_path) {
    ChainSpec spec;
    if (uniform) {
        spec = make_uniform(n, j, h);
    } else {
        if (!seed) throw std::invalid_argument("disordered instance requires --seed");
        spec = make_disordered(n, h, *seed);
    }
    save_instance(spec, out_path);
    json cfg{{"n", n}, {"uniform", uniform}, {"j", j}, {"h", h}, {"out", out_path}};
    if (seed) cfg["seed"] = *seed;
    append_manifest(global, "instance", cfg, {out_path});
    return 0;
}

int cmd_train(const GlobalOptions& global, const std::string& instance_path, int p, int epochs,
              int episodes, std::uint64_t seed, const std::string& backend_name, bool bare_obs,
              const std::string& out_ckpt, const std::string& out_log) {
    const ChainSpec spec = load_instance(instance_path);
    const Backend backend = resolve_backend(backend_name, spec);
    if (backend == Backend::oracle && spec.n_sites > kOracleMaxSites)
        throw std::invalid_argument("oracle backend limited to N <= " +
                                    std::to_string(kOracleMaxSites));

    TrainConfig cfg;
    cfg.n_epochs = epochs;
    cfg.n_episodes_per_epoch = episodes;
    cfg.p_steps = p;
    cfg.master_seed = seed;

    EpisodeConfig env_cfg;
    env_cfg.p_steps = p;
    env_cfg.backend = backend;
    env_cfg.reward_mode = RewardMode::normalized;
    env_cfg.bare_observation = bare_obs;

    std::ofstream log(out_log);
    if (!log) throw std::runtime_error("cannot open " + out_log);
    log << "epoch,mean_reward,mean_eps,kl,clip_frac,policy_loss,value_loss\n";

    const TrainResult result = train(spec, cfg, env_cfg);
    for (const EpochLog& e : result.log)
        log << e.epoch << ',' << fmt(e.mean_reward) << ',' << fmt(e.mean_eps) << ','
            << fmt(e.kl) << ',' << fmt(e.clip_frac) << ',' << fmt(e.policy_loss) << ','
            << fmt(e.value_loss) << "\n";
    save_checkpoint(result.checkpoint, out_ckpt);

    json cfg_json{{"instance", instance_path}, {"p", p},       {"epochs", epochs},
                  {"episodes", episodes},      {"seed", seed}, {"backend", backend_name},
                  {"bare-obs", bare_obs},      {"out-ckpt", out_ckpt}, {"out-log", out_log}};
    append_manifest(global, "train", cfg_json, {out_ckpt, out_log});
    return 0;
}

int cmd_test(const GlobalOptions& global, const std::string& ckpt_path,
             const std::string& instance_path, int runs, bool deterministic, bool localopt,
             std::uint64_t seed, const std::string& backend_name, const std::string& out_csv,
             const std::string& trace_path) {
    const PolicyCheckpoint ckpt = load_checkpoint(ckpt_path);
    const ChainSpec spec = load_instance(instance_path);
    const Backend backend = resolve_backend(backend_name, spec);
    const EvalOutput eval =
        run_evaluation(ckpt, spec, backend, runs, deterministic, localopt, seed);

    std::vector<std::string> outputs;
    write_results_csv(out_csv, eval, spec, seed, outputs);
    if (!trace_path.empty()) write_trace_jsonl(trace_path, eval, outputs);

    json cfg{{"ckpt", ckpt_path},   {"instance", instance_path}, {"runs", runs},
             {"deterministic", deterministic}, {"localopt", localopt}, {"seed", seed},
             {"backend", backend_name}, {"out", out_csv}};
    append_manifest(global, "test", cfg, outputs);
    return 0;
}

int cmd_transfer(const GlobalOptions& global, const std::string& ckpt_path,
                 const std::string& instance_path, int runs, bool localopt, std::uint64_t seed,
                 const std::string& backend_name, const std::string& out_csv) {
    const PolicyCheckpoint ckpt = load_checkpoint(ckpt_path);
    if (ckpt.obs_mode != "intensive")
        throw std::invalid_argument(
            "transfer requires an intensive-observation checkpoint; this one was trained on "
            "bare observations, which do not generalize across chain sizes");
    const ChainSpec spec = load_instance(instance_path);
    const Backend backend = resolve_backend(backend_name, spec);
    const EvalOutput eval = run_evaluation(ckpt, spec, backend, runs, false, localopt, seed);

    std::vector<std::string> outputs;
    write_results_csv(out_csv, eval, spec, seed, outputs);

    json cfg{{"ckpt", ckpt_path}, {"instance", instance_path}, {"runs", runs},
             {"localopt", localopt}, {"seed", seed}, {"backend", backend_name},
             {"out", out_csv}};
    append_manifest(global, "transfer", cfg, outputs);
    return 0;
}

int cmd_sweep(const GlobalOptions& global, const std::string& instance_path,
              const std::vector<int>& p_list, const std::vector<std::uint64_t>& seeds,
              int epochs, int episodes, int runs, bool localopt,
              const std::string& backend_name, const std::string& out_csv) {
    const ChainSpec spec = load_instance(instance_path);
    const Backend backend = resolve_backend(backend_name, spec);

    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error("cannot open " + out_csv);
    out << "p,seed,runs,mean_eps,std_eps,mean_eps_refined,bound\n";
    for (int p : p_list) {
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg;
            cfg.n_epochs = epochs;
            cfg.n_episodes_per_epoch = episodes;
            cfg.p_steps = p;
            cfg.master_seed = seed;
            EpisodeConfig env_cfg;
            env_cfg.p_steps = p;
            env_cfg.backend = backend;
            env_cfg.reward_mode = RewardMode::normalized;

            const TrainResult trained = train(spec, cfg, env_cfg);
            const EvalOutput eval =
                run_evaluation(trained.checkpoint, spec, backend, runs, false, localopt, seed);

            double mean = 0.0;
            double mean_ref = 0.0;
            for (std::size_t i = 0; i < eval.records.size(); ++i) {
                mean += eval.records[i].eps;
                mean_ref += localopt ? eval.refinements[i].eps_final : eval.records[i].eps;
            }
            mean /= runs;
            mean_ref /= runs;
            double var = 0.0;
            for (const auto& rec : eval.records) var += (rec.eps - mean) * (rec.eps - mean);
            const double sigma = runs > 1 ? std::sqrt(var / (runs - 1)) : 0.0;

            out << p << ',' << seed << ',' << runs << ',' << fmt(mean) << ',' << fmt(sigma)
                << ',' << fmt(mean_ref) << ',' << fmt(qaoa_bound(p, spec.n_sites)) << "\n";
        }
    }

    json cfg{{"instance", instance_path}, {"epochs", epochs}, {"episodes", episodes},
             {"runs", runs}, {"localopt", localopt}, {"backend", backend_name},
             {"out", out_csv}};
    append_manifest(global, "sweep", cfg, {out_csv});
    return 0;
}

int cmd_baseline(const GlobalOptions& global, const std::string& instance_path, int p_max,
                 const std::string& backend_name, const std::string& out_csv) {
    const ChainSpec spec = load_instance(instance_path);
    const Backend backend = resolve_backend(backend_name, spec);
    const auto entries = iterative_baseline(spec, p_max, backend);

    std::ofstream out(out_csv);
    if (!out) throw std::runtime_error("cannot open " + out_csv);
    out << "p,t,gamma,beta,s,eps,bound\n";
    for (const auto& entry : entries) {
        const auto s = schedule_to_s(entry.schedule);
        for (int t = 0; t < entry.p; ++t)
            out << entry.p << ',' << t + 1 << ',' << fmt(entry.schedule.gammas[t]) << ','
                << fmt(entry.schedule.betas[t]) << ',' << fmt(s[t]) << ','
                << fmt(entry.eps) << ',' << fmt(qaoa_bound(entry.p, spec.n_sites)) << "\n";
    }

    json cfg{{"instance", instance_path}, {"p-max", p_max}, {"backend", backend_name},
             {"out", out_csv}};
    append_manifest(global, "baseline", cfg, {out_csv});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"QAOA schedule optimization workbench"};
    app.require_subcommand(1);

    GlobalOptions global;
    if (const char* env_threads = std::getenv("QAOA_RL_THREADS"))
        global.threads = std::max(1, std::atoi(env_threads));
    app.add_option("--threads", global.threads, "worker thread budget");
    app.add_option("--manifest", global.manifest_path, "manifest file (JSON lines, appended)");

    std::string config_path;

    // instance
    auto* inst = app.add_subcommand("instance", "generate and save a chain instance");
    int inst_n = 8;
    std::uint64_t inst_seed = 0;
    bool inst_has_seed = false;
    bool inst_uniform = false;
    double inst_j = 1.0;
    double inst_h = 0.0;
    std::string inst_out = "instance.json";
    inst->add_option("--config", config_path, "JSON config file");
    inst->add_option("--n", inst_n, "number of sites (even)");
    inst->add_option("--seed", inst_seed, "disorder seed")->each([&](const std::string&) {
        inst_has_seed = true;
    });
    inst->add_flag("--uniform", inst_uniform, "uniform couplings, bypasses the RNG");
    inst->add_option("--j", inst_j, "uniform coupling strength");
    inst->add_option("--field", inst_h, "target transverse field (bookkeeping only)");
    inst->add_option("--out", inst_out, "output instance file");

    // train
    auto* tr = app.add_subcommand("train", "train a policy on one instance");
    std::string tr_instance, tr_ckpt = "policy.json", tr_log = "train_log.csv";
    std::string tr_backend = "auto";
    int tr_p = 1, tr_epochs = 1024, tr_episodes = 100;
    std::uint64_t tr_seed = 0;
    bool tr_bare = false;
    tr->add_option("--config", config_path, "JSON config file");
    tr->add_option("--instance", tr_instance, "instance file")->required();
    tr->add_option("--p", tr_p, "circuit depth");
    tr->add_option("--epochs", tr_epochs, "training epochs");
    tr->add_option("--episodes", tr_episodes, "episodes per epoch");
    tr->add_option("--seed", tr_seed, "master seed");
    tr->add_option("--backend", tr_backend, "oracle | fermion | auto");
    tr->add_flag("--bare-obs", tr_bare, "skip intensive observation normalization");
    tr->add_option("--out-ckpt", tr_ckpt, "checkpoint output");
    tr->add_option("--out-log", tr_log, "training log CSV output");

    // test
    auto* te = app.add_subcommand("test", "evaluate a checkpoint");
    std::string te_ckpt, te_instance, te_out = "results.csv", te_trace, te_backend = "auto";
    int te_runs = 50;
    bool te_det = false, te_lo = false;
    std::uint64_t te_seed = 0;
    te->add_option("--config", config_path, "JSON config file");
    te->add_option("--ckpt", te_ckpt, "checkpoint file")->required();
    te->add_option("--instance", te_instance, "instance file")->required();
    te->add_option("--runs", te_runs, "number of test runs");
    te->add_flag("--deterministic", te_det, "use the policy mean instead of sampling");
    te->add_flag("--localopt", te_lo, "refine every schedule with local optimization");
    te->add_option("--seed", te_seed, "evaluation seed");
    te->add_option("--backend", te_backend, "oracle | fermion | auto");
    te->add_option("--out", te_out, "results CSV output");
    te->add_option("--trace-out", te_trace, "episode trace JSONL output");

    // transfer
    auto* tf = app.add_subcommand("transfer", "evaluate a small-chain policy on a larger chain");
    std::string tf_ckpt, tf_instance, tf_out = "transfer.csv", tf_backend = "auto";
    int tf_runs = 10;
    bool tf_lo = false;
    std::uint64_t tf_seed = 0;
    tf->add_option("--config", config_path, "JSON config file");
    tf->add_option("--ckpt", tf_ckpt, "checkpoint file")->required();
    tf->add_option("--instance", tf_instance, "target instance file")->required();
    tf->add_option("--runs", tf_runs, "number of runs");
    tf->add_flag("--localopt", tf_lo, "refine every schedule with local optimization");
    tf->add_option("--seed", tf_seed, "evaluation seed");
    tf->add_option("--backend", tf_backend, "oracle | fermion | auto");
    tf->add_option("--out", tf_out, "results CSV output");

    // sweep
    auto* sw = app.add_subcommand("sweep", "train and test across depths and seeds");
    std::string sw_instance, sw_out = "sweep.csv", sw_backend = "auto";
    std::vector<int> sw_p{1};
    std::vector<std::uint64_t> sw_seeds{0};
    int sw_epochs = 1024, sw_episodes = 100, sw_runs = 50;
    bool sw_lo = false;
    sw->add_option("--config", config_path, "JSON config file");
    sw->add_option("--instance", sw_instance, "instance file")->required();
    sw->add_option("--p-list", sw_p, "depths to sweep")->delimiter(',');
    sw->add_option("--seeds", sw_seeds, "master seeds")->delimiter(',');
    sw->add_option("--epochs", sw_epochs, "training epochs");
    sw->add_option("--episodes", sw_episodes, "episodes per epoch");
    sw->add_option("--runs", sw_runs, "test runs per (p, seed)");
    sw->add_flag("--localopt", sw_lo, "refine test schedules");
    sw->add_option("--backend", sw_backend, "oracle | fermion | auto");
    sw->add_option("--out", sw_out, "sweep CSV output");

    // baseline
    auto* bl = app.add_subcommand("baseline", "iterative smooth-schedule baseline");
    std::string bl_instance, bl_out = "baseline.csv", bl_backend = "auto";
    int bl_pmax = 8;
    bl->add_option("--config", config_path, "JSON config file");
    bl->add_option("--instance", bl_instance, "instance file")->required();
    bl->add_option("--p-max", bl_pmax, "maximum depth");
    bl->add_option("--backend", bl_backend, "oracle | fermion | auto");
    bl->add_option("--out", bl_out, "baseline CSV output");

    try {
        // pre-scan for --config and splice file-provided options in before the
        // explicit ones, so the command line keeps the last word
        std::vector<std::string> args(argv + 1, argv + argc);
        if (!args.empty()) args = inject_config(args);
        // CLI11's vector overload consumes arguments in reverse order
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"error", e.what()}, {"code", 2}}.dump() << "\n";
        return 2;
    }

    try {
        if (inst->parsed())
            return cmd_instance(global, inst_n,
                                inst_has_seed ? std::optional<std::uint64_t>(inst_seed)
                                              : std::nullopt,
                                inst_uniform, inst_j, inst_h, inst_out);
        if (tr->parsed())
            return cmd_train(global, tr_instance, tr_p, tr_epochs, tr_episodes, tr_seed,
                             tr_backend, tr_bare, tr_ckpt, tr_log);
        if (te->parsed())
            return cmd_test(global, te_ckpt, te_instance, te_runs, te_det, te_lo, te_seed,
                            te_backend, te_out, te_trace);
        if (tf->parsed())
            return cmd_transfer(global, tf_ckpt, tf_instance, tf_runs, tf_lo, tf_seed,
                                tf_backend, tf_out);
        if (sw->parsed())
            return cmd_sweep(global, sw_instance, sw_p, sw_seeds, sw_epochs, sw_episodes,
                             sw_runs, sw_lo, sw_backend, sw_out);
        if (bl->parsed())
            return cmd_baseline(global, bl_instance, bl_pmax, bl_backend, bl_out);
        std::cerr << json{{"error", "no subcommand"}, {"code", 2}}.dump() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", e.what()}, {"code", 2}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"code", 3}}.dump() << "\n";
        return 3;
    }
}
