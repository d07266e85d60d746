#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <unistd.h>
#include <sstream>
#include <string>
#include <sys/stat.h>
#include <sys/wait.h>

namespace {

std::string g_binary;
std::string g_dir = "/tmp/qaoa_cli_test";

int run(const std::string& args) {
    const std::string cmd = g_binary + " " + args + " >> " + g_dir + "/stdout.txt 2>> " +
                            g_dir + "/stderr.txt";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

std::string path(const std::string& name) { return g_dir + "/" + name; }

// column extraction from a CSV body, headers excluded
std::vector<std::string> column(const std::string& csv, int col) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string field;
        for (int i = 0; i <= col; ++i) std::getline(ls, field, ',');
        out.push_back(field);
    }
    return out;
}

}  // namespace

TEST_CASE("instance generation") {
    REQUIRE(run("instance --n 8 --seed 5 --out " + path("inst_a.json")) == 0);
    REQUIRE(run("instance --n 8 --seed 5 --out " + path("inst_b.json")) == 0);
    CHECK(slurp(path("inst_a.json")) == slurp(path("inst_b.json")));

    REQUIRE(run("instance --n 8 --uniform --j 1.0 --out " + path("uniform8.json")) == 0);
    const std::string uniform = slurp(path("uniform8.json"));
    CHECK(uniform.find("\"seed\": null") != std::string::npos);

    CHECK(run("instance --n 7 --seed 1 --out " + path("odd.json")) == 2);
    CHECK(run("instance --n 8 --out " + path("noseed.json")) == 2);  // disordered needs a seed
}

TEST_CASE("training is deterministic and logs the documented schema") {
    const std::string base = "train --instance " + path("inst_a.json") +
                             " --p 2 --epochs 3 --episodes 5 --seed 9";
    REQUIRE(run(base + " --out-ckpt " + path("ck_a.json") + " --out-log " + path("log_a.csv")) ==
            0);
    REQUIRE(run(base + " --out-ckpt " + path("ck_b.json") + " --out-log " + path("log_b.csv")) ==
            0);
    const std::string log_a = slurp(path("log_a.csv"));
    CHECK(log_a == slurp(path("log_b.csv")));
    CHECK(slurp(path("ck_a.json")) == slurp(path("ck_b.json")));
    CHECK(log_a.rfind("epoch,mean_reward,mean_eps,kl,clip_frac,policy_loss,value_loss\n", 0) ==
          0);
    CHECK(count_lines(log_a) == 4);  // header + 3 epochs

    // a different seed changes the log
    REQUIRE(run("train --instance " + path("inst_a.json") +
                " --p 2 --epochs 3 --episodes 5 --seed 10 --out-ckpt " + path("ck_c.json") +
                " --out-log " + path("log_c.csv")) == 0);
    CHECK(log_a != slurp(path("log_c.csv")));
}

TEST_CASE("training validation failures exit with code 2") {
    CHECK(run("train --instance " + path("missing.json") + " --p 1 --epochs 1 --episodes 2") ==
          2);
    // oracle backend on a chain beyond the amplitude limit
    REQUIRE(run("instance --n 24 --seed 3 --out " + path("inst24.json")) == 0);
    CHECK(run("train --instance " + path("inst24.json") +
              " --p 1 --epochs 1 --episodes 2 --backend oracle --out-ckpt " +
              path("ck24.json") + " --out-log " + path("log24.csv")) == 2);
    const std::string err = slurp(path("stderr.txt"));
    CHECK(err.find("\"code\":2") != std::string::npos);
}

TEST_CASE("config file supplies flags but the command line wins") {
    {
        std::ofstream cfg(path("cfg.json"));
        cfg << R"({"p": 2, "epochs": 2, "episodes": 4, "seed": 9})";
    }
    REQUIRE(run("train --instance " + path("inst_a.json") + " --config " + path("cfg.json") +
                " --out-ckpt " + path("ck_cfg.json") + " --out-log " + path("log_cfg.csv")) ==
            0);
    CHECK(count_lines(slurp(path("log_cfg.csv"))) == 3);  // header + 2 epochs from config

    REQUIRE(run("train --instance " + path("inst_a.json") + " --config " + path("cfg.json") +
                " --epochs 1 --out-ckpt " + path("ck_cfg2.json") + " --out-log " +
                path("log_cfg2.csv")) == 0);
    CHECK(count_lines(slurp(path("log_cfg2.csv"))) == 2);  // command line overrode epochs
}

TEST_CASE("testing a checkpoint") {
    const std::string base = "test --ckpt " + path("ck_a.json") + " --instance " +
                             path("inst_a.json") + " --runs 4 --seed 3";
    REQUIRE(run(base + " --deterministic --out " + path("res_det.csv")) == 0);
    const std::string det = slurp(path("res_det.csv"));
    CHECK(det.rfind("run_id,p,n,seed,eps,eps_refined,e_p,reward,schedule_path\n", 0) == 0);
    CHECK(count_lines(det) == 5);

    // deterministic mode: all runs report the identical energy
    const auto eps = column(det, 4);
    for (const auto& e : eps) CHECK(e == eps[0]);

    // schedule files exist and round-trip through the documented keys
    const auto paths = column(det, 8);
    REQUIRE(!paths.empty());
    const std::string sched = slurp(paths[0]);
    CHECK(sched.find("\"gammas\"") != std::string::npos);
    CHECK(sched.find("\"p\"") != std::string::npos);

    // stochastic mode is seeded-reproducible
    REQUIRE(run(base + " --out " + path("res_s1.csv")) == 0);
    REQUIRE(run(base + " --out " + path("res_s2.csv")) == 0);
    CHECK(column(slurp(path("res_s1.csv")), 4) == column(slurp(path("res_s2.csv")), 4));

    // local optimization never loses ground
    REQUIRE(run(base + " --localopt --out " + path("res_lo.csv")) == 0);
    const std::string lo = slurp(path("res_lo.csv"));
    const auto raw = column(lo, 4);
    const auto refined = column(lo, 5);
    for (std::size_t i = 0; i < raw.size(); ++i)
        CHECK(std::stod(refined[i]) <= std::stod(raw[i]) + 1e-12);
}

TEST_CASE("episode traces") {
    REQUIRE(run("test --ckpt " + path("ck_a.json") + " --instance " + path("inst_a.json") +
                " --runs 2 --deterministic --out " + path("res_tr.csv") + " --trace-out " +
                path("trace.jsonl")) == 0);
    const std::string trace = slurp(path("trace.jsonl"));
    CHECK(count_lines(trace) == 4);  // 2 runs x P = 2 steps
    CHECK(trace.find("\"gamma\"") != std::string::npos);
    CHECK(trace.find("\"obs\"") != std::string::npos);
    CHECK(trace.find("\"reward\"") != std::string::npos);
}

TEST_CASE("transfer applies a small-chain policy to a bigger chain") {
    REQUIRE(run("instance --n 32 --seed 44 --out " + path("inst32.json")) == 0);
    REQUIRE(run("transfer --ckpt " + path("ck_a.json") + " --instance " + path("inst32.json") +
                " --runs 2 --seed 1 --out " + path("transfer.csv")) == 0);
    const std::string tf = slurp(path("transfer.csv"));
    CHECK(count_lines(tf) == 3);
    CHECK(column(tf, 2)[0] == "32");  // evaluated on the large instance
    CHECK(column(tf, 1)[0] == "2");   // schedule length equals checkpoint P

    // bare-observation checkpoints cannot transfer
    REQUIRE(run("train --instance " + path("inst_a.json") +
                " --p 1 --epochs 1 --episodes 2 --seed 0 --bare-obs --out-ckpt " +
                path("ck_bare.json") + " --out-log " + path("log_bare.csv")) == 0);
    CHECK(run("transfer --ckpt " + path("ck_bare.json") + " --instance " + path("inst32.json") +
              " --runs 1 --out " + path("transfer_bare.csv")) == 2);
}

TEST_CASE("baseline command") {
    REQUIRE(run("baseline --instance " + path("uniform8.json") + " --p-max 2 --out " +
                path("base_a.csv")) == 0);
    REQUIRE(run("baseline --instance " + path("uniform8.json") + " --p-max 2 --out " +
                path("base_b.csv")) == 0);
    const std::string base = slurp(path("base_a.csv"));
    CHECK(base == slurp(path("base_b.csv")));  // deterministic given the instance
    CHECK(base.rfind("p,t,gamma,beta,s,eps,bound\n", 0) == 0);
    CHECK(count_lines(base) == 4);  // header + 1 row (p=1) + 2 rows (p=2)
    for (const auto& s : column(base, 4)) {
        CHECK(std::stod(s) > 0.0);
        CHECK(std::stod(s) < 1.0);
    }
    // bound column is 1/(2P+2)
    CHECK(std::stod(column(base, 6)[0]) == doctest::Approx(0.25));
}

TEST_CASE("sweep command") {
    REQUIRE(run("sweep --instance " + path("uniform8.json") +
                " --p-list 1,2 --seeds 0 --epochs 2 --episodes 4 --runs 4 --out " +
                path("sweep.csv")) == 0);
    const std::string sweep = slurp(path("sweep.csv"));
    CHECK(sweep.rfind("p,seed,runs,mean_eps,std_eps,mean_eps_refined,bound\n", 0) == 0);
    CHECK(count_lines(sweep) == 3);
    CHECK(std::stod(column(sweep, 6)[0]) == doctest::Approx(0.25));
    CHECK(std::stod(column(sweep, 6)[1]) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("manifest is appended for every command") {
    const std::string manifest = slurp("qaoa_manifest.jsonl");
    CHECK(count_lines(manifest) >= 10);
    CHECK(manifest.find("\"command\":\"instance\"") != std::string::npos);
    CHECK(manifest.find("\"command\":\"train\"") != std::string::npos);
    CHECK(manifest.find("\"command\":\"test\"") != std::string::npos);
}

TEST_CASE("bad invocations") {
    CHECK(run("frobnicate") != 0);
    CHECK(run("test --instance " + path("inst_a.json")) != 0);  // required --ckpt missing
}

int cli_main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <qaoa_rl binary> [doctest args]\n");
        return 1;
    }
    g_binary = argv[1];
    ::mkdir(g_dir.c_str(), 0755);
    if (chdir(g_dir.c_str()) != 0) return 1;
    std::remove("qaoa_manifest.jsonl");

    doctest::Context context;
    context.applyCommandLine(argc - 1, argv + 1);
    return context.run();
}

int main(int argc, char** argv) { return cli_main(argc, argv); }
