#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <doctest.h>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>

using nlohmann::json;

namespace {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

const char* cli_path() {
    const char* p = std::getenv("MIXVB_CLI");
    REQUIRE_MESSAGE(p != nullptr, "MIXVB_CLI must point at the CLI binary");
    return p;
}

CliRun run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const std::string tag = "/tmp/mixvb_cli_t" + std::to_string(counter++);
    const std::string out_path = tag + ".out";
    const std::string err_path = tag + ".err";
    const std::string command = (env.empty() ? "" : env + " ") + std::string(cli_path()) +
                                " " + args + " >" + out_path + " 2>" + err_path;
    const int status = std::system(command.c_str());
    CliRun run;
    run.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    run.out = slurp(out_path);
    run.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return run;
}

}  // namespace

TEST_CASE("cli: help exits zero and lists the subcommands") {
    const CliRun run = run_cli("--help");
    CHECK(run.exit_code == 0);
    for (const char* sub : {"fit", "select", "simulate", "bench", "rates", "divergence"}) {
        CHECK(run.out.find(sub) != std::string::npos);
    }
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("transmogrify").exit_code == 2);
}

TEST_CASE("cli: fitting a zero-byte dataset lands on the prior") {
    const std::string data = "/tmp/mixvb_cli_empty.csv";
    spit(data, "");
    const CliRun run = run_cli("fit --data " + data + " --k 2");
    REQUIRE(run.exit_code == 0);
    const json doc = json::parse(run.out);
    CHECK(doc.at("surrogate_elbo") == 0.0);
    CHECK(doc.at("converged") == true);
    CHECK(doc.at("state").at("weight_factor").size() == 2);
    std::remove(data.c_str());
}

TEST_CASE("cli: malformed dataset exits 2 and names the line") {
    const std::string data = "/tmp/mixvb_cli_bad.csv";
    spit(data, "kind=categorical,V=5\n1\n7\n");
    const CliRun run = run_cli("fit --data " + data + " --k 2 --family multinomial "
                               "--categories 5");
    CHECK(run.exit_code == 2);
    CHECK(run.err.find("line 3") != std::string::npos);
    std::remove(data.c_str());

    const CliRun missing = run_cli("fit --data /tmp/mixvb_cli_no_such_file.csv --k 2");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("cli: single-component fit reports the conjugate posterior") {
    const std::string data = "/tmp/mixvb_cli_conj.csv";
    spit(data, "kind=real\n1\n2\n3\n");
    const CliRun run = run_cli("fit --data " + data +
                               " --k 1 --family gauss-nig --prior-v2 1 --prior-gamma2 1");
    REQUIRE(run.exit_code == 0);
    const json doc = json::parse(run.out);
    const json factor = doc.at("state").at("component_factors").at(0);
    CHECK(factor.at("type") == "nig");
    CHECK(std::abs(factor.at("location").get<double>() - 1.5) < 1e-9);
    CHECK(std::abs(factor.at("precision_scale").get<double>() - 4.0) < 1e-9);
    CHECK(std::abs(factor.at("shape").get<double>() - 2.5) < 1e-9);
    CHECK(std::abs(factor.at("scale").get<double>() - 3.5) < 1e-9);
    std::remove(data.c_str());
}

TEST_CASE("cli: identical invocations produce byte-identical output") {
    const std::string model = "/tmp/mixvb_cli_model.json";
    spit(model, json{{"family", {{"type", "gauss_known"}, {"component_variance", 1.0}}},
                     {"weights", {0.5, 0.5}},
                     {"components", {-4.0, 4.0}}}
                    .dump());
    const std::string data = "/tmp/mixvb_cli_det.csv";
    CHECK(run_cli("simulate --model " + model + " -n 80 --seed 3 --output " + data)
              .exit_code == 0);

    const std::string fit_args =
        "fit --data " + data + " --k 2 --prior-v2 100 --init points --restarts 3 --seed 5";
    const CliRun a = run_cli(fit_args);
    const CliRun b = run_cli(fit_args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);

    // MIX_SEED overrides --seed; a different seed changes the restarts' draws.
    const CliRun c = run_cli("fit --data " + data +
                                 " --k 2 --prior-v2 100 --init random --restarts 3 --seed 0",
                             "MIX_SEED=5");
    const CliRun d = run_cli("fit --data " + data +
                             " --k 2 --prior-v2 100 --init random --restarts 3 --seed 5");
    REQUIRE(c.exit_code == 0);
    CHECK(c.out == d.out);
    CHECK(run_cli("fit --data " + data + " --k 2", "MIX_SEED=banana").exit_code == 2);

    std::remove(model.c_str());
    std::remove(data.c_str());
}

TEST_CASE("cli: selection arithmetic on precomputed scores") {
    const std::string scores = "/tmp/mixvb_cli_scores.json";
    spit(scores, "[[1, -100.0], [2, -50.0], [3, -49.0]]");
    const CliRun run = run_cli("select --scores-json " + scores + " --model-weights geometric");
    REQUIRE(run.exit_code == 0);
    const json doc = json::parse(run.out);
    CHECK(doc.at("selected_k") == 3);
    REQUIRE(doc.at("entries").size() == 3);
    CHECK(std::abs(doc.at("entries").at(1).at("score").get<double>() -
                   (-51.386294361119891)) < 1e-12);
    CHECK(std::abs(doc.at("entries").at(2).at("score").get<double>() -
                   (-51.079441541679836)) < 1e-12);

    const CliRun uniform =
        run_cli("select --scores-json " + scores + " --model-weights uniform --kmax 3");
    REQUIRE(uniform.exit_code == 0);
    CHECK(json::parse(uniform.out).at("selected_k") == 3);

    CHECK(run_cli("select --kmax 3").exit_code == 2);
    std::remove(scores.c_str());
}

TEST_CASE("cli: end-to-end selection over a small dataset") {
    const std::string model = "/tmp/mixvb_cli_sel_model.json";
    spit(model, json{{"family", {{"type", "gauss_known"}, {"component_variance", 1.0}}},
                     {"weights", {0.5, 0.5}},
                     {"components", {-6.0, 6.0}}}
                    .dump());
    const std::string data = "/tmp/mixvb_cli_sel.csv";
    REQUIRE(run_cli("simulate --model " + model + " -n 120 --seed 7 --output " + data)
                .exit_code == 0);
    const CliRun run = run_cli("select --data " + data +
                               " --kmax 3 --prior-v2 100 --alpha 0.5 --init points "
                               "--restarts 3 --seed 2");
    REQUIRE(run.exit_code == 0);
    const json doc = json::parse(run.out);
    REQUIRE(doc.at("entries").size() == 3);
    CHECK(doc.at("selected_k") == 2);
    for (int k = 1; k <= 3; ++k) {
        CHECK(doc.at("entries").at(k - 1).at("k") == k);
    }
    std::remove(model.c_str());
    std::remove(data.c_str());
}

TEST_CASE("cli: simulate writes typed CSV, empty draw is header-only") {
    const std::string model = "/tmp/mixvb_cli_sim_model.json";
    spit(model, json{{"family", {{"type", "gauss_known"}, {"component_variance", 1.0}}},
                     {"weights", {1.0}},
                     {"components", {0.0}}}
                    .dump());
    const CliRun empty = run_cli("simulate --model " + model + " -n 0");
    CHECK(empty.exit_code == 0);
    CHECK(empty.out == "kind=real\n");

    const CliRun a = run_cli("simulate --model " + model + " -n 5 --seed 11");
    const CliRun b = run_cli("simulate --model " + model + " -n 5 --seed 11");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("kind=real\n", 0) == 0);

    const CliRun bad = run_cli("simulate --model /tmp/mixvb_no_model.json -n 5");
    CHECK(bad.exit_code == 2);
    std::remove(model.c_str());
}

TEST_CASE("cli: rate evaluation with and without the tempering bound") {
    const CliRun plain = run_cli("rates --rate dirichlet --n 1000 --k 2");
    REQUIRE(plain.exit_code == 0);
    const json doc = json::parse(plain.out);
    CHECK(std::abs(doc.at("r_nk").get<double>() - 0.030403609838168329) < 1e-15);
    CHECK(!doc.contains("bound"));

    const CliRun bounded = run_cli("rates --rate dirichlet --n 1000 --k 2 --alpha 0.5");
    REQUIRE(bounded.exit_code == 0);
    const json bdoc = json::parse(bounded.out);
    CHECK(std::abs(bdoc.at("bound").get<double>() - 3.0 * 4.0 * 0.030403609838168329) < 1e-12);

    const CliRun sweep = run_cli("rates --rate dirichlet --n 100 --k 2 --sweep 100,1000");
    REQUIRE(sweep.exit_code == 0);
    CHECK(sweep.out.rfind("n,rate,r_nk", 0) == 0);
    std::size_t lines = 0;
    for (char ch : sweep.out) lines += ch == '\n';
    CHECK(lines == 3);

    const CliRun known = run_cli(
        "rates --rate gauss-known --n 1000 --k 2 --component-variance 1 --prior-v2 1 "
        "--true-means 0,3");
    REQUIRE(known.exit_code == 0);
    CHECK(std::abs(json::parse(known.out).at("r_nk").get<double>() - 0.030403609838168329) <
          1e-15);

    CHECK(run_cli("rates --rate sideways --n 10 --k 2").exit_code == 2);
}

TEST_CASE("cli: bench smoke run with CSV side output") {
    const std::string csv_path = "/tmp/mixvb_cli_bench.csv";
    const CliRun run = run_cli(
        "bench --datasets 2 --samples 50 --k 2 --runs 2 --max-sweeps 50 --seed 3 --csv " +
        csv_path);
    REQUIRE(run.exit_code == 0);
    const json doc = json::parse(run.out);
    CHECK(doc.at("by_lowest_mae").size() == 3);
    CHECK(doc.at("by_highest_objective").size() == 3);
    CHECK(doc.at("runs").size() == 12);
    const std::string csv = slurp(csv_path);
    CHECK(csv.rfind("method,dataset,restart,mae_p", 0) == 0);
    std::remove(csv_path.c_str());
}

TEST_CASE("cli: divergence rows against the bound, default order one half") {
    const std::string model = "/tmp/mixvb_cli_div_model.json";
    spit(model, json{{"family", {{"type", "gauss_known"}, {"component_variance", 1.0}}},
                     {"weights", {0.5, 0.5}},
                     {"components", {-4.0, 4.0}}}
                    .dump());
    const CliRun run = run_cli("divergence --model " + model +
                               " --n-grid 150 --mc-samples 4000 --seeds 1 --prior-v2 25 "
                               "--init points --seed 4");
    REQUIRE(run.exit_code == 0);
    const json doc = json::parse(run.out);
    REQUIRE(doc.at("rows").size() == 1);
    const json row = doc.at("rows").at(0);
    CHECK(row.at("n") == 150);
    CHECK(row.at("bound").get<double>() > 0.0);
    CHECK(doc.at("protocol").at("alpha") == 0.5);
    std::remove(model.c_str());
}

TEST_CASE("cli: --output routes JSON to a file and leaves stdout empty") {
    const std::string data = "/tmp/mixvb_cli_out.csv";
    spit(data, "kind=real\n0.5\n1.5\n");
    const std::string out_path = "/tmp/mixvb_cli_out.json";
    const CliRun run = run_cli("fit --data " + data + " --k 1 --output " + out_path);
    REQUIRE(run.exit_code == 0);
    CHECK(run.out.empty());
    const json doc = json::parse(slurp(out_path));
    CHECK(doc.contains("surrogate_elbo"));

    const CliRun pretty = run_cli("fit --data " + data + " --k 1 --pretty");
    REQUIRE(pretty.exit_code == 0);
    CHECK(pretty.out.find('\n') != std::string::npos);
    CHECK(json::parse(pretty.out).at("surrogate_elbo") == doc.at("surrogate_elbo"));

    std::remove(data.c_str());
    std::remove(out_path.c_str());
}
