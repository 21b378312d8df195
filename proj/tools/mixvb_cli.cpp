// Command-line front end. Talks to the library exclusively through the C ABI
// in mixvb.h; flags are composed into the job JSON the library consumes.
// Exit codes: 0 success, 2 input error, 3 numerical invariant violation,
// 4 internal error.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cerrno>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixvb.h"

namespace {

using nlohmann::json;

struct CommonOpts {
    double alpha = 1.0;
    std::uint64_t seed = 0;
    double tol = 1e-8;
    int max_sweeps = 500;
    int restarts = 5;
    int threads = 1;
    std::string init = "random";
    std::string output;  // empty: stdout
    bool pretty = false;
};

struct PriorOpts {
    std::string family = "gauss-known";
    int k = 1;
    int categories = 2;
    double component_variance = 1.0;
    double prior_v2 = 1.0;
    double prior_gamma2 = 1.0;
    double weight_conc = 1.0;
    double beta = 1.0;
};

int fail(const char* message) {
    std::fprintf(stderr, "error: %s\n", message);
    return 2;
}

int report_status(mixvb_status status) {
    if (status == MIXVB_OK) return 0;
    std::fprintf(stderr, "error: %s\n", mixvb_last_error());
    return static_cast<int>(status);
}

int write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "error: cannot open '%s' for writing\n", path.c_str());
        return 2;
    }
    out << text;
    out.flush();
    return out ? 0 : 4;
}

bool read_file(const std::string& path, std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
    return true;
}

std::string init_name(const std::string& flag) {
    if (flag == "random") return "random_responsibilities";
    if (flag == "kmeans") return "kmeans_like";
    if (flag == "points") return "random_points";
    if (flag == "prior") return "prior_draw";
    return flag;  // accept the long names too; the library validates
}

json family_json(const PriorOpts& prior) {
    if (prior.family == "multinomial") {
        return json{{"type", "multinomial"}, {"categories", prior.categories}};
    }
    if (prior.family == "gauss-known") {
        return json{{"type", "gauss_known"}, {"component_variance", prior.component_variance}};
    }
    return json{{"type", "gauss_unknown"}};
}

json component_prior_json(const PriorOpts& prior) {
    if (prior.family == "multinomial") {
        return json{{"type", "dirichlet"},
                    {"beta", std::vector<double>(static_cast<std::size_t>(prior.categories),
                                                 prior.beta)}};
    }
    if (prior.family == "gauss-known") {
        return json{{"type", "gaussian_mean"}, {"prior_variance", prior.prior_v2}};
    }
    if (prior.family == "gauss-nig") {
        return json{{"type", "nig"},
                    {"prior_variance", prior.prior_v2},
                    {"ig_scale", prior.prior_gamma2}};
    }
    return json{{"type", "factorized_normal_ig"},
                {"prior_variance", prior.prior_v2},
                {"ig_scale", prior.prior_gamma2}};
}

json config_json(const CommonOpts& common, int elbo_mc) {
    return json{{"alpha", common.alpha},     {"max_sweeps", common.max_sweeps},
                {"rel_tol", common.tol},     {"restarts", common.restarts},
                {"init", init_name(common.init)}, {"seed", common.seed},
                {"threads", common.threads}, {"elbo_mc_samples", elbo_mc}};
}

// JSON always gets a trailing newline so files and stdout are line-complete.
int emit_result(const mixvb_result* result, const CommonOpts& common,
                const std::string& csv_path) {
    char* text = nullptr;
    mixvb_status status = mixvb_result_json(result, common.pretty ? 1 : 0, &text);
    if (status != MIXVB_OK) return report_status(status);
    std::string body(text);
    mixvb_string_free(text);
    body += '\n';
    const int rc = write_text(common.output, body);
    if (rc != 0) return rc;
    if (csv_path.empty()) return 0;
    char* csv = nullptr;
    status = mixvb_result_csv(result, &csv);
    if (status != MIXVB_OK) return report_status(status);
    std::string csv_body(csv);
    mixvb_string_free(csv);
    return write_text(csv_path, csv_body);
}

struct DatasetHandle {
    mixvb_dataset* ptr = nullptr;
    ~DatasetHandle() { mixvb_dataset_free(ptr); }
};

struct ResultHandle {
    mixvb_result* ptr = nullptr;
    ~ResultHandle() { mixvb_result_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tempered variational inference for finite mixtures"};
    app.require_subcommand(1);

    CommonOpts common;
    PriorOpts prior;
    std::string data_path;
    std::string model_path;
    std::string csv_path;
    std::string scores_path;
    std::string model_weights = "geometric";
    int k_max = 10;
    int elbo_mc = 0;
    std::int64_t sim_n = 0;

    const auto add_common = [&](CLI::App* cmd) -> CLI::Option* {
        CLI::Option* alpha = cmd->add_option("--alpha", common.alpha,
                                             "tempering exponent in (0, 1]");
        cmd->add_option("--seed", common.seed, "master RNG seed")->capture_default_str();
        cmd->add_option("--tol", common.tol, "relative convergence tolerance")
            ->capture_default_str();
        cmd->add_option("--max-sweeps", common.max_sweeps, "sweep cap per restart")
            ->capture_default_str();
        cmd->add_option("--restarts", common.restarts, "independent restarts")
            ->capture_default_str();
        cmd->add_option("--threads", common.threads, "worker threads (1 = serial baseline)")
            ->capture_default_str();
        cmd->add_option("--init", common.init, "initialization: random|kmeans|points|prior")
            ->capture_default_str();
        cmd->add_option("--output", common.output, "write JSON here instead of stdout");
        cmd->add_flag("--pretty", common.pretty, "indent the JSON output");
        return alpha;
    };
    const auto add_prior = [&](CLI::App* cmd) {
        cmd->add_option("--family", prior.family,
                        "multinomial|gauss-known|gauss-nig|gauss-factorized")
            ->capture_default_str();
        cmd->add_option("--categories", prior.categories, "category count V (multinomial)")
            ->capture_default_str();
        cmd->add_option("--component-variance", prior.component_variance,
                        "known component variance (gauss-known)")
            ->capture_default_str();
        cmd->add_option("--prior-v2", prior.prior_v2, "prior variance of component locations")
            ->capture_default_str();
        cmd->add_option("--prior-gamma2", prior.prior_gamma2,
                        "inverse-gamma prior scale (unknown-variance families)")
            ->capture_default_str();
        cmd->add_option("--weight-conc", prior.weight_conc,
                        "weight-prior concentration per component")
            ->capture_default_str();
        cmd->add_option("--beta", prior.beta, "per-category prior pseudo-count (multinomial)")
            ->capture_default_str();
    };

    CLI::App* cmd_fit = app.add_subcommand("fit", "fit one mixture by coordinate ascent");
    cmd_fit->add_option("--data", data_path, "dataset CSV")->required();
    cmd_fit->add_option("--k", prior.k, "component count")->required();
    cmd_fit->add_option("--elbo-mc", elbo_mc,
                        "Monte Carlo samples for the exact-objective estimate (0 = off)")
        ->capture_default_str();
    add_prior(cmd_fit);
    add_common(cmd_fit);

    CLI::App* cmd_select = app.add_subcommand("select", "choose K by penalized objective");
    cmd_select->add_option("--data", data_path, "dataset CSV (omit with --scores-json)");
    cmd_select->add_option("--kmax", k_max, "largest K to fit")->capture_default_str();
    cmd_select->add_option("--model-weights", model_weights, "geometric|uniform")
        ->capture_default_str();
    cmd_select->add_option("--scores-json", scores_path,
                           "skip fitting; run selection arithmetic on precomputed "
                           "[k, objective] pairs from this JSON file");
    add_prior(cmd_select);
    add_common(cmd_select);

    CLI::App* cmd_simulate = app.add_subcommand("simulate", "draw a dataset from a mixture");
    cmd_simulate->add_option("--model", model_path, "mixture JSON file")->required();
    cmd_simulate->add_option("-n,--samples", sim_n, "observation count")->required();
    cmd_simulate->add_option("--seed", common.seed, "master RNG seed")->capture_default_str();
    cmd_simulate->add_option("--output", common.output, "write CSV here instead of stdout");

    CLI::App* cmd_bench = app.add_subcommand("bench", "replicate the simulation study");
    int bench_datasets = 10;
    std::int64_t bench_samples = 1000;
    int bench_k = 3;
    int bench_runs = 5;
    std::vector<double> bench_alphas = {0.5, 1.0};
    double bench_weight_conc_truth = 2.0 / 3.0;
    double bench_mean_variance = 10.0;
    cmd_bench->add_option("--datasets", bench_datasets, "dataset replications")
        ->capture_default_str();
    cmd_bench->add_option("--samples", bench_samples, "observations per dataset")
        ->capture_default_str();
    cmd_bench->add_option("--k", bench_k, "true and fitted component count")
        ->capture_default_str();
    cmd_bench->add_option("--runs", bench_runs, "runs per method per dataset")
        ->capture_default_str();
    cmd_bench->add_option("--alphas", bench_alphas, "tempering exponents to benchmark")
        ->delimiter(',')
        ->capture_default_str();
    cmd_bench->add_option("--truth-weight-conc", bench_weight_conc_truth,
                          "Dirichlet concentration drawing the true weights")
        ->capture_default_str();
    cmd_bench->add_option("--mean-variance", bench_mean_variance,
                          "variance drawing the true component means")
        ->capture_default_str();
    cmd_bench->add_option("--csv", csv_path, "also write the per-run CSV here");
    cmd_bench->add_option("--seed", common.seed, "master RNG seed")->capture_default_str();
    cmd_bench->add_option("--threads", common.threads, "dataset-level worker threads")
        ->capture_default_str();
    cmd_bench->add_option("--max-sweeps", common.max_sweeps, "sweep cap per fit")
        ->capture_default_str();
    cmd_bench->add_option("--tol", common.tol, "relative convergence tolerance")
        ->capture_default_str();
    cmd_bench->add_option("--prior-v2", prior.prior_v2, "fitted prior variance on means")
        ->capture_default_str();
    cmd_bench->add_option("--weight-conc", prior.weight_conc, "fitted weight-prior concentration")
        ->capture_default_str();
    cmd_bench->add_option("--output", common.output, "write JSON here instead of stdout");
    cmd_bench->add_flag("--pretty", common.pretty, "indent the JSON output");

    CLI::App* cmd_rates = app.add_subcommand("rates", "evaluate convergence-rate formulas");
    std::string rate_kind = "dirichlet";
    std::int64_t rate_n = 1000;
    std::vector<double> true_means;
    std::vector<double> true_vars;
    std::vector<std::int64_t> sweep_grid;
    double mean_bound = 0.0;
    cmd_rates
        ->add_option("--rate", rate_kind,
                     "dirichlet|multinomial|gauss-known|gauss-nig|gauss-factorized|misspecified")
        ->capture_default_str();
    cmd_rates->add_option("--n", rate_n, "sample size")->capture_default_str();
    cmd_rates->add_option("--k", prior.k, "component count")->required();
    cmd_rates->add_option("--categories", prior.categories, "category count V (multinomial)")
        ->capture_default_str();
    cmd_rates
        ->add_option("--component-variance", prior.component_variance,
                     "known component variance")
        ->capture_default_str();
    cmd_rates->add_option("--prior-v2", prior.prior_v2, "prior variance of component locations")
        ->capture_default_str();
    cmd_rates->add_option("--prior-gamma2", prior.prior_gamma2, "inverse-gamma prior scale")
        ->capture_default_str();
    cmd_rates->add_option("--true-means", true_means, "true component means")->delimiter(',');
    cmd_rates->add_option("--true-vars", true_vars, "true component variances")->delimiter(',');
    cmd_rates->add_option("--mean-bound", mean_bound, "oracle mean bound L (misspecified)")
        ->capture_default_str();
    CLI::Option* rates_alpha_opt =
        cmd_rates->add_option("--alpha", common.alpha,
                              "also report the divergence bound (needs alpha < 1)");
    cmd_rates->add_option("--sweep", sweep_grid, "emit a CSV over these sample sizes")
        ->delimiter(',');
    cmd_rates->add_option("--csv", csv_path, "write the sweep CSV here instead of stdout");
    cmd_rates->add_option("--output", common.output, "write JSON here instead of stdout");
    cmd_rates->add_flag("--pretty", common.pretty, "indent the JSON output");

    CLI::App* cmd_divergence =
        app.add_subcommand("divergence", "track fitted-vs-truth divergence against the bound");
    std::vector<std::int64_t> n_grid = {100, 1000, 10000};
    std::int64_t mc_samples = 200000;
    int div_seeds = 1;
    bool theta_sampling = false;
    int theta_draws = 32;
    cmd_divergence->add_option("--model", model_path, "true mixture JSON file")->required();
    cmd_divergence->add_option("--n-grid", n_grid, "sample sizes to fit")
        ->delimiter(',')
        ->capture_default_str();
    cmd_divergence->add_option("--mc-samples", mc_samples, "Monte Carlo draws per estimate")
        ->capture_default_str();
    cmd_divergence->add_option("--seeds", div_seeds, "replications per sample size")
        ->capture_default_str();
    cmd_divergence->add_flag("--theta-sampling", theta_sampling,
                             "average the divergence over factor draws (slower)");
    cmd_divergence->add_option("--theta-draws", theta_draws, "factor draws when sampling")
        ->capture_default_str();
    cmd_divergence->add_option("--prior-v2", prior.prior_v2, "fitted prior variance")
        ->capture_default_str();
    cmd_divergence
        ->add_option("--weight-conc", prior.weight_conc, "fitted weight-prior concentration")
        ->capture_default_str();
    cmd_divergence->add_option("--beta", prior.beta, "per-category prior pseudo-count")
        ->capture_default_str();
    cmd_divergence->add_option("--csv", csv_path, "also write the per-row CSV here");
    CLI::Option* divergence_alpha_opt = add_common(cmd_divergence);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (prior.family != "multinomial" && prior.family != "gauss-known" &&
        prior.family != "gauss-nig" && prior.family != "gauss-factorized") {
        return fail(("unknown --family '" + prior.family + "'").c_str());
    }

    if (const char* env_seed = std::getenv("MIX_SEED")) {
        errno = 0;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env_seed, &end, 10);
        if (errno != 0 || end == env_seed || *end != '\0') {
            return fail("MIX_SEED is not an unsigned integer");
        }
        common.seed = static_cast<std::uint64_t>(v);
    }

    if (cmd_fit->parsed()) {
        DatasetHandle data;
        mixvb_status status = mixvb_dataset_read_csv(data_path.c_str(), &data.ptr);
        if (status != MIXVB_OK) return report_status(status);
        const json job{
            {"family", family_json(prior)},
            {"prior",
             json{{"weight_prior",
                   std::vector<double>(static_cast<std::size_t>(prior.k), prior.weight_conc)},
                  {"component_prior", component_prior_json(prior)}}},
            {"config", config_json(common, elbo_mc)}};
        ResultHandle result;
        status = mixvb_fit(data.ptr, job.dump().c_str(), &result.ptr);
        if (status != MIXVB_OK) return report_status(status);
        return emit_result(result.ptr, common, "");
    }

    if (cmd_select->parsed()) {
        ResultHandle result;
        if (!scores_path.empty()) {
            std::string text;
            if (!read_file(scores_path, text)) return fail("cannot read the scores file");
            json job;
            try {
                const json fixture = json::parse(text);
                job = fixture.is_array() ? json{{"objectives", fixture}} : fixture;
            } catch (const json::exception& e) {
                return fail(e.what());
            }
            job["model_weights"] = model_weights;
            job["k_max"] = k_max;
            const mixvb_status status =
                mixvb_select_from_scores(job.dump().c_str(), &result.ptr);
            if (status != MIXVB_OK) return report_status(status);
            return emit_result(result.ptr, common, "");
        }
        if (data_path.empty()) return fail("select needs --data (or --scores-json)");
        DatasetHandle data;
        mixvb_status status = mixvb_dataset_read_csv(data_path.c_str(), &data.ptr);
        if (status != MIXVB_OK) return report_status(status);
        const json job{{"family", family_json(prior)},
                       {"k_max", k_max},
                       {"weight_prior_concentration", prior.weight_conc},
                       {"component_prior", component_prior_json(prior)},
                       {"model_weights", model_weights},
                       {"config", config_json(common, 0)}};
        status = mixvb_select(data.ptr, job.dump().c_str(), &result.ptr);
        if (status != MIXVB_OK) return report_status(status);
        return emit_result(result.ptr, common, "");
    }

    if (cmd_simulate->parsed()) {
        std::string model_text;
        if (!read_file(model_path, model_text)) return fail("cannot read the model file");
        DatasetHandle data;
        mixvb_status status =
            mixvb_dataset_simulate(model_text.c_str(), sim_n, common.seed, &data.ptr);
        if (status != MIXVB_OK) return report_status(status);
        if (!common.output.empty()) {
            status = mixvb_dataset_write_csv(data.ptr, common.output.c_str());
            return report_status(status);
        }
        char* text = nullptr;
        status = mixvb_dataset_csv(data.ptr, &text);
        if (status != MIXVB_OK) return report_status(status);
        std::string body(text);
        mixvb_string_free(text);
        return write_text("", body);
    }

    if (cmd_bench->parsed()) {
        const json protocol{{"datasets", bench_datasets},
                            {"samples", bench_samples},
                            {"k", bench_k},
                            {"runs", bench_runs},
                            {"vb_alphas", bench_alphas},
                            {"weight_concentration", bench_weight_conc_truth},
                            {"mean_variance", bench_mean_variance},
                            {"prior_variance", prior.prior_v2},
                            {"weight_prior_concentration", prior.weight_conc},
                            {"max_sweeps", common.max_sweeps},
                            {"rel_tol", common.tol},
                            {"seed", common.seed},
                            {"threads", common.threads}};
        ResultHandle result;
        const mixvb_status status = mixvb_bench(protocol.dump().c_str(), &result.ptr);
        if (status != MIXVB_OK) return report_status(status);
        return emit_result(result.ptr, common, csv_path);
    }

    if (cmd_rates->parsed()) {
        json job{{"n", rate_n}, {"k", prior.k}};
        if (rate_kind == "dirichlet") {
            job["rate"] = "dirichlet";
        } else if (rate_kind == "multinomial") {
            job["rate"] = "multinomial";
            job["categories"] = prior.categories;
        } else if (rate_kind == "gauss-known") {
            job["rate"] = "gauss_known";
            job["component_variance"] = prior.component_variance;
            job["prior_variance"] = prior.prior_v2;
            job["true_means"] = true_means;
        } else if (rate_kind == "gauss-nig" || rate_kind == "gauss-factorized") {
            job["rate"] = rate_kind == "gauss-nig" ? "gauss_nig" : "gauss_factorized";
            job["prior_variance"] = prior.prior_v2;
            job["ig_scale"] = prior.prior_gamma2;
            if (true_vars.size() != true_means.size()) {
                return fail("--true-means and --true-vars must pair up");
            }
            json components = json::array();
            for (std::size_t j = 0; j < true_means.size(); ++j) {
                components.push_back(json{{"mean", true_means[j]}, {"variance", true_vars[j]}});
            }
            job["true_components"] = components;
        } else if (rate_kind == "misspecified") {
            job["rate"] = "misspecified";
            job["prior_variance"] = prior.prior_v2;
            job["mean_bound"] = mean_bound;
        } else {
            return fail("unknown --rate kind");
        }
        if (rates_alpha_opt->count() > 0) job["alpha"] = common.alpha;
        if (!sweep_grid.empty()) job["sweep"] = sweep_grid;
        ResultHandle result;
        const mixvb_status status = mixvb_rates(job.dump().c_str(), &result.ptr);
        if (status != MIXVB_OK) return report_status(status);
        if (!sweep_grid.empty() && csv_path.empty() && common.output.empty()) {
            // both documents want stdout; print the CSV only
            char* csv = nullptr;
            const mixvb_status csv_status = mixvb_result_csv(result.ptr, &csv);
            if (csv_status != MIXVB_OK) return report_status(csv_status);
            std::string body(csv);
            mixvb_string_free(csv);
            return write_text("", body);
        }
        return emit_result(result.ptr, common, sweep_grid.empty() ? "" : csv_path);
    }

    if (cmd_divergence->parsed()) {
        // the run needs alpha < 1; only an explicit flag overrides this default
        if (divergence_alpha_opt->count() == 0) common.alpha = 0.5;
        std::string model_text;
        if (!read_file(model_path, model_text)) return fail("cannot read the model file");
        json truth;
        try {
            truth = json::parse(model_text);
        } catch (const json::exception& e) {
            return fail(e.what());
        }
        const json protocol{{"truth", truth},
                            {"n_grid", n_grid},
                            {"alpha", common.alpha},
                            {"prior_variance", prior.prior_v2},
                            {"weight_prior_concentration", prior.weight_conc},
                            {"beta", prior.beta},
                            {"restarts", common.restarts},
                            {"max_sweeps", common.max_sweeps},
                            {"rel_tol", common.tol},
                            {"mc_samples", mc_samples},
                            {"seeds", div_seeds},
                            {"seed", common.seed},
                            {"theta_sampling", theta_sampling},
                            {"theta_draws", theta_draws},
                            {"threads", common.threads}};
        ResultHandle result;
        const mixvb_status status = mixvb_divergence(protocol.dump().c_str(), &result.ptr);
        if (status != MIXVB_OK) return report_status(status);
        return emit_result(result.ptr, common, csv_path);
    }

    return fail("no subcommand given");
}
