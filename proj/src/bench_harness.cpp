#include "mixvb/bench_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "mixvb/cavi_engine.hpp"
#include "mixvb/em_baseline.hpp"
#include "mixvb/errors.hpp"
#include "mixvb/model_selection.hpp"
#include "mixvb/rates.hpp"

namespace mixvb {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_alpha(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

/// mean and n-1 sd of a column.
std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return {mean, std::sqrt(acc / (n - 1.0))};
}

double combined_mae(const MaeBreakdown& mae) {
    double acc = mae.weights;
    for (double m : mae.per_mean) acc += m;
    return acc / (1.0 + static_cast<double>(mae.per_mean.size()));
}

struct TruthDraw {
    std::vector<double> weights;
    std::vector<double> means;
};

TruthDraw draw_truth(const BenchProtocol& protocol, int dataset) {
    Rng rng(derive_seed(protocol.seed, 1000 + static_cast<std::uint64_t>(dataset)));
    TruthDraw truth;
    const std::vector<double> conc(static_cast<std::size_t>(protocol.k),
                                   protocol.weight_concentration);
    truth.weights = rng.dirichlet(conc);
    truth.means.resize(static_cast<std::size_t>(protocol.k));
    const double sd = std::sqrt(protocol.mean_variance);
    for (double& m : truth.means) m = sd * rng.normal();
    return truth;
}

}  // namespace

MaeBreakdown mean_absolute_error(const std::vector<double>& true_weights,
                                 const std::vector<double>& true_means,
                                 const std::vector<double>& est_weights,
                                 const std::vector<double>& est_means) {
    const std::size_t k = true_weights.size();
    if (true_means.size() != k || est_weights.size() != k || est_means.size() != k) {
        throw ShapeError("mean_absolute_error: all four vectors must share K");
    }
    if (k == 0) throw ShapeError("mean_absolute_error: K must be at least 1");

    auto order_of = [&](const std::vector<double>& means) {
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });
        return order;
    };
    const std::vector<std::size_t> to = order_of(true_means);
    const std::vector<std::size_t> eo = order_of(est_means);

    MaeBreakdown mae;
    mae.per_mean.resize(k);
    for (std::size_t s = 0; s < k; ++s) {
        mae.weights += std::abs(est_weights[eo[s]] - true_weights[to[s]]);
        mae.per_mean[s] = std::abs(est_means[eo[s]] - true_means[to[s]]);
    }
    mae.weights /= static_cast<double>(k);
    return mae;
}

BenchReport run_supplement_bench(const BenchProtocol& protocol) {
    if (protocol.datasets < 1 || protocol.k < 1 || protocol.runs < 1) {
        throw std::domain_error("bench protocol needs datasets, k, runs >= 1");
    }
    if (protocol.samples == 0) throw std::domain_error("bench protocol needs samples >= 1");

    BenchReport report;
    report.protocol = protocol;

    std::vector<std::string> methods;
    for (double a : protocol.vb_alphas) methods.push_back("vb(" + format_alpha(a) + ")");
    methods.push_back("em");

    // runs indexed [dataset][method][run], filled independently per dataset.
    std::vector<std::vector<std::vector<BenchRun>>> all(
        static_cast<std::size_t>(protocol.datasets));
    report.truths.resize(static_cast<std::size_t>(protocol.datasets));

    auto run_dataset = [&](int d) {
        const TruthDraw truth = draw_truth(protocol, d);
        report.truths[static_cast<std::size_t>(d)] = BenchTruth{d, truth.weights, truth.means};
        const ComponentFamily family = GaussianKnownVar{protocol.component_variance};
        MixtureParams truth_params;
        truth_params.family = family;
        truth_params.weights = truth.weights;
        for (double m : truth.means) truth_params.components.emplace_back(m);
        const Dataset data = sample_mixture(truth_params, protocol.samples,
                                            derive_seed(protocol.seed, 2000 + static_cast<std::uint64_t>(d)));

        PriorSpec prior;
        prior.weight_prior.concentration.assign(static_cast<std::size_t>(protocol.k),
                                                protocol.weight_prior_concentration);
        prior.component_prior = GaussianMeanPrior{protocol.prior_variance};

        auto& per_method = all[static_cast<std::size_t>(d)];
        per_method.resize(methods.size());
        const std::uint64_t dataset_seed = derive_seed(protocol.seed, 3000 + static_cast<std::uint64_t>(d));

        for (std::size_t m = 0; m < methods.size(); ++m) {
            const bool is_em = methods[m] == "em";
            for (int r = 0; r < protocol.runs; ++r) {
                const std::uint64_t run_seed =
                    derive_seed(derive_seed(dataset_seed, m), static_cast<std::uint64_t>(r));
                BenchRun row;
                row.method = methods[m];
                row.dataset = d;
                row.run = r;
                if (is_em) {
                    EmConfig config;
                    config.max_iters = protocol.max_sweeps;
                    config.rel_tol = protocol.rel_tol;
                    config.init = InitStrategy::RandomPoints;
                    config.seed = run_seed;
                    const EmResult em = em_fit(data, protocol.k, protocol.component_variance, config);
                    row.mae = mean_absolute_error(truth.weights, truth.means, em.weights, em.means);
                    row.objective = em.loglik;
                } else {
                    FitConfig config;
                    config.alpha = protocol.vb_alphas[m];
                    config.max_sweeps = protocol.max_sweeps;
                    config.rel_tol = protocol.rel_tol;
                    config.init = InitStrategy::RandomPoints;
                    config.seed = run_seed;
                    const FitResult vb = fit(data, prior, family, config);
                    std::vector<double> weights(static_cast<std::size_t>(protocol.k));
                    std::vector<double> means(static_cast<std::size_t>(protocol.k));
                    double phi_total = 0.0;
                    for (double phi : vb.state.weight_factor.concentration) phi_total += phi;
                    for (int j = 0; j < protocol.k; ++j) {
                        weights[static_cast<std::size_t>(j)] =
                            vb.state.weight_factor.concentration[static_cast<std::size_t>(j)] / phi_total;
                        means[static_cast<std::size_t>(j)] =
                            std::get<GaussianFactor>(vb.state.component_factors[static_cast<std::size_t>(j)]).mean;
                    }
                    row.mae = mean_absolute_error(truth.weights, truth.means, weights, means);
                    row.objective = vb.surrogate_elbo;
                }
                per_method[m].push_back(std::move(row));
            }
        }
    };

    if (protocol.threads <= 1 || protocol.datasets == 1) {
        for (int d = 0; d < protocol.datasets; ++d) run_dataset(d);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                const int d = next.fetch_add(1);
                if (d >= protocol.datasets) return;
                try {
                    run_dataset(d);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const int width = std::min(protocol.threads, protocol.datasets);
        for (int t = 0; t < width; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    // Aggregate per method: kept run per dataset by each criterion.
    for (std::size_t m = 0; m < methods.size(); ++m) {
        std::vector<double> w_mae, w_obj;
        std::vector<std::vector<double>> t_mae(static_cast<std::size_t>(protocol.k));
        std::vector<std::vector<double>> t_obj(static_cast<std::size_t>(protocol.k));
        for (int d = 0; d < protocol.datasets; ++d) {
            const auto& rows = all[static_cast<std::size_t>(d)][m];
            const auto best_mae = std::min_element(
                rows.begin(), rows.end(), [](const BenchRun& a, const BenchRun& b) {
                    return combined_mae(a.mae) < combined_mae(b.mae);
                });
            const auto best_obj = std::max_element(
                rows.begin(), rows.end(),
                [](const BenchRun& a, const BenchRun& b) { return a.objective < b.objective; });
            w_mae.push_back(best_mae->mae.weights);
            w_obj.push_back(best_obj->mae.weights);
            for (int j = 0; j < protocol.k; ++j) {
                t_mae[static_cast<std::size_t>(j)].push_back(best_mae->mae.per_mean[static_cast<std::size_t>(j)]);
                t_obj[static_cast<std::size_t>(j)].push_back(best_obj->mae.per_mean[static_cast<std::size_t>(j)]);
            }
        }
        auto aggregate = [&](const std::vector<double>& w,
                             const std::vector<std::vector<double>>& t) {
            BenchAggregate agg;
            agg.method = methods[m];
            std::tie(agg.weights_mean, agg.weights_sd) = mean_sd(w);
            for (int j = 0; j < protocol.k; ++j) {
                const auto [mu, sd] = mean_sd(t[static_cast<std::size_t>(j)]);
                agg.means_mean.push_back(mu);
                agg.means_sd.push_back(sd);
            }
            return agg;
        };
        report.by_lowest_mae.push_back(aggregate(w_mae, t_mae));
        report.by_highest_objective.push_back(aggregate(w_obj, t_obj));
    }

    for (int d = 0; d < protocol.datasets; ++d) {
        for (const auto& rows : all[static_cast<std::size_t>(d)]) {
            for (const BenchRun& row : rows) report.runs.push_back(row);
        }
    }
    return report;
}

std::string bench_report_csv(const BenchReport& report) {
    std::string csv = "method,dataset,restart,mae_p";
    for (int j = 1; j <= report.protocol.k; ++j) csv += ",mae_t" + std::to_string(j);
    csv += ",elbo\n";
    for (const BenchRun& row : report.runs) {
        csv += row.method + "," + std::to_string(row.dataset) + "," + std::to_string(row.run) +
               "," + format_double(row.mae.weights);
        for (double m : row.mae.per_mean) csv += "," + format_double(m);
        csv += "," + format_double(row.objective) + "\n";
    }
    return csv;
}

namespace {

/// Posterior-mean predictive mixture of a fitted state.
MixtureParams predictive_of(const VariationalState& state, const ComponentFamily& family) {
    MixtureParams predictive;
    predictive.family = family;
    double phi_total = 0.0;
    for (double phi : state.weight_factor.concentration) phi_total += phi;
    for (int j = 0; j < state.k(); ++j) {
        predictive.weights.push_back(
            state.weight_factor.concentration[static_cast<std::size_t>(j)] / phi_total);
        const ComponentFactor& f = state.component_factors[static_cast<std::size_t>(j)];
        if (const auto* d = std::get_if<DirichletFactor>(&f)) {
            std::vector<double> probs = d->params.concentration;
            double total = 0.0;
            for (double g : probs) total += g;
            for (double& g : probs) g /= total;
            predictive.components.emplace_back(std::move(probs));
        } else if (const auto* g = std::get_if<GaussianFactor>(&f)) {
            predictive.components.emplace_back(g->mean);
        } else if (const auto* nig = std::get_if<NIGFactor>(&f)) {
            // mean of sigma2 exists only past shape 1; fall back to the mode.
            const double denom = nig->params.shape > 1.0 ? nig->params.shape - 1.0
                                                         : nig->params.shape + 1.0;
            predictive.components.emplace_back(
                GaussianParams{nig->params.location, nig->params.scale / denom});
        } else {
            const auto& fac = std::get<NormalIGFactor>(f);
            const double denom = fac.ig.shape > 1.0 ? fac.ig.shape - 1.0 : fac.ig.shape + 1.0;
            predictive.components.emplace_back(
                GaussianParams{fac.gaussian.mean, fac.ig.scale / denom});
        }
    }
    return predictive;
}

/// Mixture draw from the variational factors (weights and components jointly).
MixtureParams draw_mixture(const VariationalState& state, const ComponentFamily& family,
                           Rng& rng) {
    MixtureParams draw;
    draw.family = family;
    draw.weights = rng.dirichlet(state.weight_factor.concentration);
    for (const ComponentFactor& f : state.component_factors) {
        if (const auto* d = std::get_if<DirichletFactor>(&f)) {
            draw.components.emplace_back(rng.dirichlet(d->params.concentration));
        } else if (const auto* g = std::get_if<GaussianFactor>(&f)) {
            draw.components.emplace_back(g->mean + std::sqrt(g->variance) * rng.normal());
        } else if (const auto* nig = std::get_if<NIGFactor>(&f)) {
            const double sigma2 = nig->params.scale / rng.gamma(nig->params.shape);
            draw.components.emplace_back(GaussianParams{
                nig->params.location + std::sqrt(sigma2 / nig->params.precision_scale) * rng.normal(),
                sigma2});
        } else {
            const auto& fac = std::get<NormalIGFactor>(f);
            const double sigma2 = fac.ig.scale / rng.gamma(fac.ig.shape);
            draw.components.emplace_back(GaussianParams{
                fac.gaussian.mean + std::sqrt(fac.gaussian.variance) * rng.normal(), sigma2});
        }
    }
    return draw;
}

McEstimate renyi_to_truth(const MixtureParams& model, const MixtureParams& truth, double alpha,
                          int mc_samples, std::uint64_t seed) {
    auto log_p = [&](double x) { return log_mixture_density(model, x); };
    auto log_q = [&](double x) { return log_mixture_density(truth, x); };
    auto sampler = [&](Rng& rng) { return sample_mixture_one(model, rng); };
    return renyi_divergence_mc(log_p, log_q, sampler, alpha, mc_samples, seed);
}

}  // namespace

std::vector<DivergenceRow> run_divergence_experiment(const DivergenceProtocol& protocol) {
    validate(protocol.truth);
    if (protocol.n_grid.empty()) throw std::domain_error("divergence protocol needs an n grid");
    if (protocol.seeds < 1) throw std::domain_error("divergence protocol needs seeds >= 1");
    if (protocol.mc_samples < 2) throw std::domain_error("divergence protocol needs mc_samples >= 2");

    const int k = static_cast<int>(protocol.truth.weights.size());
    PriorSpec prior;
    prior.weight_prior.concentration.assign(static_cast<std::size_t>(k),
                                            protocol.weight_prior_concentration);
    ComponentFamily family = protocol.truth.family;
    if (std::holds_alternative<GaussianKnownVar>(protocol.truth.family)) {
        prior.component_prior = GaussianMeanPrior{protocol.prior_variance};
    } else if (const auto* mult = std::get_if<Multinomial>(&protocol.truth.family)) {
        prior.component_prior =
            DirichletPrior{std::vector<double>(static_cast<std::size_t>(mult->category_count),
                                               protocol.beta)};
    } else {
        throw ConfigError("divergence experiment supports known-variance Gaussian and multinomial truths");
    }

    std::vector<DivergenceRow> rows;
    for (std::size_t n : protocol.n_grid) {
        // Per-n theoretical rate, folded into the divergence bound.
        double r_nk = 0.0;
        if (const auto* known = std::get_if<GaussianKnownVar>(&protocol.truth.family)) {
            std::vector<double> true_means;
            for (const auto& c : protocol.truth.components) true_means.push_back(std::get<double>(c));
            r_nk = rate_gaussian_known_var(n, k, known->component_variance,
                                           protocol.prior_variance, true_means);
        } else {
            const auto& mult = std::get<Multinomial>(protocol.truth.family);
            r_nk = rate_multinomial(n, k, mult.category_count) / (2.0 * static_cast<double>(k));
        }
        const double bound = make_rate_report(r_nk, k, protocol.alpha).bound;

        for (int s = 0; s < protocol.seeds; ++s) {
            const std::uint64_t row_seed =
                derive_seed(derive_seed(protocol.seed, n), static_cast<std::uint64_t>(s));
            const Dataset data = sample_mixture(protocol.truth, n, derive_seed(row_seed, 1));

            FitConfig config;
            config.alpha = protocol.alpha;
            config.max_sweeps = protocol.max_sweeps;
            config.rel_tol = protocol.rel_tol;
            config.restarts = protocol.restarts;
            config.threads = protocol.threads;
            config.seed = derive_seed(row_seed, 2);
            const FitResult fitted = fit(data, prior, family, config);

            DivergenceRow row;
            row.n = n;
            row.seed = row_seed;
            if (!protocol.theta_sampling) {
                const MixtureParams predictive = predictive_of(fitted.state, family);
                const McEstimate est = renyi_to_truth(predictive, protocol.truth, protocol.alpha,
                                                      protocol.mc_samples, derive_seed(row_seed, 3));
                row.estimate = est.value;
                row.std_error = est.std_error;
            } else {
                // Average the divergence over draws from the fitted factors.
                Rng rng(derive_seed(row_seed, 4));
                double acc = 0.0, var_acc = 0.0;
                for (int t = 0; t < protocol.theta_draws; ++t) {
                    const MixtureParams draw = draw_mixture(fitted.state, family, rng);
                    const McEstimate est =
                        renyi_to_truth(draw, protocol.truth, protocol.alpha, protocol.mc_samples,
                                       derive_seed(row_seed, 5 + static_cast<std::uint64_t>(t)));
                    acc += est.value;
                    var_acc += est.std_error * est.std_error;
                }
                row.estimate = acc / static_cast<double>(protocol.theta_draws);
                row.std_error = std::sqrt(var_acc) / static_cast<double>(protocol.theta_draws);
            }
            row.bound = bound;
            row.within_bound = row.estimate <= bound;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string divergence_csv(const std::vector<DivergenceRow>& rows) {
    std::string csv = "n,seed,estimate,std_error,bound,within_bound\n";
    for (const DivergenceRow& row : rows) {
        csv += std::to_string(row.n) + "," + std::to_string(row.seed) + "," +
               format_double(row.estimate) + "," + format_double(row.std_error) + "," +
               format_double(row.bound) + "," + (row.within_bound ? "1" : "0") + "\n";
    }
    return csv;
}

}  // namespace mixvb
