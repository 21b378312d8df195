#include "mixvb/cavi_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "mixvb/errors.hpp"

namespace mixvb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_config(const FitConfig& config) {
    if (!(config.alpha > 0.0) || config.alpha > 1.0) {
        throw std::domain_error("alpha must lie in (0, 1]");
    }
    if (config.max_sweeps < 1) throw std::domain_error("max_sweeps must be at least 1");
    if (!(config.rel_tol > 0.0)) throw std::domain_error("rel_tol must be positive");
    if (config.restarts < 1) throw std::domain_error("restarts must be at least 1");
    if (config.threads < 1) throw std::domain_error("threads must be at least 1");
    if (config.elbo_mc_samples < 0) throw std::domain_error("elbo_mc_samples must be >= 0");
}

/// Tempered sufficient statistics of component j: weighted count and the first
/// two weighted moments of the observations.
struct WeightedMoments {
    double w = 0.0;
    double wx = 0.0;
    double wxx = 0.0;
};

WeightedMoments tempered_moments(const VariationalState& state, const Dataset& data,
                                 double alpha, int j) {
    WeightedMoments m;
    for (std::size_t i = 0; i < state.n; ++i) {
        const double w = state.resp(i, j);
        if (w == 0.0) continue;
        const double x = data.at(i);
        m.w += w;
        m.wx += w * x;
        m.wxx += w * x * x;
    }
    m.w *= alpha;
    m.wx *= alpha;
    m.wxx *= alpha;
    return m;
}

double relative_change(double prev, double cur) {
    const double denom = std::abs(prev) > 0.0 ? std::abs(prev) : 1.0;
    return std::abs(cur - prev) / denom;
}

}  // namespace

void update_responsibilities(VariationalState& state, const Dataset& data,
                             const ComponentFamily& family) {
    const int k = state.k();
    std::vector<double> elog_weight(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) elog_weight[static_cast<std::size_t>(j)] = expected_log_weight(state.weight_factor, j);

    std::vector<double> row(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < state.n; ++i) {
        const double x = data.at(i);
        double best = kNegInf;
        for (int j = 0; j < k; ++j) {
            const double h = elog_weight[static_cast<std::size_t>(j)] +
                             expected_log_component_density(state.component_factors[static_cast<std::size_t>(j)],
                                                            family, x);
            row[static_cast<std::size_t>(j)] = h;
            best = std::max(best, h);
        }
        if (best == kNegInf || std::isnan(best)) {
            throw NumericError("degenerate observation at row " + std::to_string(i) +
                               ": zero density under every component");
        }
        double total = 0.0;
        for (int j = 0; j < k; ++j) {
            row[static_cast<std::size_t>(j)] = std::exp(row[static_cast<std::size_t>(j)] - best);
            total += row[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < k; ++j) state.resp(i, j) = row[static_cast<std::size_t>(j)] / total;
    }
}

void update_weight_factor(VariationalState& state, const PriorSpec& prior, double alpha) {
    const int k = state.k();
    if (prior.k() != k) throw ShapeError("update_weight_factor: prior K differs from state K");
    for (int j = 0; j < k; ++j) {
        double mass = 0.0;
        for (std::size_t i = 0; i < state.n; ++i) mass += state.resp(i, j);
        state.weight_factor.concentration[static_cast<std::size_t>(j)] =
            prior.weight_prior.concentration[static_cast<std::size_t>(j)] + alpha * mass;
    }
}

void update_component_factor(VariationalState& state, const Dataset& data,
                             const PriorSpec& prior, const ComponentFamily& family,
                             double alpha, int j) {
    if (j < 0 || j >= state.k()) throw ShapeError("update_component_factor: index out of range");
    ComponentFactor& factor = state.component_factors[static_cast<std::size_t>(j)];

    if (const auto* dp = std::get_if<DirichletPrior>(&prior.component_prior)) {
        const auto* mult = std::get_if<Multinomial>(&family);
        if (!mult) throw ConfigError("Dirichlet prior requires the multinomial family");
        std::vector<double> gamma = dp->beta;
        for (std::size_t i = 0; i < state.n; ++i) {
            const double w = state.resp(i, j);
            if (w == 0.0) continue;
            gamma[static_cast<std::size_t>(data.categories[i] - 1)] += alpha * w;
        }
        factor = DirichletFactor{DirichletParams{std::move(gamma)}};
        return;
    }

    if (const auto* gp = std::get_if<GaussianMeanPrior>(&prior.component_prior)) {
        const auto* known = std::get_if<GaussianKnownVar>(&family);
        if (!known) throw ConfigError("Gaussian-mean prior requires the known-variance family");
        const WeightedMoments m = tempered_moments(state, data, alpha, j);
        const double precision = 1.0 / gp->prior_variance + m.w / known->component_variance;
        const double mean = (m.wx / known->component_variance) / precision;
        factor = GaussianFactor{mean, std::max(1.0 / precision, kVarianceFloor)};
        return;
    }

    if (const auto* np = std::get_if<NIGPrior>(&prior.component_prior)) {
        if (!std::holds_alternative<GaussianUnknownVar>(family)) {
            throw ConfigError("NIG prior requires the unknown-variance family");
        }
        const WeightedMoments m = tempered_moments(state, data, alpha, j);
        const double lambda0 = 1.0 / np->prior_variance;
        const double lambda = lambda0 + m.w;
        const double mean = m.wx / lambda;
        const double shape = 1.0 + 0.5 * m.w;
        // m.wxx - lambda * mean^2 >= 0 by Cauchy-Schwarz since lambda > m.w
        const double scale = np->ig_scale + 0.5 * (m.wxx - lambda * mean * mean);
        factor = NIGFactor{NIGParams{mean, lambda, shape, std::max(scale, kVarianceFloor)}};
        return;
    }

    const auto& fp = std::get<FactorizedNormalIGPrior>(prior.component_prior);
    if (!std::holds_alternative<GaussianUnknownVar>(family)) {
        throw ConfigError("factorized Normal-IG prior requires the unknown-variance family");
    }
    auto* cur = std::get_if<NormalIGFactor>(&factor);
    if (!cur) throw ConfigError("factorized prior requires Normal-IG factors");
    const WeightedMoments m = tempered_moments(state, data, alpha, j);
    // Mean sub-step under the current variance factor, then variance sub-step
    // under the new mean factor; each is an exact coordinate optimizer.
    const double ig_mean_inv = cur->ig.shape / cur->ig.scale;  // E[1/sigma2]
    const double precision = 1.0 / fp.prior_variance + ig_mean_inv * m.w;
    const double mean = ig_mean_inv * m.wx / precision;
    const double variance = std::max(1.0 / precision, kVarianceFloor);
    const double shape = 1.0 + 0.5 * m.w;
    const double scale =
        fp.ig_scale + 0.5 * (m.wxx - 2.0 * mean * m.wx + m.w * (mean * mean + variance));
    *cur = NormalIGFactor{GaussianParams{mean, variance},
                          InverseGammaParams{shape, std::max(scale, kVarianceFloor)}};
}

double surrogate_elbo(const VariationalState& state, const Dataset& data,
                      const PriorSpec& prior, const ComponentFamily& family, double alpha) {
    const int k = state.k();
    std::vector<double> elog_weight(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) elog_weight[static_cast<std::size_t>(j)] = expected_log_weight(state.weight_factor, j);

    double data_term = 0.0;
    for (std::size_t i = 0; i < state.n; ++i) {
        const double x = data.at(i);
        for (int j = 0; j < k; ++j) {
            const double w = state.resp(i, j);
            if (w == 0.0) continue;
            const double elog_q = expected_log_component_density(
                state.component_factors[static_cast<std::size_t>(j)], family, x);
            data_term += w * (elog_weight[static_cast<std::size_t>(j)] + elog_q - std::log(w));
        }
    }
    return alpha * data_term - kl_state_to_prior(state, prior);
}

McEstimate exact_elbo_mc(const VariationalState& state, const Dataset& data,
                         const PriorSpec& prior, const ComponentFamily& family, double alpha,
                         int n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::domain_error("exact_elbo_mc: need at least 2 samples");
    const int k = state.k();
    Rng rng(seed);
    double mean = 0.0, m2 = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        MixtureParams draw;
        draw.family = family;
        draw.weights = rng.dirichlet(state.weight_factor.concentration);
        draw.components.reserve(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            const ComponentFactor& f = state.component_factors[static_cast<std::size_t>(j)];
            if (const auto* d = std::get_if<DirichletFactor>(&f)) {
                draw.components.emplace_back(rng.dirichlet(d->params.concentration));
            } else if (const auto* g = std::get_if<GaussianFactor>(&f)) {
                draw.components.emplace_back(g->mean + std::sqrt(g->variance) * rng.normal());
            } else if (const auto* nig = std::get_if<NIGFactor>(&f)) {
                const double sigma2 = nig->params.scale / rng.gamma(nig->params.shape);
                const double mu = nig->params.location +
                                  std::sqrt(sigma2 / nig->params.precision_scale) * rng.normal();
                draw.components.emplace_back(GaussianParams{mu, sigma2});
            } else {
                const auto& fac = std::get<NormalIGFactor>(f);
                const double sigma2 = fac.ig.scale / rng.gamma(fac.ig.shape);
                const double mu = fac.gaussian.mean + std::sqrt(fac.gaussian.variance) * rng.normal();
                draw.components.emplace_back(GaussianParams{mu, sigma2});
            }
        }
        const double ll = log_likelihood(draw, data);
        const double delta = ll - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (ll - mean);
    }
    const double n = static_cast<double>(n_samples);
    McEstimate out;
    out.value = alpha * mean - kl_state_to_prior(state, prior);
    out.std_error = alpha * std::sqrt(m2 / (n - 1.0) / n);
    return out;
}

namespace {

void derive_factors_from_responsibilities(VariationalState& state, const Dataset& data,
                                          const PriorSpec& prior, const ComponentFamily& family,
                                          double alpha) {
    update_weight_factor(state, prior, alpha);
    for (int j = 0; j < state.k(); ++j) update_component_factor(state, data, prior, family, alpha, j);
}

/// Hard assignment of every observation to the nearest anchor, ties toward the
/// lowest index; responsibilities overwritten as one-hot rows.
void hard_assign_to_anchors(VariationalState& state, const Dataset& data,
                            const std::vector<double>& anchors) {
    const int k = static_cast<int>(anchors.size());
    std::fill(state.responsibilities.begin(), state.responsibilities.end(), 0.0);
    for (std::size_t i = 0; i < state.n; ++i) {
        const double x = data.at(i);
        int best = 0;
        double best_d = std::abs(x - anchors[0]);
        for (int j = 1; j < k; ++j) {
            const double d = std::abs(x - anchors[static_cast<std::size_t>(j)]);
            if (d < best_d) {
                best = j;
                best_d = d;
            }
        }
        state.resp(i, best) = 1.0;
    }
}

}  // namespace

VariationalState make_initial_state(const Dataset& data, const PriorSpec& prior,
                                    const ComponentFamily& family, InitStrategy strategy,
                                    std::uint64_t seed, double alpha) {
    VariationalState state = prior_equal_state(prior, family);
    const std::size_t n = data.size();
    const int k = prior.k();
    state.n = n;
    state.responsibilities.assign(n * static_cast<std::size_t>(k),
                                  1.0 / static_cast<double>(k));
    if (n == 0) return state;

    Rng rng(seed);
    switch (strategy) {
        case InitStrategy::RandomResponsibilities: {
            const std::vector<double> ones(static_cast<std::size_t>(k), 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                const std::vector<double> row = rng.dirichlet(ones);
                for (int j = 0; j < k; ++j) state.resp(i, j) = row[static_cast<std::size_t>(j)];
            }
            derive_factors_from_responsibilities(state, data, prior, family, alpha);
            break;
        }
        case InitStrategy::KMeansLike: {
            // Hard assignment: reals to the nearest of K quantile anchors,
            // categories to component (v - 1) mod K; factors derived once.
            if (data.kind == DataKind::Categorical) {
                std::fill(state.responsibilities.begin(), state.responsibilities.end(), 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    state.resp(i, (data.categories[i] - 1) % k) = 1.0;
                }
            } else {
                std::vector<double> sorted = data.reals;
                std::sort(sorted.begin(), sorted.end());
                std::vector<double> anchors(static_cast<std::size_t>(k));
                for (int j = 0; j < k; ++j) {
                    const double q = (static_cast<double>(j) + 0.5) / static_cast<double>(k);
                    anchors[static_cast<std::size_t>(j)] =
                        sorted[static_cast<std::size_t>(q * static_cast<double>(n - 1))];
                }
                hard_assign_to_anchors(state, data, anchors);
            }
            derive_factors_from_responsibilities(state, data, prior, family, alpha);
            break;
        }
        case InitStrategy::RandomPoints: {
            // Anchors are K observations drawn without replacement (with
            // replacement once n < K); the classic random restart.
            std::vector<std::size_t> pool(n);
            for (std::size_t i = 0; i < n; ++i) pool[i] = i;
            std::vector<double> anchors(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) {
                if (static_cast<std::size_t>(j) < n) {
                    const std::size_t pick =
                        static_cast<std::size_t>(j) +
                        rng.index(n - static_cast<std::size_t>(j));
                    std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
                    anchors[static_cast<std::size_t>(j)] =
                        data.at(pool[static_cast<std::size_t>(j)]);
                } else {
                    anchors[static_cast<std::size_t>(j)] = data.at(rng.index(n));
                }
            }
            hard_assign_to_anchors(state, data, anchors);
            derive_factors_from_responsibilities(state, data, prior, family, alpha);
            break;
        }
        case InitStrategy::PriorDraw: {
            // Factors keep the prior shape; locations move to a prior draw.
            for (int j = 0; j < k; ++j) {
                ComponentFactor& f = state.component_factors[static_cast<std::size_t>(j)];
                if (const auto* dp = std::get_if<DirichletPrior>(&prior.component_prior)) {
                    const std::vector<double> draw = rng.dirichlet(dp->beta);
                    std::vector<double> gamma = dp->beta;
                    const double pseudo = static_cast<double>(n) / static_cast<double>(k);
                    for (std::size_t v = 0; v < gamma.size(); ++v) gamma[v] += pseudo * draw[v];
                    f = DirichletFactor{DirichletParams{std::move(gamma)}};
                } else if (const auto* gp = std::get_if<GaussianMeanPrior>(&prior.component_prior)) {
                    f = GaussianFactor{std::sqrt(gp->prior_variance) * rng.normal(),
                                       gp->prior_variance};
                } else if (const auto* np = std::get_if<NIGPrior>(&prior.component_prior)) {
                    const double sigma2 = np->ig_scale / rng.gamma(1.0);
                    const double mu = std::sqrt(sigma2 * np->prior_variance) * rng.normal();
                    f = NIGFactor{NIGParams{mu, 1.0 / np->prior_variance, 1.0, np->ig_scale}};
                } else {
                    const auto& fp = std::get<FactorizedNormalIGPrior>(prior.component_prior);
                    const double mu = std::sqrt(fp.prior_variance) * rng.normal();
                    f = NormalIGFactor{GaussianParams{mu, fp.prior_variance},
                                       InverseGammaParams{1.0, fp.ig_scale}};
                }
            }
            break;
        }
    }
    return state;
}

namespace {

FitResult single_fit(const Dataset& data, const PriorSpec& prior, const ComponentFamily& family,
                     const FitConfig& config, std::uint64_t seed) {
    FitResult result;
    result.state = make_initial_state(data, prior, family, config.init, seed, config.alpha);
    double prev = kNegInf;
    double guard = config.validate_monotonicity
                       ? surrogate_elbo(result.state, data, prior, family, config.alpha)
                       : 0.0;
    auto checked = [&](const char* step) {
        if (!config.validate_monotonicity) return;
        const double now = surrogate_elbo(result.state, data, prior, family, config.alpha);
        if (now < guard - 1e-8 * std::max(1.0, std::abs(guard))) {
            throw NumericError(std::string("objective decreased after ") + step + ": " +
                               std::to_string(guard) + " -> " + std::to_string(now));
        }
        guard = now;
    };

    for (int sweep = 1; sweep <= config.max_sweeps; ++sweep) {
        update_responsibilities(result.state, data, family);
        checked("responsibility update");
        update_weight_factor(result.state, prior, config.alpha);
        checked("weight-factor update");
        for (int j = 0; j < result.state.k(); ++j) {
            update_component_factor(result.state, data, prior, family, config.alpha, j);
            checked("component-factor update");
        }
        const double elbo = surrogate_elbo(result.state, data, prior, family, config.alpha);
        if (std::isnan(elbo)) throw NumericError("surrogate objective is NaN");
        result.elbo_trace.push_back(elbo);
        result.sweeps = sweep;
        if (sweep >= 2 && relative_change(prev, elbo) < config.rel_tol) {
            result.converged = true;
            break;
        }
        prev = elbo;
    }
    result.surrogate_elbo = result.elbo_trace.back();
    return result;
}

}  // namespace

FitResult fit(const Dataset& data, const PriorSpec& prior, const ComponentFamily& family,
              const FitConfig& config) {
    check_config(config);
    const bool weight_prior_in_range = validate(prior, family);
    require_compatible(data, family);

    std::vector<std::string> warnings;
    if (!weight_prior_in_range) {
        warnings.push_back("weight-prior concentrations fall outside [2/K, 1]; "
                           "selection guarantees assume that range");
    }

    if (data.size() == 0) {
        FitResult result;
        result.state = prior_equal_state(prior, family);
        result.elbo_trace = {surrogate_elbo(result.state, data, prior, family, config.alpha)};
        result.surrogate_elbo = result.elbo_trace.back();
        result.converged = true;
        result.warnings = std::move(warnings);
        return result;
    }

    std::vector<FitResult> runs(static_cast<std::size_t>(config.restarts));
    auto run_one = [&](int r) {
        runs[static_cast<std::size_t>(r)] =
            single_fit(data, prior, family, config, derive_seed(config.seed, static_cast<std::uint64_t>(r)));
        runs[static_cast<std::size_t>(r)].restart_index = r;
    };

    if (config.threads <= 1 || config.restarts == 1) {
        for (int r = 0; r < config.restarts; ++r) run_one(r);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= config.restarts) return;
                try {
                    run_one(r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const int width = std::min(config.threads, config.restarts);
        pool.reserve(static_cast<std::size_t>(width));
        for (int t = 0; t < width; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].surrogate_elbo > runs[best].surrogate_elbo) best = r;
    }
    FitResult result = std::move(runs[best]);
    result.warnings = std::move(warnings);
    if (config.elbo_mc_samples > 0) {
        result.elbo_mc = exact_elbo_mc(result.state, data, prior, family, config.alpha,
                                       config.elbo_mc_samples,
                                       derive_seed(config.seed, 0x454c424fULL));
    }
    return result;
}

}  // namespace mixvb
