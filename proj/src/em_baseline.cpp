#include "mixvb/em_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mixvb/errors.hpp"

namespace mixvb {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728;
constexpr double kMassFloor = 1e-12;

struct EmState {
    std::vector<double> weights;
    std::vector<double> means;
};

EmState initial_state(const Dataset& data, int k, InitStrategy init, Rng& rng) {
    const std::size_t n = data.size();
    EmState state;
    state.weights.assign(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
    state.means.resize(static_cast<std::size_t>(k));
    if (init == InitStrategy::KMeansLike) {
        std::vector<double> sorted = data.reals;
        std::sort(sorted.begin(), sorted.end());
        for (int j = 0; j < k; ++j) {
            const double q = (static_cast<double>(j) + 0.5) / static_cast<double>(k);
            state.means[static_cast<std::size_t>(j)] =
                sorted[static_cast<std::size_t>(q * static_cast<double>(n - 1))];
        }
        return state;
    }
    if (init == InitStrategy::RandomPoints) {
        // Means sit on K observations drawn without replacement (with
        // replacement once n < K), weights uniform; the classic random restart.
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (int j = 0; j < k; ++j) {
            if (static_cast<std::size_t>(j) < n) {
                const std::size_t pick =
                    static_cast<std::size_t>(j) + rng.index(n - static_cast<std::size_t>(j));
                std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
                state.means[static_cast<std::size_t>(j)] = data.reals[pool[static_cast<std::size_t>(j)]];
            } else {
                state.means[static_cast<std::size_t>(j)] = data.reals[rng.index(n)];
            }
        }
        return state;
    }
    if (init == InitStrategy::PriorDraw) {
        throw ConfigError("em_fit has no prior to draw from");
    }
    // Random-responsibility init: Dirichlet(1,..,1) rows followed by one
    // M-step, mirroring the coordinate-ascent engine's default.
    const std::vector<double> ones(static_cast<std::size_t>(k), 1.0);
    std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
    std::vector<double> mean_acc(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> row = rng.dirichlet(ones);
        for (int j = 0; j < k; ++j) {
            mass[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
            mean_acc[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)] * data.reals[i];
        }
    }
    for (int j = 0; j < k; ++j) {
        state.weights[static_cast<std::size_t>(j)] = mass[static_cast<std::size_t>(j)] / static_cast<double>(n);
        state.means[static_cast<std::size_t>(j)] =
            mean_acc[static_cast<std::size_t>(j)] / mass[static_cast<std::size_t>(j)];
    }
    return state;
}

EmResult run_em(const Dataset& data, int k, double variance, const EmConfig& config,
                std::uint64_t seed) {
    const std::size_t n = data.size();
    Rng rng(seed);
    EmState state = initial_state(data, k, config.init, rng);

    EmResult result;
    std::vector<double> resp(n * static_cast<std::size_t>(k));
    std::vector<double> row(static_cast<std::size_t>(k));
    double prev = -std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        // E-step: Bayes responsibilities; also accumulates the log-likelihood.
        double loglik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (int j = 0; j < k; ++j) {
                const double w = state.weights[static_cast<std::size_t>(j)];
                const double d = data.reals[i] - state.means[static_cast<std::size_t>(j)];
                row[static_cast<std::size_t>(j)] =
                    (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) -
                    0.5 * (kLog2Pi + std::log(variance)) - d * d / (2.0 * variance);
                best = std::max(best, row[static_cast<std::size_t>(j)]);
            }
            if (!std::isfinite(best)) {
                throw NumericError("zero mixture density at row " + std::to_string(i));
            }
            double total = 0.0;
            for (int j = 0; j < k; ++j) {
                row[static_cast<std::size_t>(j)] = std::exp(row[static_cast<std::size_t>(j)] - best);
                total += row[static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < k; ++j) {
                resp[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)] =
                    row[static_cast<std::size_t>(j)] / total;
            }
            loglik += best + std::log(total);
        }
        result.loglik_trace.push_back(loglik);
        result.iters = iter;

        // M-step with empty-component rescue.
        for (int j = 0; j < k; ++j) {
            double mass = 0.0, mean_acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double w = resp[i * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)];
                mass += w;
                mean_acc += w * data.reals[i];
            }
            if (mass < kMassFloor) {
                state.means[static_cast<std::size_t>(j)] = data.reals[rng.index(n)];
                state.weights[static_cast<std::size_t>(j)] = 1.0 / static_cast<double>(n);
                result.reseeded_components.push_back(j);
                continue;
            }
            state.weights[static_cast<std::size_t>(j)] = mass / static_cast<double>(n);
            state.means[static_cast<std::size_t>(j)] = mean_acc / mass;
        }
        // Renormalize in case a rescue perturbed the weight total.
        double wsum = 0.0;
        for (double w : state.weights) wsum += w;
        for (double& w : state.weights) w /= wsum;

        if (iter >= 2) {
            const double denom = std::abs(prev) > 0.0 ? std::abs(prev) : 1.0;
            if (std::abs(loglik - prev) / denom < config.rel_tol) {
                result.converged = true;
                break;
            }
        }
        prev = loglik;
    }

    result.weights = state.weights;
    result.means = state.means;
    result.loglik = result.loglik_trace.back();
    return result;
}

}  // namespace

EmResult em_fit(const Dataset& data, int k, double component_variance, const EmConfig& config) {
    if (k < 1) throw std::domain_error("em_fit: K must be at least 1");
    if (!(component_variance > 0.0)) {
        throw std::domain_error("em_fit: component variance must be positive");
    }
    if (config.max_iters < 1) throw std::domain_error("em_fit: max_iters must be at least 1");
    if (!(config.rel_tol > 0.0)) throw std::domain_error("em_fit: rel_tol must be positive");
    if (config.restarts < 1) throw std::domain_error("em_fit: restarts must be at least 1");
    if (data.kind != DataKind::Real && data.kind.has_value()) {
        throw ConfigError("em_fit models real-valued data");
    }
    if (data.size() == 0) throw ConfigError("em_fit needs at least one observation");

    EmResult best;
    for (int r = 0; r < config.restarts; ++r) {
        EmResult run = run_em(data, k, component_variance, config,
                              derive_seed(config.seed, static_cast<std::uint64_t>(r)));
        run.restart_index = r;
        if (r == 0 || run.loglik > best.loglik) best = std::move(run);
    }
    return best;
}

}  // namespace mixvb
