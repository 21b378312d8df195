#include "mixvb/model_selection.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mixvb/errors.hpp"

namespace mixvb {

namespace {
constexpr double kLog2 = 0.69314718055994530941723212146;
}

double model_log_weight(const ModelWeights& weights, int k) {
    if (k < 1) throw std::domain_error("model_log_weight: K must be at least 1");
    if (std::holds_alternative<GeometricModelWeights>(weights)) {
        return -static_cast<double>(k) * kLog2;
    }
    const auto& uniform = std::get<UniformModelWeights>(weights);
    if (uniform.k_max < 1) throw std::domain_error("uniform model weights need k_max >= 1");
    if (k > uniform.k_max) throw std::domain_error("model_log_weight: K exceeds k_max");
    return -std::log(static_cast<double>(uniform.k_max));
}

SelectionResult select_k(const Dataset& data,
                         const std::function<PriorSpec(int)>& prior_for_k,
                         const ComponentFamily& family, int k_max,
                         const ModelWeights& weights, const FitConfig& config) {
    if (k_max < 1) throw std::domain_error("select_k: k_max must be at least 1");
    SelectionResult result;
    result.entries.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        FitConfig per_k = config;
        per_k.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
        SelectionEntry entry;
        entry.k = k;
        PriorSpec prior = prior_for_k(k);
        if (prior.k() != k) {
            throw ConfigError("prior_for_k returned K=" + std::to_string(prior.k()) +
                              " for requested K=" + std::to_string(k));
        }
        entry.fit = fit(data, prior, family, per_k);
        entry.elbo = entry.fit.surrogate_elbo;
        entry.log_weight = model_log_weight(weights, k);
        entry.score = entry.elbo + entry.log_weight;
        result.entries.push_back(std::move(entry));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.entries.size(); ++i) {
        if (result.entries[i].score > result.entries[best].score) best = i;
    }
    result.selected_k = result.entries[best].k;
    return result;
}

int select_from_scores(const std::vector<std::pair<int, double>>& objectives,
                       const ModelWeights& weights, std::vector<double>* scores) {
    if (objectives.empty()) throw ShapeError("select_from_scores: no objectives given");
    if (scores) scores->clear();
    int best_k = 0;
    double best_score = 0.0;
    for (const auto& [k, elbo] : objectives) {
        const double score = elbo + model_log_weight(weights, k);
        if (scores) scores->push_back(score);
        if (best_k == 0 || score > best_score || (score == best_score && k < best_k)) {
            best_k = k;
            best_score = score;
        }
    }
    return best_k;
}

double selection_bound(double alpha, int k, double r_nk, double model_weight,
                       double kl_oracle_term, std::size_t n) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::domain_error("selection_bound: alpha must lie in (0, 1)");
    }
    if (k < 1) throw std::domain_error("selection_bound: K must be at least 1");
    if (!(model_weight > 0.0) || model_weight > 1.0) {
        throw std::domain_error("selection_bound: model weight must lie in (0, 1]");
    }
    if (n == 0) throw std::domain_error("selection_bound: n must be positive");
    return alpha / (1.0 - alpha) * kl_oracle_term +
           (1.0 + alpha) / (1.0 - alpha) * 2.0 * static_cast<double>(k) * r_nk +
           std::log(1.0 / model_weight) / (static_cast<double>(n) * (1.0 - alpha));
}

}  // namespace mixvb
