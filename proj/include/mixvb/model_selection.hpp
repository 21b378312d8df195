#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "mixvb/cavi_engine.hpp"

namespace mixvb {

struct GeometricModelWeights {};  // pi_K = 2^-K
struct UniformModelWeights {
    int k_max = 10;  // pi_K = 1/k_max on K = 1..k_max
};
using ModelWeights = std::variant<GeometricModelWeights, UniformModelWeights>;

/// log pi_K for K >= 1 (and K <= k_max for the uniform family).
double model_log_weight(const ModelWeights& weights, int k);

struct SelectionEntry {
    int k = 0;
    double elbo = 0.0;        // L(K), the fitted surrogate objective
    double log_weight = 0.0;  // log pi_K
    double score = 0.0;       // elbo + log pi_K
    FitResult fit;
};

struct SelectionResult {
    std::vector<SelectionEntry> entries;  // K = 1..k_max in order
    int selected_k = 0;
};

/// Penalized-objective selection over K = 1..k_max. Each K is fitted with the
/// same config but an independent seed, derive_seed(config.seed, K); ties in
/// the score resolve toward the smaller K.
SelectionResult select_k(const Dataset& data,
                         const std::function<PriorSpec(int)>& prior_for_k,
                         const ComponentFamily& family, int k_max,
                         const ModelWeights& weights, const FitConfig& config);

/// Selection arithmetic alone, for precomputed objectives (k, L(K)) pairs.
int select_from_scores(const std::vector<std::pair<int, double>>& objectives,
                       const ModelWeights& weights, std::vector<double>* scores = nullptr);

/// Theoretical selection risk bound:
/// alpha/(1-alpha) * kl_oracle_term + (1+alpha)/(1-alpha) * 2K * r_nk
/// + log(1/pi_K) / (n (1-alpha)). Requires alpha in (0, 1).
double selection_bound(double alpha, int k, double r_nk, double model_weight,
                       double kl_oracle_term, std::size_t n);

}  // namespace mixvb
