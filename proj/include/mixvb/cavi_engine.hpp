#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixvb/prior_variational.hpp"

namespace mixvb {

enum class InitStrategy {
    RandomResponsibilities,  // rows ~ Dirichlet(1,...,1), factors derived once
    KMeansLike,              // hard assignment to quantile anchors, factors derived
    RandomPoints,            // hard assignment to K randomly chosen observations
    PriorDraw,               // factors at the prior, locations replaced by a draw
};

struct FitConfig {
    double alpha = 1.0;  // tempering exponent, in (0, 1]
    int max_sweeps = 500;
    double rel_tol = 1e-8;
    int restarts = 1;
    InitStrategy init = InitStrategy::RandomResponsibilities;
    std::uint64_t seed = 0;
    int threads = 1;          // restart-level parallelism; results identical to serial
    int elbo_mc_samples = 0;  // > 0: attach a Monte Carlo estimate of the exact objective
    bool validate_monotonicity = false;  // recheck ascent after every coordinate update
};

struct FitResult {
    VariationalState state;
    std::vector<double> elbo_trace;  // surrogate objective, one entry per sweep
    double surrogate_elbo = 0.0;     // last trace entry
    int sweeps = 0;
    bool converged = false;
    int restart_index = 0;  // which restart won
    std::optional<McEstimate> elbo_mc;
    std::vector<std::string> warnings;
};

/// One responsibility sweep: each row proportional to
/// exp(E[log weight_j] + E[log component-density_j(x_i)]), so the tempering
/// exponent cancels. Throws NumericError naming the row when every component
/// assigns zero density.
void update_responsibilities(VariationalState& state, const Dataset& data,
                             const ComponentFamily& family);

/// Weight-factor coordinate step: phi_j = prior_j + alpha * sum_i resp(i, j).
void update_weight_factor(VariationalState& state, const PriorSpec& prior, double alpha);

/// Component-factor coordinate step for component j (conjugate closed forms;
/// the factorized Normal-IG factor takes its two sub-steps in sequence).
void update_component_factor(VariationalState& state, const Dataset& data,
                             const PriorSpec& prior, const ComponentFamily& family,
                             double alpha, int j);

/// Tempered surrogate objective
///   alpha * sum_ij resp_ij (E[log weight_j] + E[log q_j(x_i)] - log resp_ij)
///   - KL(state factors, prior),
/// the quantity every coordinate step ascends. Zero responsibilities
/// contribute zero.
double surrogate_elbo(const VariationalState& state, const Dataset& data,
                      const PriorSpec& prior, const ComponentFamily& family, double alpha);

/// Monte Carlo estimate of the exact tempered objective
/// alpha * E_state[log-likelihood] - KL(state factors, prior).
McEstimate exact_elbo_mc(const VariationalState& state, const Dataset& data,
                         const PriorSpec& prior, const ComponentFamily& family, double alpha,
                         int n_samples, std::uint64_t seed);

VariationalState make_initial_state(const Dataset& data, const PriorSpec& prior,
                                    const ComponentFamily& family, InitStrategy strategy,
                                    std::uint64_t seed, double alpha);

/// Runs coordinate ascent from `restarts` seeded inits (seed of restart r is
/// derive_seed(config.seed, r)) and returns the best final surrogate objective,
/// ties resolved toward the lowest restart index. Sweep order: responsibilities,
/// weight factor, component factors. Converged when the relative objective
/// change drops below rel_tol.
FitResult fit(const Dataset& data, const PriorSpec& prior, const ComponentFamily& family,
              const FitConfig& config);

}  // namespace mixvb
