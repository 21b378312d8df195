#pragma once

#include <cstdint>
#include <vector>

#include "mixvb/cavi_engine.hpp"
#include "mixvb/mixture_model.hpp"

namespace mixvb {

struct EmConfig {
    int max_iters = 500;
    double rel_tol = 1e-8;
    int restarts = 1;
    InitStrategy init = InitStrategy::RandomResponsibilities;
    std::uint64_t seed = 0;
};

struct EmResult {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> loglik_trace;  // one entry per iteration
    double loglik = 0.0;
    int iters = 0;
    bool converged = false;
    int restart_index = 0;
    std::vector<int> reseeded_components;  // rescue events, one entry per reseed
};

/// Maximum-likelihood EM for the known-variance Gaussian mixture; the
/// benchmark's comparison baseline. A component whose responsibility mass collapses
/// below 1e-12 is reseeded at a random observation (event recorded), keeping
/// the iteration defined. Restart seeds derive as in fit(); the winner has the
/// highest final log-likelihood, ties toward the lowest restart index.
EmResult em_fit(const Dataset& data, int k, double component_variance, const EmConfig& config);

}  // namespace mixvb
