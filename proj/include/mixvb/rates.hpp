#pragma once

#include <cstddef>
#include <vector>

#include "mixvb/special_math.hpp"

namespace mixvb {

/// Convergence-rate calculators. Each returns the deterministic rate term
/// r_{n,K} (or, for the multinomial, the already 2K-folded maximum) exactly as
/// the theory states it, constants included. n >= 2 throughout; the
/// weight-prior contribution vanishes at K = 1.

/// Dirichlet weight part: 4 log(nK)/n for K >= 2, else 0.
double rate_dirichlet(std::size_t n, int k);

/// Multinomial mixture: max(8KV log(nV)/n, 8K log(nK)/n).
double rate_multinomial(std::size_t n, int k, int v);

/// Known-variance Gaussian mixture: max of the weight part and, over
/// components, (1/n)(log(n/2)/2 + V2/(n prior_v2) + log(sqrt(prior_v2/V2))
/// + mean_j^2/(2 prior_v2) - 1/2).
double rate_gaussian_known_var(std::size_t n, int k, double component_variance,
                               double prior_variance, const std::vector<double>& true_means);

/// Unknown-variance Gaussian mixture under the joint NIG prior.
double rate_gaussian_nig(std::size_t n, int k, double prior_variance, double ig_scale,
                         const std::vector<GaussianParams>& true_components);

/// Unknown-variance Gaussian mixture under the factorized Normal x IG prior.
double rate_gaussian_factorized(std::size_t n, int k, double prior_variance, double ig_scale,
                                const std::vector<GaussianParams>& true_components);

/// Misspecified data with bounded oracle means |m| <= mean_bound, unit-variance
/// Gaussian model.
double rate_misspecified_gaussian(std::size_t n, int k, double prior_variance,
                                  double mean_bound);

struct RateReport {
    double r_nk = 0.0;
    double bound = 0.0;  // (1+alpha)/(1-alpha) * 2K * r_nk
};

/// Folds a rate into the divergence bound at tempering exponent alpha in (0,1).
RateReport make_rate_report(double r_nk, int k, double alpha);

}  // namespace mixvb
