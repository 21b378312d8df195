#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mixvb/rng.hpp"

namespace mixvb {

/// Digamma psi(x) for x > 0. Absolute error below 1e-12 (recurrence into the
/// asymptotic region, then a Bernoulli series). Throws std::domain_error at
/// x <= 0 or non-finite x.
double digamma(double x);

/// log Gamma(x) for x > 0, same scheme and error contract as digamma().
double log_gamma(double x);

struct GaussianParams {
    double mean = 0.0;
    double variance = 1.0;  // > 0
};

struct DirichletParams {
    std::vector<double> concentration;  // each > 0, size >= 1
};

struct InverseGammaParams {
    double shape = 1.0;  // > 0
    double scale = 1.0;  // > 0
};

/// Normal-inverse-gamma in the precision-scale convention: sigma2 ~ IG(shape,
/// scale) and, conditionally, mean ~ N(location, sigma2 / precision_scale).
struct NIGParams {
    double location = 0.0;
    double precision_scale = 1.0;  // > 0
    double shape = 1.0;            // > 0
    double scale = 1.0;            // > 0
};

double kl_gaussian(const GaussianParams& p, const GaussianParams& q);
double kl_dirichlet(const DirichletParams& p, const DirichletParams& q);
double kl_inverse_gamma(const InverseGammaParams& p, const InverseGammaParams& q);
double kl_nig(const NIGParams& p, const NIGParams& q);

/// KL between categorical distributions on the same support size.
/// Returns +infinity when q places zero mass where p does not.
double kl_categorical(const std::vector<double>& p, const std::vector<double>& q);

/// Renyi divergence of order alpha in (0,1) between Gaussians, closed form.
double renyi_gaussian(const GaussianParams& p, const GaussianParams& q, double alpha);

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of the order-alpha Renyi divergence D_alpha(P, Q) from
/// log densities and a sampler for P. Deterministic given the seed; std_error
/// is the delta-method standard error of the estimate.
McEstimate renyi_divergence_mc(const std::function<double(double)>& log_p,
                               const std::function<double(double)>& log_q,
                               const std::function<double(Rng&)>& sample_p,
                               double alpha, std::int64_t n_samples, std::uint64_t seed);

}  // namespace mixvb
