#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "mixvb/mixture_model.hpp"
#include "mixvb/special_math.hpp"

namespace mixvb {

/// Component priors, one record shared by all K components.
struct DirichletPrior {
    std::vector<double> beta;  // per-category pseudo-counts, length V
};

struct GaussianMeanPrior {
    double prior_variance = 1.0;  // mean ~ N(0, prior_variance)
};

/// Joint prior on (mean, variance): variance ~ IG(1, ig_scale), mean | variance
/// ~ N(0, variance * prior_variance).
struct NIGPrior {
    double prior_variance = 1.0;
    double ig_scale = 1.0;
};

/// Independent prior on mean ~ N(0, prior_variance) and variance ~ IG(1, ig_scale).
struct FactorizedNormalIGPrior {
    double prior_variance = 1.0;
    double ig_scale = 1.0;
};

using ComponentPrior =
    std::variant<DirichletPrior, GaussianMeanPrior, NIGPrior, FactorizedNormalIGPrior>;

struct PriorSpec {
    DirichletParams weight_prior;  // length K
    ComponentPrior component_prior;

    int k() const { return static_cast<int>(weight_prior.concentration.size()); }
};

/// Throws unless prior shapes and ranges are valid and the prior matches the
/// family. Returns true when every weight concentration lies in [2/K, 1] (the
/// range the selection guarantees assume); callers surface a warning when it
/// does not, never an error.
bool validate(const PriorSpec& prior, const ComponentFamily& family);

/// Variational factor for one component.
struct DirichletFactor {
    DirichletParams params;
};
struct GaussianFactor {
    double mean = 0.0;
    double variance = 1.0;
};
struct NIGFactor {
    NIGParams params;
};
struct NormalIGFactor {
    GaussianParams gaussian;
    InverseGammaParams ig;
};
using ComponentFactor = std::variant<DirichletFactor, GaussianFactor, NIGFactor, NormalIGFactor>;

/// Mean-field state: Dirichlet weight factor, K component factors, and the
/// n-by-K responsibility matrix (each row on the simplex), stored row-major.
struct VariationalState {
    DirichletParams weight_factor;
    std::vector<ComponentFactor> component_factors;
    std::vector<double> responsibilities;
    std::size_t n = 0;

    int k() const { return static_cast<int>(weight_factor.concentration.size()); }
    double resp(std::size_t i, int j) const {
        return responsibilities[i * component_factors.size() + static_cast<std::size_t>(j)];
    }
    double& resp(std::size_t i, int j) {
        return responsibilities[i * component_factors.size() + static_cast<std::size_t>(j)];
    }
};

/// Smallest variance a variational factor may carry; updates clamp to it.
inline constexpr double kVarianceFloor = 1e-12;

/// E[log weight_j] under the Dirichlet weight factor.
double expected_log_weight(const DirichletParams& weight_factor, int j);

/// E[log component-density at x] under one factor. The family supplies what
/// the factor does not carry (V, the known variance).
double expected_log_component_density(const ComponentFactor& factor,
                                      const ComponentFamily& family, double x);

/// KL(state factors, prior): weight-factor term plus one term per component.
/// Responsibilities do not enter.
double kl_state_to_prior(const VariationalState& state, const PriorSpec& prior);

/// State whose factors equal the prior, with an empty responsibility block —
/// the fixed point for an empty dataset and the base of PriorDraw inits.
VariationalState prior_equal_state(const PriorSpec& prior, const ComponentFamily& family);

}  // namespace mixvb
