#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mixvb/special_math.hpp"

namespace mixvb {

struct Multinomial {
    int category_count = 2;  // V >= 2
};

struct GaussianKnownVar {
    double component_variance = 1.0;  // > 0, shared across components
};

struct GaussianUnknownVar {};

using ComponentFamily = std::variant<Multinomial, GaussianKnownVar, GaussianUnknownVar>;

/// Component parameter record. Multinomial: category probabilities (length V).
/// Known-variance Gaussian: the mean. Unknown-variance Gaussian: mean and
/// variance together.
using ComponentParams = std::variant<std::vector<double>, double, GaussianParams>;

struct MixtureParams {
    ComponentFamily family;
    std::vector<double> weights;  // simplex, length K
    std::vector<ComponentParams> components;
};

/// Throws ShapeError / ConfigError / domain errors when the record is not a
/// valid mixture (weights off the simplex by more than 1e-9, wrong component
/// kinds for the family, invalid parameter ranges).
void validate(const MixtureParams& params);

enum class DataKind { Categorical, Real };

/// One observed column. A default-constructed Dataset (kind unset) is the
/// empty dataset of unspecified kind and is accepted by every family.
struct Dataset {
    std::optional<DataKind> kind;
    int category_count = 0;        // V when categorical
    std::vector<int> categories;   // 1-based values in [1, V]
    std::vector<double> reals;

    std::size_t size() const {
        return kind == DataKind::Categorical ? categories.size() : reals.size();
    }
    /// Observation i as a double (categories keep their integer value).
    double at(std::size_t i) const {
        return kind == DataKind::Categorical ? static_cast<double>(categories[i]) : reals[i];
    }
};

/// Throws ConfigError when the dataset kind cannot be modeled by the family.
void require_compatible(const Dataset& data, const ComponentFamily& family);

/// log density of one component at x. For multinomials x is a category in
/// [1, V] encoded as a double.
double log_component_density(const ComponentFamily& family, const ComponentParams& component,
                             double x);

/// log of sum_j weight_j * component_j(x); -infinity when every term vanishes.
double log_mixture_density(const MixtureParams& params, double x);

/// Sum of log_mixture_density over the dataset; 0 for an empty dataset.
double log_likelihood(const MixtureParams& params, const Dataset& data);

Dataset sample_mixture(const MixtureParams& params, std::size_t n, std::uint64_t seed);

/// One draw from the mixture (categories returned as their double value).
/// Skips validation; sample_mixture validates once and loops over this.
double sample_mixture_one(const MixtureParams& params, Rng& rng);

std::vector<double> sample_simplex_dirichlet(const DirichletParams& concentration,
                                             std::uint64_t seed);

/// KL between single components of the same family (exact closed forms).
double component_kl(const ComponentFamily& family, const ComponentParams& truth,
                    const ComponentParams& fitted);

/// Decomposition bound: KL(truth mixture, fitted mixture) <=
/// kl(weights) + sum_j truth_weight_j * kl(component_j). Requires matching
/// family tags and equal K.
double mixture_kl_upper_bound(const MixtureParams& truth, const MixtureParams& fitted);

}  // namespace mixvb
