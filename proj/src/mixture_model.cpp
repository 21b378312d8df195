#include "mixvb/mixture_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mixvb/errors.hpp"

namespace mixvb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728;

const std::vector<double>& as_probs(const ComponentParams& c) {
    const auto* p = std::get_if<std::vector<double>>(&c);
    if (!p) throw ConfigError("multinomial family expects probability-vector components");
    return *p;
}

double as_mean(const ComponentParams& c) {
    const auto* m = std::get_if<double>(&c);
    if (!m) throw ConfigError("known-variance family expects mean-valued components");
    return *m;
}

const GaussianParams& as_gaussian(const ComponentParams& c) {
    const auto* g = std::get_if<GaussianParams>(&c);
    if (!g) throw ConfigError("unknown-variance family expects mean+variance components");
    return *g;
}

int category_at(double x, int category_count) {
    const double r = std::nearbyint(x);
    if (r != x || r < 1.0 || r > static_cast<double>(category_count)) {
        throw std::domain_error("categorical observation outside [1, V]: " + std::to_string(x));
    }
    return static_cast<int>(r);
}

}  // namespace

void validate(const MixtureParams& params) {
    const std::size_t k = params.weights.size();
    if (k == 0) throw ShapeError("mixture needs at least one component");
    if (params.components.size() != k) {
        throw ShapeError("weights and components disagree on K");
    }
    double total = 0.0;
    for (double w : params.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::domain_error("mixture weight outside [0, 1]");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::domain_error("mixture weights do not sum to 1");

    if (const auto* mult = std::get_if<Multinomial>(&params.family)) {
        if (mult->category_count < 2) throw ConfigError("multinomial needs V >= 2");
        for (const auto& c : params.components) {
            const auto& probs = as_probs(c);
            if (static_cast<int>(probs.size()) != mult->category_count) {
                throw ShapeError("component probability vector is not length V");
            }
            double s = 0.0;
            for (double p : probs) {
                if (!(p >= 0.0) || !std::isfinite(p)) throw std::domain_error("category probability outside [0, 1]");
                s += p;
            }
            if (std::abs(s - 1.0) > 1e-9) throw std::domain_error("category probabilities do not sum to 1");
        }
    } else if (const auto* known = std::get_if<GaussianKnownVar>(&params.family)) {
        if (!(known->component_variance > 0.0)) throw std::domain_error("component variance must be positive");
        for (const auto& c : params.components) {
            if (!std::isfinite(as_mean(c))) throw std::domain_error("non-finite component mean");
        }
    } else {
        for (const auto& c : params.components) {
            const auto& g = as_gaussian(c);
            if (!std::isfinite(g.mean) || !(g.variance > 0.0)) {
                throw std::domain_error("invalid Gaussian component parameters");
            }
        }
    }
}

void require_compatible(const Dataset& data, const ComponentFamily& family) {
    if (!data.kind.has_value()) return;  // empty, unspecified kind
    const bool categorical = std::holds_alternative<Multinomial>(family);
    if (categorical && *data.kind != DataKind::Categorical) {
        throw ConfigError("multinomial family needs a categorical dataset");
    }
    if (!categorical && *data.kind != DataKind::Real) {
        throw ConfigError("Gaussian families need a real-valued dataset");
    }
    if (categorical) {
        const int v = std::get<Multinomial>(family).category_count;
        if (data.category_count != v) {
            throw ConfigError("dataset V=" + std::to_string(data.category_count) +
                              " does not match family V=" + std::to_string(v));
        }
    }
}

double log_component_density(const ComponentFamily& family, const ComponentParams& component,
                             double x) {
    if (const auto* mult = std::get_if<Multinomial>(&family)) {
        const auto& probs = as_probs(component);
        const int cat = category_at(x, mult->category_count);
        const double p = probs[static_cast<std::size_t>(cat - 1)];
        return p > 0.0 ? std::log(p) : kNegInf;
    }
    if (const auto* known = std::get_if<GaussianKnownVar>(&family)) {
        const double v = known->component_variance;
        const double d = x - as_mean(component);
        return -0.5 * (kLog2Pi + std::log(v)) - d * d / (2.0 * v);
    }
    const GaussianParams& g = as_gaussian(component);
    const double d = x - g.mean;
    return -0.5 * (kLog2Pi + std::log(g.variance)) - d * d / (2.0 * g.variance);
}

double log_mixture_density(const MixtureParams& params, double x) {
    const std::size_t k = params.weights.size();
    double best = kNegInf;
    std::vector<double> terms(k, kNegInf);
    for (std::size_t j = 0; j < k; ++j) {
        if (params.weights[j] == 0.0) continue;
        terms[j] = std::log(params.weights[j]) +
                   log_component_density(params.family, params.components[j], x);
        best = std::max(best, terms[j]);
    }
    if (best == kNegInf) return kNegInf;
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (terms[j] != kNegInf) acc += std::exp(terms[j] - best);
    }
    return best + std::log(acc);
}

double log_likelihood(const MixtureParams& params, const Dataset& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) total += log_mixture_density(params, data.at(i));
    return total;
}

double sample_mixture_one(const MixtureParams& params, Rng& rng) {
    auto pick = [&](const std::vector<double>& probs) {
        double u = rng.uniform();
        std::size_t j = 0;
        for (; j + 1 < probs.size(); ++j) {
            if (u < probs[j]) break;
            u -= probs[j];
        }
        return j;
    };
    const std::size_t j = pick(params.weights);
    if (std::holds_alternative<Multinomial>(params.family)) {
        const auto& probs = std::get<std::vector<double>>(params.components[j]);
        return static_cast<double>(pick(probs) + 1);
    }
    if (const auto* known = std::get_if<GaussianKnownVar>(&params.family)) {
        const double mean = std::get<double>(params.components[j]);
        return mean + std::sqrt(known->component_variance) * rng.normal();
    }
    const auto& g = std::get<GaussianParams>(params.components[j]);
    return g.mean + std::sqrt(g.variance) * rng.normal();
}

Dataset sample_mixture(const MixtureParams& params, std::size_t n, std::uint64_t seed) {
    validate(params);
    Dataset out;
    const bool categorical = std::holds_alternative<Multinomial>(params.family);
    out.kind = categorical ? DataKind::Categorical : DataKind::Real;
    if (categorical) out.category_count = std::get<Multinomial>(params.family).category_count;

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = sample_mixture_one(params, rng);
        if (categorical) {
            out.categories.push_back(static_cast<int>(x));
        } else {
            out.reals.push_back(x);
        }
    }
    return out;
}

std::vector<double> sample_simplex_dirichlet(const DirichletParams& concentration,
                                             std::uint64_t seed) {
    if (concentration.concentration.empty()) throw ShapeError("empty Dirichlet concentration");
    for (double a : concentration.concentration) {
        if (!(a > 0.0)) throw std::domain_error("Dirichlet concentration must be positive");
    }
    Rng rng(seed);
    return rng.dirichlet(concentration.concentration);
}

double component_kl(const ComponentFamily& family, const ComponentParams& truth,
                    const ComponentParams& fitted) {
    if (std::holds_alternative<Multinomial>(family)) {
        return kl_categorical(as_probs(truth), as_probs(fitted));
    }
    if (const auto* known = std::get_if<GaussianKnownVar>(&family)) {
        const double v = known->component_variance;
        return kl_gaussian({as_mean(truth), v}, {as_mean(fitted), v});
    }
    return kl_gaussian(as_gaussian(truth), as_gaussian(fitted));
}

double mixture_kl_upper_bound(const MixtureParams& truth, const MixtureParams& fitted) {
    validate(truth);
    validate(fitted);
    if (truth.family.index() != fitted.family.index()) {
        throw ConfigError("mixture_kl_upper_bound: family tags differ");
    }
    if (const auto* m1 = std::get_if<Multinomial>(&truth.family)) {
        if (m1->category_count != std::get<Multinomial>(fitted.family).category_count) {
            throw ConfigError("mixture_kl_upper_bound: category counts differ");
        }
    }
    if (const auto* g1 = std::get_if<GaussianKnownVar>(&truth.family)) {
        if (g1->component_variance != std::get<GaussianKnownVar>(fitted.family).component_variance) {
            throw ConfigError("mixture_kl_upper_bound: known variances differ");
        }
    }
    if (truth.weights.size() != fitted.weights.size()) {
        throw ShapeError("mixture_kl_upper_bound: component counts differ");
    }
    double bound = kl_categorical(truth.weights, fitted.weights);
    for (std::size_t j = 0; j < truth.weights.size(); ++j) {
        if (truth.weights[j] == 0.0) continue;
        bound += truth.weights[j] * component_kl(truth.family, truth.components[j],
                                                 fitted.components[j]);
    }
    return bound;
}

}  // namespace mixvb
