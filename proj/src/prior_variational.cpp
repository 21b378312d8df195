#include "mixvb/prior_variational.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mixvb/errors.hpp"

namespace mixvb {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728;

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error(std::string(what) + " must be positive and finite");
    }
}

}  // namespace

bool validate(const PriorSpec& prior, const ComponentFamily& family) {
    const int k = prior.k();
    if (k < 1) throw ShapeError("weight prior needs at least one component");
    for (double a : prior.weight_prior.concentration) require_positive(a, "weight concentration");

    if (const auto* d = std::get_if<DirichletPrior>(&prior.component_prior)) {
        const auto* mult = std::get_if<Multinomial>(&family);
        if (!mult) throw ConfigError("Dirichlet component prior requires the multinomial family");
        if (static_cast<int>(d->beta.size()) != mult->category_count) {
            throw ShapeError("Dirichlet prior length differs from V");
        }
        for (double b : d->beta) require_positive(b, "Dirichlet prior entry");
    } else if (const auto* g = std::get_if<GaussianMeanPrior>(&prior.component_prior)) {
        if (!std::holds_alternative<GaussianKnownVar>(family)) {
            throw ConfigError("Gaussian-mean prior requires the known-variance family");
        }
        require_positive(g->prior_variance, "prior variance");
    } else if (const auto* nig = std::get_if<NIGPrior>(&prior.component_prior)) {
        if (!std::holds_alternative<GaussianUnknownVar>(family)) {
            throw ConfigError("NIG prior requires the unknown-variance family");
        }
        require_positive(nig->prior_variance, "prior variance");
        require_positive(nig->ig_scale, "inverse-gamma scale");
    } else {
        const auto& f = std::get<FactorizedNormalIGPrior>(prior.component_prior);
        if (!std::holds_alternative<GaussianUnknownVar>(family)) {
            throw ConfigError("factorized Normal-IG prior requires the unknown-variance family");
        }
        require_positive(f.prior_variance, "prior variance");
        require_positive(f.ig_scale, "inverse-gamma scale");
    }

    const double lo = 2.0 / static_cast<double>(k);
    for (double a : prior.weight_prior.concentration) {
        if (k >= 2 && (a < lo || a > 1.0)) return false;
    }
    return true;
}

double expected_log_weight(const DirichletParams& weight_factor, int j) {
    if (j < 0 || j >= static_cast<int>(weight_factor.concentration.size())) {
        throw ShapeError("expected_log_weight: component index out of range");
    }
    double total = 0.0;
    for (double a : weight_factor.concentration) total += a;
    return digamma(weight_factor.concentration[static_cast<std::size_t>(j)]) - digamma(total);
}

double expected_log_component_density(const ComponentFactor& factor,
                                      const ComponentFamily& family, double x) {
    if (const auto* d = std::get_if<DirichletFactor>(&factor)) {
        const auto* mult = std::get_if<Multinomial>(&family);
        if (!mult) throw ConfigError("Dirichlet factor requires the multinomial family");
        const double r = std::nearbyint(x);
        if (r != x || r < 1.0 || r > static_cast<double>(mult->category_count)) {
            throw std::domain_error("categorical observation outside [1, V]");
        }
        if (static_cast<int>(d->params.concentration.size()) != mult->category_count) {
            throw ShapeError("Dirichlet factor length differs from V");
        }
        double total = 0.0;
        for (double g : d->params.concentration) total += g;
        return digamma(d->params.concentration[static_cast<std::size_t>(r) - 1]) - digamma(total);
    }
    if (const auto* g = std::get_if<GaussianFactor>(&factor)) {
        const auto* known = std::get_if<GaussianKnownVar>(&family);
        if (!known) throw ConfigError("Gaussian factor requires the known-variance family");
        const double v = known->component_variance;
        const double d2 = (x - g->mean) * (x - g->mean);
        return -0.5 * (kLog2Pi + std::log(v)) - (g->variance + d2) / (2.0 * v);
    }
    if (const auto* nig = std::get_if<NIGFactor>(&factor)) {
        if (!std::holds_alternative<GaussianUnknownVar>(family)) {
            throw ConfigError("NIG factor requires the unknown-variance family");
        }
        const NIGParams& p = nig->params;
        // E[log sigma2] = log b - psi(a); E[1/sigma2] = a/b; E[(x-mean)^2/sigma2]
        // picks up 1/precision_scale from the conditional spread of the mean.
        const double d2 = (x - p.location) * (x - p.location);
        return -0.5 * (kLog2Pi + std::log(p.scale) - digamma(p.shape)) -
               0.5 * (d2 * p.shape / p.scale + 1.0 / p.precision_scale);
    }
    const auto& f = std::get<NormalIGFactor>(factor);
    if (!std::holds_alternative<GaussianUnknownVar>(family)) {
        throw ConfigError("Normal-IG factor requires the unknown-variance family");
    }
    const double d2 = (x - f.gaussian.mean) * (x - f.gaussian.mean);
    return -0.5 * (kLog2Pi + std::log(f.ig.scale) - digamma(f.ig.shape)) -
           0.5 * (f.ig.shape / f.ig.scale) * (d2 + f.gaussian.variance);
}

double kl_state_to_prior(const VariationalState& state, const PriorSpec& prior) {
    if (state.k() != prior.k() ||
        static_cast<int>(state.component_factors.size()) != prior.k()) {
        throw ShapeError("kl_state_to_prior: state and prior disagree on K");
    }
    double kl = kl_dirichlet(state.weight_factor, prior.weight_prior);
    for (const ComponentFactor& factor : state.component_factors) {
        if (const auto* d = std::get_if<DirichletFactor>(&factor)) {
            const auto* dp = std::get_if<DirichletPrior>(&prior.component_prior);
            if (!dp) throw ConfigError("Dirichlet factor with non-Dirichlet prior");
            kl += kl_dirichlet(d->params, DirichletParams{dp->beta});
        } else if (const auto* g = std::get_if<GaussianFactor>(&factor)) {
            const auto* gp = std::get_if<GaussianMeanPrior>(&prior.component_prior);
            if (!gp) throw ConfigError("Gaussian factor with non-Gaussian prior");
            kl += kl_gaussian({g->mean, g->variance}, {0.0, gp->prior_variance});
        } else if (const auto* nig = std::get_if<NIGFactor>(&factor)) {
            const auto* np = std::get_if<NIGPrior>(&prior.component_prior);
            if (!np) throw ConfigError("NIG factor with non-NIG prior");
            kl += kl_nig(nig->params, {0.0, 1.0 / np->prior_variance, 1.0, np->ig_scale});
        } else {
            const auto& f = std::get<NormalIGFactor>(factor);
            const auto* fp = std::get_if<FactorizedNormalIGPrior>(&prior.component_prior);
            if (!fp) throw ConfigError("Normal-IG factor with non-factorized prior");
            kl += kl_gaussian(f.gaussian, {0.0, fp->prior_variance});
            kl += kl_inverse_gamma(f.ig, {1.0, fp->ig_scale});
        }
    }
    return kl;
}

VariationalState prior_equal_state(const PriorSpec& prior, const ComponentFamily& family) {
    validate(prior, family);
    VariationalState state;
    state.weight_factor = prior.weight_prior;
    state.n = 0;
    const int k = prior.k();
    state.component_factors.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        if (const auto* d = std::get_if<DirichletPrior>(&prior.component_prior)) {
            state.component_factors.push_back(DirichletFactor{DirichletParams{d->beta}});
        } else if (const auto* g = std::get_if<GaussianMeanPrior>(&prior.component_prior)) {
            state.component_factors.push_back(GaussianFactor{0.0, g->prior_variance});
        } else if (const auto* nig = std::get_if<NIGPrior>(&prior.component_prior)) {
            state.component_factors.push_back(
                NIGFactor{NIGParams{0.0, 1.0 / nig->prior_variance, 1.0, nig->ig_scale}});
        } else {
            const auto& f = std::get<FactorizedNormalIGPrior>(prior.component_prior);
            state.component_factors.push_back(
                NormalIGFactor{GaussianParams{0.0, f.prior_variance},
                               InverseGammaParams{1.0, f.ig_scale}});
        }
    }
    return state;
}

}  // namespace mixvb
