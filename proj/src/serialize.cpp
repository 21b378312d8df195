#include "mixvb/serialize.hpp"

#include <string>

#include "mixvb/errors.hpp"

namespace mixvb {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw InputError(what); }

json require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        bad(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

std::string type_of(const json& j) {
    const json t = require(j, "type");
    if (!t.is_string()) bad("'type' must be a string");
    return t.get<std::string>();
}

}  // namespace

void to_json(json& j, const ComponentFamily& family) {
    if (const auto* mult = std::get_if<Multinomial>(&family)) {
        j = json{{"type", "multinomial"}, {"categories", mult->category_count}};
    } else if (const auto* known = std::get_if<GaussianKnownVar>(&family)) {
        j = json{{"type", "gauss_known"}, {"component_variance", known->component_variance}};
    } else {
        j = json{{"type", "gauss_unknown"}};
    }
}

void from_json(const json& j, ComponentFamily& family) {
    const std::string type = type_of(j);
    if (type == "multinomial") {
        family = Multinomial{require(j, "categories").get<int>()};
    } else if (type == "gauss_known") {
        family = GaussianKnownVar{require(j, "component_variance").get<double>()};
    } else if (type == "gauss_unknown") {
        family = GaussianUnknownVar{};
    } else {
        bad("unknown family type '" + type + "'");
    }
}

void to_json(json& j, const MixtureParams& params) {
    json components = json::array();
    for (const ComponentParams& c : params.components) {
        if (const auto* probs = std::get_if<std::vector<double>>(&c)) {
            components.push_back(*probs);
        } else if (const auto* mean = std::get_if<double>(&c)) {
            components.push_back(*mean);
        } else {
            const auto& g = std::get<GaussianParams>(c);
            components.push_back(json{{"mean", g.mean}, {"variance", g.variance}});
        }
    }
    j = json{{"family", params.family}, {"weights", params.weights}, {"components", components}};
}

void from_json(const json& j, MixtureParams& params) {
    params.family = require(j, "family").get<ComponentFamily>();
    params.weights = require(j, "weights").get<std::vector<double>>();
    params.components.clear();
    for (const json& c : require(j, "components")) {
        if (std::holds_alternative<Multinomial>(params.family)) {
            if (!c.is_array()) bad("multinomial component must be a probability array");
            params.components.emplace_back(c.get<std::vector<double>>());
        } else if (std::holds_alternative<GaussianKnownVar>(params.family)) {
            if (!c.is_number()) bad("known-variance component must be a mean");
            params.components.emplace_back(c.get<double>());
        } else {
            params.components.emplace_back(GaussianParams{require(c, "mean").get<double>(),
                                                          require(c, "variance").get<double>()});
        }
    }
}

void to_json(json& j, const ComponentPrior& prior) {
    if (const auto* d = std::get_if<DirichletPrior>(&prior)) {
        j = json{{"type", "dirichlet"}, {"beta", d->beta}};
    } else if (const auto* g = std::get_if<GaussianMeanPrior>(&prior)) {
        j = json{{"type", "gaussian_mean"}, {"prior_variance", g->prior_variance}};
    } else if (const auto* nig = std::get_if<NIGPrior>(&prior)) {
        j = json{{"type", "nig"},
                 {"prior_variance", nig->prior_variance},
                 {"ig_scale", nig->ig_scale}};
    } else {
        const auto& f = std::get<FactorizedNormalIGPrior>(prior);
        j = json{{"type", "factorized_normal_ig"},
                 {"prior_variance", f.prior_variance},
                 {"ig_scale", f.ig_scale}};
    }
}

void from_json(const json& j, ComponentPrior& prior) {
    const std::string type = type_of(j);
    if (type == "dirichlet") {
        prior = DirichletPrior{require(j, "beta").get<std::vector<double>>()};
    } else if (type == "gaussian_mean") {
        prior = GaussianMeanPrior{require(j, "prior_variance").get<double>()};
    } else if (type == "nig") {
        prior = NIGPrior{require(j, "prior_variance").get<double>(),
                         require(j, "ig_scale").get<double>()};
    } else if (type == "factorized_normal_ig") {
        prior = FactorizedNormalIGPrior{require(j, "prior_variance").get<double>(),
                                        require(j, "ig_scale").get<double>()};
    } else {
        bad("unknown component-prior type '" + type + "'");
    }
}

void to_json(json& j, const PriorSpec& prior) {
    j = json{{"weight_prior", prior.weight_prior.concentration},
             {"component_prior", prior.component_prior}};
}

void from_json(const json& j, PriorSpec& prior) {
    prior.weight_prior.concentration = require(j, "weight_prior").get<std::vector<double>>();
    prior.component_prior = require(j, "component_prior").get<ComponentPrior>();
}

void to_json(json& j, const ComponentFactor& factor) {
    if (const auto* d = std::get_if<DirichletFactor>(&factor)) {
        j = json{{"type", "dirichlet"}, {"concentration", d->params.concentration}};
    } else if (const auto* g = std::get_if<GaussianFactor>(&factor)) {
        j = json{{"type", "gaussian"}, {"mean", g->mean}, {"variance", g->variance}};
    } else if (const auto* nig = std::get_if<NIGFactor>(&factor)) {
        j = json{{"type", "nig"},
                 {"location", nig->params.location},
                 {"precision_scale", nig->params.precision_scale},
                 {"shape", nig->params.shape},
                 {"scale", nig->params.scale}};
    } else {
        const auto& f = std::get<NormalIGFactor>(factor);
        j = json{{"type", "normal_ig"},
                 {"mean", f.gaussian.mean},
                 {"variance", f.gaussian.variance},
                 {"shape", f.ig.shape},
                 {"scale", f.ig.scale}};
    }
}

void from_json(const json& j, ComponentFactor& factor) {
    const std::string type = type_of(j);
    if (type == "dirichlet") {
        factor = DirichletFactor{
            DirichletParams{require(j, "concentration").get<std::vector<double>>()}};
    } else if (type == "gaussian") {
        factor = GaussianFactor{require(j, "mean").get<double>(),
                                require(j, "variance").get<double>()};
    } else if (type == "nig") {
        factor = NIGFactor{NIGParams{
            require(j, "location").get<double>(), require(j, "precision_scale").get<double>(),
            require(j, "shape").get<double>(), require(j, "scale").get<double>()}};
    } else if (type == "normal_ig") {
        factor = NormalIGFactor{
            GaussianParams{require(j, "mean").get<double>(), require(j, "variance").get<double>()},
            InverseGammaParams{require(j, "shape").get<double>(),
                               require(j, "scale").get<double>()}};
    } else {
        bad("unknown component-factor type '" + type + "'");
    }
}

void to_json(json& j, const VariationalState& state) {
    json rows = json::array();
    for (std::size_t i = 0; i < state.n; ++i) {
        json row = json::array();
        for (int jj = 0; jj < state.k(); ++jj) row.push_back(state.resp(i, jj));
        rows.push_back(std::move(row));
    }
    j = json{{"weight_factor", state.weight_factor.concentration},
             {"component_factors", state.component_factors},
             {"responsibilities", rows}};
}

void from_json(const json& j, VariationalState& state) {
    state.weight_factor.concentration = require(j, "weight_factor").get<std::vector<double>>();
    state.component_factors =
        require(j, "component_factors").get<std::vector<ComponentFactor>>();
    const json rows = require(j, "responsibilities");
    if (!rows.is_array()) bad("'responsibilities' must be an array of rows");
    state.n = rows.size();
    const std::size_t k = state.component_factors.size();
    if (state.weight_factor.concentration.size() != k) {
        bad("weight_factor and component_factors disagree on K");
    }
    state.responsibilities.clear();
    state.responsibilities.reserve(state.n * k);
    for (const json& row : rows) {
        if (!row.is_array() || row.size() != k) bad("responsibility row of wrong length");
        for (const json& v : row) state.responsibilities.push_back(v.get<double>());
    }
}

void to_json(json& j, const McEstimate& estimate) {
    j = json{{"value", estimate.value}, {"std_error", estimate.std_error}};
}

void from_json(const json& j, McEstimate& estimate) {
    estimate.value = require(j, "value").get<double>();
    estimate.std_error = require(j, "std_error").get<double>();
}

namespace {

std::string init_name(InitStrategy init) {
    switch (init) {
        case InitStrategy::RandomResponsibilities: return "random_responsibilities";
        case InitStrategy::KMeansLike: return "kmeans_like";
        case InitStrategy::RandomPoints: return "random_points";
        case InitStrategy::PriorDraw: return "prior_draw";
    }
    return "random_responsibilities";
}

InitStrategy init_of(const std::string& name) {
    if (name == "random_responsibilities") return InitStrategy::RandomResponsibilities;
    if (name == "kmeans_like") return InitStrategy::KMeansLike;
    if (name == "random_points") return InitStrategy::RandomPoints;
    if (name == "prior_draw") return InitStrategy::PriorDraw;
    bad("unknown init strategy '" + name + "'");
}

}  // namespace

void to_json(json& j, const FitConfig& config) {
    j = json{{"alpha", config.alpha},
             {"max_sweeps", config.max_sweeps},
             {"rel_tol", config.rel_tol},
             {"restarts", config.restarts},
             {"init", init_name(config.init)},
             {"seed", config.seed},
             {"threads", config.threads},
             {"elbo_mc_samples", config.elbo_mc_samples}};
}

void from_json(const json& j, FitConfig& config) {
    config = FitConfig{};
    config.alpha = j.value("alpha", config.alpha);
    config.max_sweeps = j.value("max_sweeps", config.max_sweeps);
    config.rel_tol = j.value("rel_tol", config.rel_tol);
    config.restarts = j.value("restarts", config.restarts);
    if (j.contains("init")) config.init = init_of(j.at("init").get<std::string>());
    config.seed = j.value("seed", config.seed);
    config.threads = j.value("threads", config.threads);
    config.elbo_mc_samples = j.value("elbo_mc_samples", config.elbo_mc_samples);
    config.validate_monotonicity = j.value("validate_monotonicity", false);
}

void to_json(json& j, const FitResult& result) {
    j = json{{"state", result.state},
             {"elbo_trace", result.elbo_trace},
             {"surrogate_elbo", result.surrogate_elbo},
             {"sweeps", result.sweeps},
             {"converged", result.converged},
             {"restart_index", result.restart_index},
             {"warnings", result.warnings}};
    if (result.elbo_mc.has_value()) j["elbo_mc"] = *result.elbo_mc;
}

void to_json(json& j, const SelectionResult& result) {
    json entries = json::array();
    for (const SelectionEntry& e : result.entries) {
        entries.push_back(json{{"k", e.k},
                               {"elbo", e.elbo},
                               {"log_weight", e.log_weight},
                               {"score", e.score},
                               {"fit", e.fit}});
    }
    j = json{{"selected_k", result.selected_k}, {"entries", entries}};
}

void to_json(json& j, const EmResult& result) {
    j = json{{"weights", result.weights},
             {"means", result.means},
             {"loglik", result.loglik},
             {"loglik_trace", result.loglik_trace},
             {"iters", result.iters},
             {"converged", result.converged},
             {"restart_index", result.restart_index},
             {"reseeded_components", result.reseeded_components}};
}

void to_json(json& j, const RateReport& report) {
    j = json{{"r_nk", report.r_nk}, {"bound", report.bound}};
}

void to_json(json& j, const BenchProtocol& protocol) {
    j = json{{"datasets", protocol.datasets},
             {"samples", protocol.samples},
             {"k", protocol.k},
             {"weight_concentration", protocol.weight_concentration},
             {"mean_variance", protocol.mean_variance},
             {"component_variance", protocol.component_variance},
             {"runs", protocol.runs},
             {"vb_alphas", protocol.vb_alphas},
             {"prior_variance", protocol.prior_variance},
             {"weight_prior_concentration", protocol.weight_prior_concentration},
             {"max_sweeps", protocol.max_sweeps},
             {"rel_tol", protocol.rel_tol},
             {"seed", protocol.seed},
             {"threads", protocol.threads}};
}

void from_json(const json& j, BenchProtocol& protocol) {
    protocol = BenchProtocol{};
    protocol.datasets = j.value("datasets", protocol.datasets);
    protocol.samples = j.value("samples", protocol.samples);
    protocol.k = j.value("k", protocol.k);
    protocol.weight_concentration = j.value("weight_concentration", protocol.weight_concentration);
    protocol.mean_variance = j.value("mean_variance", protocol.mean_variance);
    protocol.component_variance = j.value("component_variance", protocol.component_variance);
    protocol.runs = j.value("runs", protocol.runs);
    protocol.vb_alphas = j.value("vb_alphas", protocol.vb_alphas);
    protocol.prior_variance = j.value("prior_variance", protocol.prior_variance);
    protocol.weight_prior_concentration =
        j.value("weight_prior_concentration", protocol.weight_prior_concentration);
    protocol.max_sweeps = j.value("max_sweeps", protocol.max_sweeps);
    protocol.rel_tol = j.value("rel_tol", protocol.rel_tol);
    protocol.seed = j.value("seed", protocol.seed);
    protocol.threads = j.value("threads", protocol.threads);
}

namespace {

json aggregate_to_json(const BenchAggregate& agg) {
    return json{{"method", agg.method},
                {"mae_weights", json{{"mean", agg.weights_mean}, {"sd", agg.weights_sd}}},
                {"mae_means_mean", agg.means_mean},
                {"mae_means_sd", agg.means_sd}};
}

}  // namespace

void to_json(json& j, const BenchReport& report) {
    json truths = json::array();
    for (const BenchTruth& t : report.truths) {
        truths.push_back(
            json{{"dataset", t.dataset}, {"weights", t.weights}, {"means", t.means}});
    }
    json runs = json::array();
    for (const BenchRun& row : report.runs) {
        json mae = json{{"weights", row.mae.weights}, {"per_mean", row.mae.per_mean}};
        runs.push_back(json{{"method", row.method},
                            {"dataset", row.dataset},
                            {"restart", row.run},
                            {"mae", mae},
                            {"objective", row.objective}});
    }
    json by_mae = json::array();
    for (const BenchAggregate& agg : report.by_lowest_mae) by_mae.push_back(aggregate_to_json(agg));
    json by_obj = json::array();
    for (const BenchAggregate& agg : report.by_highest_objective) {
        by_obj.push_back(aggregate_to_json(agg));
    }
    j = json{{"protocol", report.protocol},
             {"truths", truths},
             {"runs", runs},
             {"by_lowest_mae", by_mae},
             {"by_highest_objective", by_obj}};
}

void to_json(json& j, const DivergenceProtocol& protocol) {
    j = json{{"n_grid", protocol.n_grid},
             {"truth", protocol.truth},
             {"alpha", protocol.alpha},
             {"prior_variance", protocol.prior_variance},
             {"weight_prior_concentration", protocol.weight_prior_concentration},
             {"beta", protocol.beta},
             {"restarts", protocol.restarts},
             {"max_sweeps", protocol.max_sweeps},
             {"rel_tol", protocol.rel_tol},
             {"mc_samples", protocol.mc_samples},
             {"seeds", protocol.seeds},
             {"seed", protocol.seed},
             {"theta_sampling", protocol.theta_sampling},
             {"theta_draws", protocol.theta_draws},
             {"threads", protocol.threads}};
}

void from_json(const json& j, DivergenceProtocol& protocol) {
    protocol = DivergenceProtocol{};
    protocol.truth = require(j, "truth").get<MixtureParams>();
    protocol.n_grid = j.value("n_grid", protocol.n_grid);
    protocol.alpha = j.value("alpha", protocol.alpha);
    protocol.prior_variance = j.value("prior_variance", protocol.prior_variance);
    protocol.weight_prior_concentration =
        j.value("weight_prior_concentration", protocol.weight_prior_concentration);
    protocol.beta = j.value("beta", protocol.beta);
    protocol.restarts = j.value("restarts", protocol.restarts);
    protocol.max_sweeps = j.value("max_sweeps", protocol.max_sweeps);
    protocol.rel_tol = j.value("rel_tol", protocol.rel_tol);
    protocol.mc_samples = j.value("mc_samples", protocol.mc_samples);
    protocol.seeds = j.value("seeds", protocol.seeds);
    protocol.seed = j.value("seed", protocol.seed);
    protocol.theta_sampling = j.value("theta_sampling", protocol.theta_sampling);
    protocol.theta_draws = j.value("theta_draws", protocol.theta_draws);
    protocol.threads = j.value("threads", protocol.threads);
}

void to_json(json& j, const DivergenceRow& row) {
    j = json{{"n", row.n},
             {"seed", row.seed},
             {"estimate", row.estimate},
             {"std_error", row.std_error},
             {"bound", row.bound},
             {"within_bound", row.within_bound}};
}

}  // namespace mixvb
