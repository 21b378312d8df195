#include <doctest.h>
#include <json.hpp>
#include <string>

#include "mixvb/errors.hpp"
#include "mixvb/serialize.hpp"

using namespace mixvb;
using nlohmann::json;

TEST_CASE("component family round-trips through JSON") {
    for (const ComponentFamily& family :
         {ComponentFamily{Multinomial{5}}, ComponentFamily{GaussianKnownVar{2.5}},
          ComponentFamily{GaussianUnknownVar{}}}) {
        const json j = family;
        ComponentFamily back = j.get<ComponentFamily>();
        const json j2 = back;
        CHECK(j == j2);
    }
    CHECK(json(ComponentFamily{Multinomial{5}})["type"] == "multinomial");
    CHECK(json(ComponentFamily{GaussianKnownVar{2.5}})["component_variance"] == 2.5);
}

TEST_CASE("unknown type tags are input errors") {
    const auto family_of = [](const json& j) { return j.get<ComponentFamily>(); };
    const auto prior_of = [](const json& j) { return j.get<ComponentPrior>(); };
    const auto factor_of = [](const json& j) { return j.get<ComponentFactor>(); };
    const json weibull = {{"type", "weibull"}};
    const json untagged = {{"kind", "multinomial"}};
    const json missing_field = {{"type", "gauss_known"}};
    const json laplace = {{"type", "laplace"}};
    const json student = {{"type", "student"}};
    CHECK_THROWS_AS(family_of(weibull), InputError);
    CHECK_THROWS_AS(family_of(untagged), InputError);
    CHECK_THROWS_AS(family_of(missing_field), InputError);
    CHECK_THROWS_AS(prior_of(laplace), InputError);
    CHECK_THROWS_AS(factor_of(student), InputError);
}

TEST_CASE("mixture params round-trip") {
    MixtureParams p;
    p.family = GaussianKnownVar{1.0};
    p.weights = {0.25, 0.75};
    p.components = {ComponentParams{-1.5}, ComponentParams{2.0}};
    const json j = p;
    const MixtureParams back = j.get<MixtureParams>();
    CHECK(back.weights == p.weights);
    CHECK(json(back) == j);

    MixtureParams m;
    m.family = Multinomial{3};
    m.weights = {1.0};
    m.components = {ComponentParams{std::vector<double>{0.2, 0.3, 0.5}}};
    CHECK(json(m).at("components").at(0).is_array());
    CHECK(json(json(m).get<MixtureParams>()) == json(m));

    MixtureParams u;
    u.family = GaussianUnknownVar{};
    u.weights = {1.0};
    u.components = {ComponentParams{GaussianParams{0.5, 2.0}}};
    CHECK(json(json(u).get<MixtureParams>()) == json(u));
}

TEST_CASE("prior spec round-trips for every prior kind") {
    for (const ComponentPrior& cp :
         {ComponentPrior{DirichletPrior{{1.0, 0.5}}}, ComponentPrior{GaussianMeanPrior{4.0}},
          ComponentPrior{NIGPrior{2.0, 1.5}}, ComponentPrior{FactorizedNormalIGPrior{3.0, 0.5}}}) {
        PriorSpec prior;
        prior.weight_prior = DirichletParams{{1.0, 1.0, 1.0}};
        prior.component_prior = cp;
        const json j = prior;
        const PriorSpec back = j.get<PriorSpec>();
        CHECK(json(back) == j);
        CHECK(back.k() == 3);
    }
}

TEST_CASE("variational state round-trips") {
    VariationalState s;
    s.weight_factor = DirichletParams{{2.0, 3.0}};
    s.component_factors = {ComponentFactor{GaussianFactor{1.0, 0.5}},
                           ComponentFactor{GaussianFactor{-1.0, 0.25}}};
    s.responsibilities = {0.9, 0.1, 0.2, 0.8};
    s.n = 2;
    const json j = s;
    const VariationalState back = j.get<VariationalState>();
    CHECK(back.responsibilities == s.responsibilities);
    CHECK(back.n == 2);
    CHECK(json(back) == j);

    VariationalState nig;
    nig.weight_factor = DirichletParams{{1.0}};
    nig.component_factors = {ComponentFactor{NIGFactor{NIGParams{0.0, 1.0, 2.0, 3.0}}}};
    nig.n = 0;
    CHECK(json(json(nig).get<VariationalState>()) == json(nig));

    VariationalState mixed;
    mixed.weight_factor = DirichletParams{{1.0}};
    mixed.component_factors = {
        ComponentFactor{NormalIGFactor{GaussianParams{0.5, 1.0}, InverseGammaParams{2.0, 1.0}}}};
    mixed.n = 0;
    CHECK(json(json(mixed).get<VariationalState>()) == json(mixed));
}

TEST_CASE("fit config round-trips and rejects unknown init strategies") {
    FitConfig config;
    config.alpha = 0.4;
    config.max_sweeps = 77;
    config.restarts = 3;
    config.init = InitStrategy::RandomPoints;
    config.seed = 123;
    config.elbo_mc_samples = 50;
    const json j = config;
    CHECK(j.at("init") == "random_points");
    const FitConfig back = j.get<FitConfig>();
    CHECK(back.alpha == 0.4);
    CHECK(back.max_sweeps == 77);
    CHECK(back.init == InitStrategy::RandomPoints);
    CHECK(back.seed == 123);

    json bad = j;
    bad["init"] = "kmeanz";
    CHECK_THROWS_AS(bad.get<FitConfig>(), InputError);

    // Missing fields fall back to defaults rather than erroring.
    const FitConfig partial = json{{"alpha", 0.9}}.get<FitConfig>();
    CHECK(partial.alpha == 0.9);
    CHECK(partial.max_sweeps == FitConfig{}.max_sweeps);
}

TEST_CASE("result records serialize with stable keys") {
    const json mc = McEstimate{1.5, 0.25};
    CHECK(mc.at("value") == 1.5);
    CHECK(mc.at("std_error") == 0.25);
    CHECK(json(mc.get<McEstimate>()) == mc);

    const json rate = RateReport{0.01, 0.12};
    CHECK(rate.at("r_nk") == 0.01);
    CHECK(rate.at("bound") == 0.12);

    DivergenceRow row;
    row.n = 100;
    row.seed = 7;
    row.estimate = 0.5;
    row.std_error = 0.1;
    row.bound = 0.6;
    row.within_bound = true;
    const json rj = row;
    CHECK(rj.at("n") == 100);
    CHECK(rj.at("within_bound") == true);
}

TEST_CASE("bench and divergence protocols round-trip") {
    BenchProtocol bench;
    bench.datasets = 4;
    bench.samples = 321;
    bench.vb_alphas = {0.25, 1.0};
    bench.mean_variance = 100.0;
    bench.seed = 46;
    const json bj = bench;
    const BenchProtocol bback = bj.get<BenchProtocol>();
    CHECK(json(bback) == bj);

    DivergenceProtocol div;
    div.truth.family = GaussianKnownVar{1.0};
    div.truth.weights = {0.5, 0.5};
    div.truth.components = {ComponentParams{-4.0}, ComponentParams{4.0}};
    div.n_grid = {100, 200};
    div.alpha = 0.5;
    div.seeds = 3;
    const json dj = div;
    const DivergenceProtocol dback = dj.get<DivergenceProtocol>();
    CHECK(json(dback) == dj);
}

TEST_CASE("serialization output is byte-stable") {
    VariationalState s;
    s.weight_factor = DirichletParams{{2.0, 3.0}};
    s.component_factors = {ComponentFactor{GaussianFactor{1.0 / 3.0, 0.1}},
                           ComponentFactor{GaussianFactor{-2.0 / 7.0, 0.2}}};
    s.responsibilities = {0.9, 0.1, 0.2, 0.8};
    s.n = 2;
    const std::string a = json(s).dump();
    const std::string b = json(s).dump();
    CHECK(a == b);
    // 17 significant digits survive the round-trip.
    const VariationalState back = json::parse(a).get<VariationalState>();
    CHECK(std::get<GaussianFactor>(back.component_factors[0]).mean == 1.0 / 3.0);
    CHECK(std::get<GaussianFactor>(back.component_factors[1]).mean == -2.0 / 7.0);
}
