#include <cmath>
#include <doctest.h>
#include <string>
#include <vector>

#include "mixvb/bench_harness.hpp"
#include "mixvb/errors.hpp"
#include "mixvb/rates.hpp"

using namespace mixvb;

namespace {
MixtureParams two_comp_gauss(double a, double b, double w0 = 0.5) {
    MixtureParams p;
    p.family = GaussianKnownVar{1.0};
    p.weights = {w0, 1.0 - w0};
    p.components = {ComponentParams{a}, ComponentParams{b}};
    return p;
}
}  // namespace

TEST_CASE("mean_absolute_error fixtures") {
    const MaeBreakdown zero =
        mean_absolute_error({0.3, 0.7}, {-1.0, 2.0}, {0.3, 0.7}, {-1.0, 2.0});
    CHECK(zero.weights == 0.0);
    CHECK(zero.per_mean == std::vector<double>{0.0, 0.0});

    // Component labels are arbitrary: a permuted estimate is a perfect fit.
    const MaeBreakdown perm =
        mean_absolute_error({0.3, 0.7}, {-1.0, 2.0}, {0.7, 0.3}, {2.0, -1.0});
    CHECK(perm.weights == 0.0);
    CHECK(perm.per_mean == std::vector<double>{0.0, 0.0});

    const MaeBreakdown shifted = mean_absolute_error(
        {0.2, 0.3, 0.5}, {0.0, 1.0, 2.0}, {0.2, 0.3, 0.5}, {0.0, 1.0, 2.5});
    CHECK(shifted.weights == 0.0);
    REQUIRE(shifted.per_mean.size() == 3);
    CHECK(shifted.per_mean[0] == 0.0);
    CHECK(shifted.per_mean[1] == 0.0);
    CHECK(shifted.per_mean[2] == 0.5);

    const MaeBreakdown w = mean_absolute_error({0.4, 0.6}, {0.0, 5.0}, {0.5, 0.5}, {0.0, 5.0});
    CHECK(std::abs(w.weights - 0.1) < 1e-15);
}

TEST_CASE("mean_absolute_error is invariant to estimate ordering") {
    const std::vector<double> tw{0.2, 0.5, 0.3};
    const std::vector<double> tm{-2.0, 0.5, 3.0};
    const std::vector<double> ew{0.25, 0.45, 0.3};
    const std::vector<double> em{-1.8, 0.7, 2.9};
    const MaeBreakdown base = mean_absolute_error(tw, tm, ew, em);

    const std::vector<std::vector<std::size_t>> perms{{1, 0, 2}, {2, 1, 0}, {2, 0, 1}};
    for (const auto& p : perms) {
        std::vector<double> pw(3), pm(3);
        for (std::size_t s = 0; s < 3; ++s) {
            pw[s] = ew[p[s]];
            pm[s] = em[p[s]];
        }
        const MaeBreakdown got = mean_absolute_error(tw, tm, pw, pm);
        CHECK(got.weights == base.weights);
        CHECK(got.per_mean == base.per_mean);
    }

    CHECK_THROWS_AS(mean_absolute_error({0.5, 0.5}, {0.0}, {0.5, 0.5}, {0.0, 1.0}),
                    ShapeError);
    CHECK_THROWS_AS(mean_absolute_error({0.5, 0.5}, {0.0, 1.0}, {1.0}, {0.0}), ShapeError);
}

TEST_CASE("small bench run has the documented shape and is deterministic") {
    BenchProtocol protocol;
    protocol.datasets = 2;
    protocol.samples = 60;
    protocol.k = 2;
    protocol.runs = 2;
    protocol.max_sweeps = 60;
    protocol.seed = 3;

    const BenchReport report = run_supplement_bench(protocol);

    REQUIRE(report.truths.size() == 2);
    for (const auto& t : report.truths) {
        REQUIRE(t.weights.size() == 2);
        REQUIRE(t.means.size() == 2);
        CHECK(std::abs(t.weights[0] + t.weights[1] - 1.0) < 1e-12);
    }

    // methods = vb(0.5), vb(1), em; rows = methods x datasets x runs.
    REQUIRE(report.runs.size() == 3 * 2 * 2);
    int vb_half = 0, vb_one = 0, em = 0;
    for (const auto& row : report.runs) {
        REQUIRE(row.mae.per_mean.size() == 2);
        CHECK(std::isfinite(row.objective));
        CHECK(row.mae.weights >= 0.0);
        if (row.method == "vb(0.5)") ++vb_half;
        if (row.method == "vb(1)") ++vb_one;
        if (row.method == "em") ++em;
    }
    CHECK(vb_half == 4);
    CHECK(vb_one == 4);
    CHECK(em == 4);

    REQUIRE(report.by_lowest_mae.size() == 3);
    REQUIRE(report.by_highest_objective.size() == 3);
    for (const auto& agg : report.by_lowest_mae) {
        CHECK(agg.means_mean.size() == 2);
        CHECK(agg.means_sd.size() == 2);
        CHECK(agg.weights_sd >= 0.0);
    }

    const BenchReport again = run_supplement_bench(protocol);
    REQUIRE(again.runs.size() == report.runs.size());
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        CHECK(again.runs[i].objective == report.runs[i].objective);
        CHECK(again.runs[i].mae.weights == report.runs[i].mae.weights);
        CHECK(again.runs[i].mae.per_mean == report.runs[i].mae.per_mean);
    }

    BenchProtocol threaded = protocol;
    threaded.threads = 4;
    const BenchReport parallel = run_supplement_bench(threaded);
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        CHECK(parallel.runs[i].objective == report.runs[i].objective);
        CHECK(parallel.runs[i].mae.weights == report.runs[i].mae.weights);
    }

    const std::string csv = bench_report_csv(report);
    CHECK(csv.rfind("method,dataset,restart,mae_p", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + report.runs.size());
}

TEST_CASE("bench recovers well-separated truths to small error") {
    BenchProtocol protocol;
    protocol.datasets = 3;
    protocol.samples = 400;
    protocol.k = 2;
    protocol.mean_variance = 100.0;       // sd-10 means: clearly separated components
    protocol.weight_concentration = 4.0;  // keeps both true weights well away from zero
    protocol.runs = 3;
    protocol.seed = 6;

    const BenchReport report = run_supplement_bench(protocol);
    for (const auto& agg : report.by_lowest_mae) {
        CHECK(agg.weights_mean < 0.1);
        for (double m : agg.means_mean) CHECK(m < 0.5);
    }
}

TEST_CASE("bench protocol validation") {
    BenchProtocol protocol;
    protocol.datasets = 0;
    CHECK_THROWS(run_supplement_bench(protocol));
    protocol = BenchProtocol{};
    protocol.samples = 0;
    CHECK_THROWS(run_supplement_bench(protocol));
    protocol = BenchProtocol{};
    protocol.vb_alphas = {1.5};
    CHECK_THROWS(run_supplement_bench(protocol));
}

TEST_CASE("divergence rows carry the theoretical bound verbatim") {
    DivergenceProtocol protocol;
    protocol.truth = two_comp_gauss(-4.0, 4.0);
    protocol.n_grid = {200, 2000};
    protocol.seeds = 2;
    protocol.mc_samples = 20000;
    protocol.prior_variance = 25.0;
    protocol.seed = 9;

    const std::vector<DivergenceRow> rows = run_divergence_experiment(protocol);
    REQUIRE(rows.size() == 4);

    for (const auto& row : rows) {
        CHECK(std::isfinite(row.estimate));
        CHECK(row.std_error > 0.0);
        const double r_nk = rate_gaussian_known_var(row.n, 2, 1.0, 25.0, {-4.0, 4.0});
        const double expect = make_rate_report(r_nk, 2, protocol.alpha).bound;
        CHECK(row.bound == expect);
        CHECK(row.within_bound == (row.estimate <= row.bound));
    }
    CHECK(rows[0].n == 200);
    CHECK(rows[2].n == 2000);
    CHECK(rows[0].bound > rows[2].bound);

    const std::vector<DivergenceRow> again = run_divergence_experiment(protocol);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].estimate == rows[i].estimate);
        CHECK(again[i].std_error == rows[i].std_error);
        CHECK(again[i].seed == rows[i].seed);
    }

    const std::string csv = divergence_csv(rows);
    CHECK(csv.rfind("n,seed,estimate,std_error,bound,within_bound", 0) == 0);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 1 + rows.size());
}

TEST_CASE("divergence experiment covers the multinomial family") {
    MixtureParams truth;
    truth.family = Multinomial{3};
    truth.weights = {0.5, 0.5};
    truth.components = {ComponentParams{std::vector<double>{0.8, 0.1, 0.1}},
                        ComponentParams{std::vector<double>{0.1, 0.1, 0.8}}};
    DivergenceProtocol protocol;
    protocol.truth = truth;
    protocol.n_grid = {300};
    protocol.mc_samples = 20000;
    protocol.seed = 21;

    const std::vector<DivergenceRow> rows = run_divergence_experiment(protocol);
    REQUIRE(rows.size() == 1);
    const double r_nk = rate_multinomial(300, 2, 3) / 4.0;
    CHECK(rows[0].bound == make_rate_report(r_nk, 2, protocol.alpha).bound);
    CHECK(std::isfinite(rows[0].estimate));
}

TEST_CASE("divergence protocol validation") {
    DivergenceProtocol protocol;
    protocol.truth = two_comp_gauss(-4.0, 4.0);
    protocol.alpha = 1.0;  // bound needs alpha < 1
    CHECK_THROWS(run_divergence_experiment(protocol));

    DivergenceProtocol bad_family;
    bad_family.truth.family = GaussianUnknownVar{};
    bad_family.truth.weights = {1.0};
    bad_family.truth.components = {ComponentParams{GaussianParams{0.0, 1.0}}};
    CHECK_THROWS_AS(run_divergence_experiment(bad_family), ConfigError);

    DivergenceProtocol empty_grid;
    empty_grid.truth = two_comp_gauss(-4.0, 4.0);
    empty_grid.n_grid = {};
    CHECK_THROWS(run_divergence_experiment(empty_grid));
}
