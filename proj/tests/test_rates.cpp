#include <cmath>
#include <doctest.h>
#include <vector>

#include "mixvb/rates.hpp"
#include "oracle_helpers.hpp"

using namespace mixvb;

TEST_CASE("rate_dirichlet frozen fixture and shape") {
    CHECK(rate_dirichlet(1000, 1) == 0.0);
    CHECK(rate_dirichlet(5, 1) == 0.0);
    CHECK(std::abs(rate_dirichlet(1000, 2) - 0.030403609838168329) < 1e-15);

    for (std::size_t n = 3; n < 4000; n = n * 2 + 1) {
        CHECK(rate_dirichlet(2 * n, 3) < rate_dirichlet(n, 3));
    }
    CHECK_THROWS(rate_dirichlet(1, 2));
    CHECK_THROWS(rate_dirichlet(10, 0));
}

TEST_CASE("rate_multinomial frozen fixture and branch crossover") {
    CHECK(std::abs(rate_multinomial(1000, 3, 10) - 2.2104816892742839) < 1e-12);

    // Normally the V-term dominates...
    const double v_term = 8.0 * 3.0 * 10.0 * std::log(1000.0 * 10.0) / 1000.0;
    CHECK(rate_multinomial(1000, 3, 10) == v_term);

    // ...but a huge K hands the maximum to the weight term.
    const double w_term = 8.0 * 1000000.0 * std::log(2.0 * 1000000.0) / 2.0;
    CHECK(rate_multinomial(2, 1000000, 2) == w_term);
    CHECK(w_term > 8.0 * 1000000.0 * 2.0 * std::log(2.0 * 2.0) / 2.0);

    CHECK_THROWS(rate_multinomial(1000, 3, 1));
}

TEST_CASE("rate_gaussian_known_var frozen fixture and dominating branches") {
    // Weight part wins with small means.
    CHECK(std::abs(rate_gaussian_known_var(1000, 2, 1.0, 1.0, {0.0, 3.0}) -
                   0.030403609838168329) < 1e-15);
    CHECK(rate_gaussian_known_var(1000, 2, 1.0, 1.0, {0.0, 3.0}) ==
          rate_dirichlet(1000, 2));

    // A distant mean hands the maximum to its component bracket.
    const double far = rate_gaussian_known_var(1000, 2, 1.0, 1.0, {0.0, 20.0});
    CHECK(far > rate_dirichlet(1000, 2));
    const double bracket = 0.5 * std::log(500.0) + 1.0 / 1000.0 + 0.0 +
                           400.0 / 2.0 - 0.5;
    CHECK(std::abs(far - bracket / 1000.0) < 1e-15);

    CHECK_THROWS(rate_gaussian_known_var(1000, 2, 1.0, 1.0, {0.0}));
    CHECK_THROWS(rate_gaussian_known_var(1000, 2, 0.0, 1.0, {0.0, 1.0}));
}

TEST_CASE("every rate matches a long-double re-evaluation on a grid") {
    const std::vector<std::size_t> ns{2, 10, 100, 1000, 50000};
    const std::vector<int> ks{1, 2, 3, 7};

    for (std::size_t n : ns) {
        for (int k : ks) {
            CHECK(std::abs(rate_dirichlet(n, k) -
                           static_cast<double>(oracle::rate_dirichlet_ld(n, k))) < 1e-12);

            for (int v : {2, 5, 64}) {
                CHECK(std::abs(rate_multinomial(n, k, v) -
                               static_cast<double>(oracle::rate_multinomial_ld(n, k, v))) <
                      1e-12);
            }

            std::vector<double> means, variances;
            std::vector<GaussianParams> comps;
            for (int j = 0; j < k; ++j) {
                means.push_back(-3.0 + 2.5 * j);
                variances.push_back(0.5 + 0.4 * j);
                comps.push_back({means.back(), variances.back()});
            }
            for (double pv : {0.5, 1.0, 25.0}) {
                CHECK(std::abs(rate_gaussian_known_var(n, k, 1.3, pv, means) -
                               static_cast<double>(oracle::rate_gaussian_known_ld(
                                   n, k, 1.3, pv, means))) < 1e-12);
                CHECK(std::abs(rate_gaussian_nig(n, k, pv, 1.2, comps) -
                               static_cast<double>(oracle::rate_gaussian_nig_ld(
                                   n, k, pv, 1.2, means, variances))) < 1e-12);
                CHECK(std::abs(rate_gaussian_factorized(n, k, pv, 1.2, comps) -
                               static_cast<double>(oracle::rate_gaussian_factorized_ld(
                                   n, k, pv, 1.2, means, variances))) < 1e-12);
                CHECK(std::abs(rate_misspecified_gaussian(n, k, pv, 4.0) -
                               static_cast<double>(oracle::rate_misspecified_ld(
                                   n, k, pv, 4.0))) < 1e-12);
            }
        }
    }

    // The multinomial crossover point sits on the grid too.
    CHECK(std::abs(rate_multinomial(2, 1000000, 2) -
                   static_cast<double>(oracle::rate_multinomial_ld(2, 1000000, 2))) <
          1e-12 * rate_multinomial(2, 1000000, 2));
}

TEST_CASE("make_rate_report folds the tempering constant") {
    const RateReport r = make_rate_report(0.01, 2, 0.5);
    CHECK(r.r_nk == 0.01);
    CHECK(std::abs(r.bound - 0.12) < 1e-15);

    const RateReport tight = make_rate_report(0.01, 2, 0.9);
    CHECK(tight.bound > r.bound);

    CHECK_THROWS(make_rate_report(0.01, 2, 0.0));
    CHECK_THROWS(make_rate_report(0.01, 2, 1.0));
    CHECK_THROWS(make_rate_report(-0.01, 2, 0.5));
}
