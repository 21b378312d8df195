#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixvb/mixture_model.hpp"

namespace mixvb {

struct MaeBreakdown {
    double weights = 0.0;          // mean |weight error| over components
    std::vector<double> per_mean;  // |mean error| per ascending-mean slot
};

/// Aligns both mixtures by ascending component mean (weights carried along),
/// then reports the weight MAE and per-slot absolute mean errors.
MaeBreakdown mean_absolute_error(const std::vector<double>& true_weights,
                                 const std::vector<double>& true_means,
                                 const std::vector<double>& est_weights,
                                 const std::vector<double>& est_means);

/// Simulation-study protocol: `datasets` draws of a K-component unit-variance
/// Gaussian mixture with Dirichlet weights and Gaussian means, each fitted
/// `runs` times per method (tempered VB per alpha, EM); per dataset the best
/// run is kept and summaries aggregate over datasets.
struct BenchProtocol {
    int datasets = 10;
    std::size_t samples = 1000;
    int k = 3;
    double weight_concentration = 2.0 / 3.0;  // truth weights ~ Dirichlet(c,...,c)
    double mean_variance = 10.0;              // truth means ~ N(0, mean_variance)
    double component_variance = 1.0;
    int runs = 5;
    std::vector<double> vb_alphas = {0.5, 1.0};
    double prior_variance = 10.0;             // VB component-mean prior
    double weight_prior_concentration = 1.0;  // VB weight prior
    int max_sweeps = 500;
    double rel_tol = 1e-8;
    std::uint64_t seed = 1;
    int threads = 1;  // dataset-level parallelism; results identical to serial
};

struct BenchRun {
    std::string method;
    int dataset = 0;
    int run = 0;
    MaeBreakdown mae;
    double objective = 0.0;  // surrogate objective (VB) or log-likelihood (EM)
};

struct BenchTruth {
    int dataset = 0;
    std::vector<double> weights;
    std::vector<double> means;
};

struct BenchAggregate {
    std::string method;
    double weights_mean = 0.0;  // over datasets, of the kept run's MAE
    double weights_sd = 0.0;
    std::vector<double> means_mean;
    std::vector<double> means_sd;
};

struct BenchReport {
    BenchProtocol protocol;
    std::vector<BenchTruth> truths;                    // drawn parameters per dataset
    std::vector<BenchRun> runs;                        // every run of every method
    std::vector<BenchAggregate> by_lowest_mae;         // kept run: lowest combined MAE
    std::vector<BenchAggregate> by_highest_objective;  // kept run: highest objective
};

BenchReport run_supplement_bench(const BenchProtocol& protocol);

/// Flat rows: method,dataset,restart,mae_p,mae_t1..mae_tK,elbo.
std::string bench_report_csv(const BenchReport& report);

/// Fits the model on growing samples from a fixed truth and tracks the
/// Monte Carlo Renyi divergence of the posterior-mean predictive against the
/// theoretical bound.
struct DivergenceProtocol {
    std::vector<std::size_t> n_grid = {100, 1000, 10000};
    MixtureParams truth;
    double alpha = 0.5;  // tempering exponent and divergence order
    double prior_variance = 1.0;
    double weight_prior_concentration = 1.0;
    double beta = 1.0;  // per-category prior pseudo-count (multinomial truth)
    int restarts = 1;
    int max_sweeps = 500;
    double rel_tol = 1e-8;
    int mc_samples = 200000;
    int seeds = 1;
    std::uint64_t seed = 1;
    bool theta_sampling = false;  // average the divergence over factor draws (slower)
    int theta_draws = 32;
    int threads = 1;
};

struct DivergenceRow {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double bound = 0.0;
    bool within_bound = false;
};

std::vector<DivergenceRow> run_divergence_experiment(const DivergenceProtocol& protocol);

/// Flat rows: n,seed,estimate,std_error,bound,within_bound.
std::string divergence_csv(const std::vector<DivergenceRow>& rows);

}  // namespace mixvb
