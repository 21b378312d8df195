#include "reference_cavi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mixvb/special_math.hpp"

namespace refcavi {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728;

std::vector<double> expected_log_weights(const std::vector<double>& phi) {
    double total = 0.0;
    for (double p : phi) total += p;
    std::vector<double> out(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) {
        out[j] = mixvb::digamma(phi[j]) - mixvb::digamma(total);
    }
    return out;
}

}  // namespace

GaussState run_gauss_known(const std::vector<double>& x, const std::vector<double>& prior_conc,
                           double prior_variance, double component_variance, GaussState init,
                           int sweeps) {
    const std::size_t n = x.size();
    const std::size_t k = prior_conc.size();
    GaussState state = std::move(init);
    std::vector<double> row(k);

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        // Responsibilities: rows proportional to exp(E[log p_j] + E[log q_j(x_i)]).
        const std::vector<double> elogw = expected_log_weights(state.phi);
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                const double d2 = (x[i] - state.mean[j]) * (x[i] - state.mean[j]);
                const double elogq = -0.5 * (kLog2Pi + std::log(component_variance)) -
                                     (state.variance[j] + d2) / (2.0 * component_variance);
                const double h = elogw[j] + elogq;
                row[j] = h;
                best = std::max(best, h);
            }
            double total = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                row[j] = std::exp(row[j] - best);
                total += row[j];
            }
            for (std::size_t j = 0; j < k; ++j) state.resp[i * k + j] = row[j] / total;
        }

        // Weight factor: phi_j = prior_j + sum_i resp_ij.
        for (std::size_t j = 0; j < k; ++j) {
            double mass = 0.0;
            for (std::size_t i = 0; i < n; ++i) mass += state.resp[i * k + j];
            state.phi[j] = prior_conc[j] + mass;
        }

        // Mean factors: precision = 1/V0 + N_j/V, mean = (sum_i resp x / V) / precision.
        for (std::size_t j = 0; j < k; ++j) {
            double w = 0.0;
            double wx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = state.resp[i * k + j];
                if (r == 0.0) continue;
                w += r;
                wx += r * x[i];
            }
            const double precision = 1.0 / prior_variance + w / component_variance;
            state.mean[j] = (wx / component_variance) / precision;
            state.variance[j] = std::max(1.0 / precision, 1e-12);
        }
    }
    return state;
}

MultState run_multinomial(const std::vector<int>& x,
                          const std::vector<double>& prior_conc,
                          const std::vector<double>& beta, MultState init, int sweeps) {
    const std::size_t n = x.size();
    const std::size_t k = prior_conc.size();
    MultState state = std::move(init);
    std::vector<double> row(k);

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        const std::vector<double> elogw = expected_log_weights(state.phi);
        for (std::size_t i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < k; ++j) {
                double total = 0.0;
                for (double g : state.gamma[j]) total += g;
                const double elogq =
                    mixvb::digamma(state.gamma[j][static_cast<std::size_t>(x[i] - 1)]) -
                    mixvb::digamma(total);
                const double h = elogw[j] + elogq;
                row[j] = h;
                best = std::max(best, h);
            }
            double total = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                row[j] = std::exp(row[j] - best);
                total += row[j];
            }
            for (std::size_t j = 0; j < k; ++j) state.resp[i * k + j] = row[j] / total;
        }

        for (std::size_t j = 0; j < k; ++j) {
            double mass = 0.0;
            for (std::size_t i = 0; i < n; ++i) mass += state.resp[i * k + j];
            state.phi[j] = prior_conc[j] + mass;
        }

        for (std::size_t j = 0; j < k; ++j) {
            std::vector<double> gamma = beta;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = state.resp[i * k + j];
                if (r == 0.0) continue;
                gamma[static_cast<std::size_t>(x[i] - 1)] += r;
            }
            state.gamma[j] = std::move(gamma);
        }
    }
    return state;
}

}  // namespace refcavi
