#include "mixvb/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mixvb/errors.hpp"

namespace mixvb {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727417803297364;

void check_nk(std::size_t n, int k) {
    if (n < 2) throw std::domain_error("rate calculators require n >= 2");
    if (k < 1) throw std::domain_error("rate calculators require K >= 1");
}

}  // namespace

double rate_dirichlet(std::size_t n, int k) {
    check_nk(n, k);
    if (k == 1) return 0.0;
    const double nd = static_cast<double>(n);
    return 4.0 * std::log(nd * static_cast<double>(k)) / nd;
}

double rate_multinomial(std::size_t n, int k, int v) {
    check_nk(n, k);
    if (v < 2) throw std::domain_error("rate_multinomial requires V >= 2");
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double vd = static_cast<double>(v);
    return std::max(8.0 * kd * vd * std::log(nd * vd) / nd,
                    8.0 * kd * std::log(nd * kd) / nd);
}

double rate_gaussian_known_var(std::size_t n, int k, double component_variance,
                               double prior_variance, const std::vector<double>& true_means) {
    check_nk(n, k);
    if (!(component_variance > 0.0)) throw std::domain_error("component variance must be positive");
    if (!(prior_variance > 0.0)) throw std::domain_error("prior variance must be positive");
    if (static_cast<int>(true_means.size()) != k) {
        throw ShapeError("rate_gaussian_known_var: need one true mean per component");
    }
    const double nd = static_cast<double>(n);
    double rate = rate_dirichlet(n, k);
    for (double mean : true_means) {
        const double bracket = 0.5 * std::log(nd / 2.0) +
                               component_variance / (nd * prior_variance) +
                               0.5 * std::log(prior_variance / component_variance) +
                               mean * mean / (2.0 * prior_variance) - 0.5;
        rate = std::max(rate, bracket / nd);
    }
    return rate;
}

double rate_gaussian_nig(std::size_t n, int k, double prior_variance, double ig_scale,
                         const std::vector<GaussianParams>& true_components) {
    check_nk(n, k);
    if (!(prior_variance > 0.0)) throw std::domain_error("prior variance must be positive");
    if (!(ig_scale > 0.0)) throw std::domain_error("inverse-gamma scale must be positive");
    if (static_cast<int>(true_components.size()) != k) {
        throw ShapeError("rate_gaussian_nig: need one true component per slot");
    }
    const double nd = static_cast<double>(n);
    double rate = rate_dirichlet(n, k);
    for (const GaussianParams& g : true_components) {
        if (!(g.variance > 0.0)) throw std::domain_error("true component variance must be positive");
        const double bracket = 2.0 * std::log(nd) + 0.5 * std::log(prior_variance) +
                               1.0 / (2.0 * nd * prior_variance) +
                               g.mean * g.mean / (2.0 * g.variance * prior_variance) +
                               std::log(g.variance / ig_scale) + ig_scale / g.variance -
                               kHalfLog2Pi;
        rate = std::max(rate, bracket / nd);
    }
    return rate;
}

double rate_gaussian_factorized(std::size_t n, int k, double prior_variance, double ig_scale,
                                const std::vector<GaussianParams>& true_components) {
    check_nk(n, k);
    if (!(prior_variance > 0.0)) throw std::domain_error("prior variance must be positive");
    if (!(ig_scale > 0.0)) throw std::domain_error("inverse-gamma scale must be positive");
    if (static_cast<int>(true_components.size()) != k) {
        throw ShapeError("rate_gaussian_factorized: need one true component per slot");
    }
    const double nd = static_cast<double>(n);
    double rate = rate_dirichlet(n, k);
    for (const GaussianParams& g : true_components) {
        if (!(g.variance > 0.0)) throw std::domain_error("true component variance must be positive");
        const double bracket = 2.0 * std::log(nd) + 0.5 * std::log(prior_variance) +
                               g.variance / (2.0 * nd * prior_variance) +
                               g.mean * g.mean / (2.0 * prior_variance) +
                               0.5 * std::log(g.variance / (ig_scale * ig_scale)) +
                               ig_scale / g.variance - kHalfLog2Pi;
        rate = std::max(rate, bracket / nd);
    }
    return rate;
}

double rate_misspecified_gaussian(std::size_t n, int k, double prior_variance,
                                  double mean_bound) {
    check_nk(n, k);
    if (!(prior_variance > 0.0)) throw std::domain_error("prior variance must be positive");
    if (!(mean_bound >= 0.0)) throw std::domain_error("mean bound must be nonnegative");
    const double nd = static_cast<double>(n);
    const double bracket = 0.5 * std::log(nd / 2.0) + 1.0 / (nd * prior_variance) +
                           0.5 * std::log(prior_variance) +
                           mean_bound * mean_bound / (2.0 * prior_variance) - 0.5;
    return std::max(rate_dirichlet(n, k), bracket / nd);
}

RateReport make_rate_report(double r_nk, int k, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::domain_error("make_rate_report: alpha must lie in (0, 1)");
    }
    if (k < 1) throw std::domain_error("make_rate_report: K must be at least 1");
    if (r_nk < 0.0) throw std::domain_error("make_rate_report: the rate must be nonnegative");
    RateReport report;
    report.r_nk = r_nk;
    report.bound = (1.0 + alpha) / (1.0 - alpha) * 2.0 * static_cast<double>(k) * r_nk;
    return report;
}

}  // namespace mixvb
