#include "mixvb/special_math.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixvb/errors.hpp"

namespace mixvb {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727417803297364;

void require_positive(double x, const char* who) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error(std::string(who) + " requires a positive finite argument");
    }
}

void require_gaussian(const GaussianParams& g, const char* who) {
    if (!(g.variance > 0.0) || !std::isfinite(g.variance) || !std::isfinite(g.mean)) {
        throw std::domain_error(std::string(who) + ": variance must be positive and finite");
    }
}

void require_dirichlet(const DirichletParams& d, const char* who) {
    if (d.concentration.empty()) throw ShapeError(std::string(who) + ": empty concentration");
    for (double a : d.concentration) require_positive(a, who);
}

void require_inverse_gamma(const InverseGammaParams& g, const char* who) {
    require_positive(g.shape, who);
    require_positive(g.scale, who);
}

void require_nig(const NIGParams& g, const char* who) {
    if (!std::isfinite(g.location)) throw std::domain_error(std::string(who) + ": non-finite location");
    require_positive(g.precision_scale, who);
    require_positive(g.shape, who);
    require_positive(g.scale, who);
}

}  // namespace

double digamma(double x) {
    require_positive(x, "digamma");
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // psi(x) ~ ln x - 1/(2x) - sum B_{2n}/(2n x^{2n}); truncation < 5e-17 at x >= 10
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = std::log(x) - 0.5 * inv;
    series -= inv2 * (1.0 / 12 -
                      inv2 * (1.0 / 120 -
                              inv2 * (1.0 / 252 -
                                      inv2 * (1.0 / 240 -
                                              inv2 * (1.0 / 132 -
                                                      inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
    return acc + series;
}

double log_gamma(double x) {
    require_positive(x, "log_gamma");
    double acc = 0.0;
    while (x < 10.0) {
        acc -= std::log(x);
        x += 1.0;
    }
    // Stirling with Bernoulli correction terms; truncation < 2e-18 at x >= 10
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = (x - 0.5) * std::log(x) - x + kHalfLog2Pi;
    series += inv * (1.0 / 12 -
                     inv2 * (1.0 / 360 -
                             inv2 * (1.0 / 1260 -
                                     inv2 * (1.0 / 1680 -
                                             inv2 * (1.0 / 1188 -
                                                     inv2 * (691.0 / 360360 -
                                                             inv2 * (1.0 / 156 -
                                                                     inv2 * (3617.0 / 122400))))))));
    return acc + series;
}

double kl_gaussian(const GaussianParams& p, const GaussianParams& q) {
    require_gaussian(p, "kl_gaussian");
    require_gaussian(q, "kl_gaussian");
    const double dm = p.mean - q.mean;
    return 0.5 * std::log(q.variance / p.variance) + p.variance / (2.0 * q.variance) +
           dm * dm / (2.0 * q.variance) - 0.5;
}

double kl_dirichlet(const DirichletParams& p, const DirichletParams& q) {
    require_dirichlet(p, "kl_dirichlet");
    require_dirichlet(q, "kl_dirichlet");
    if (p.concentration.size() != q.concentration.size()) {
        throw ShapeError("kl_dirichlet: concentration lengths differ");
    }
    double a0 = 0.0, b0 = 0.0;
    for (std::size_t j = 0; j < p.concentration.size(); ++j) {
        a0 += p.concentration[j];
        b0 += q.concentration[j];
    }
    const double psi_a0 = digamma(a0);
    double kl = log_gamma(a0) - log_gamma(b0);
    for (std::size_t j = 0; j < p.concentration.size(); ++j) {
        const double a = p.concentration[j];
        const double b = q.concentration[j];
        kl += log_gamma(b) - log_gamma(a) + (a - b) * (digamma(a) - psi_a0);
    }
    return kl;
}

double kl_inverse_gamma(const InverseGammaParams& p, const InverseGammaParams& q) {
    require_inverse_gamma(p, "kl_inverse_gamma");
    require_inverse_gamma(q, "kl_inverse_gamma");
    return (p.shape - q.shape) * digamma(p.shape) + log_gamma(q.shape) - log_gamma(p.shape) +
           q.shape * std::log(p.scale / q.scale) + p.shape * (q.scale - p.scale) / p.scale;
}

double kl_nig(const NIGParams& p, const NIGParams& q) {
    require_nig(p, "kl_nig");
    require_nig(q, "kl_nig");
    // Conditional-Gaussian part in expectation over sigma2 ~ IG(p.shape, p.scale),
    // using E[1/sigma2] = shape/scale, plus the inverse-gamma marginal part.
    const double dm = p.location - q.location;
    const double gauss = 0.5 * std::log(p.precision_scale / q.precision_scale) +
                         q.precision_scale / (2.0 * p.precision_scale) +
                         0.5 * q.precision_scale * dm * dm * (p.shape / p.scale) - 0.5;
    const double ig = kl_inverse_gamma({p.shape, p.scale}, {q.shape, q.scale});
    return gauss + ig;
}

double kl_categorical(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw ShapeError("kl_categorical: support sizes differ");
    if (p.empty()) throw ShapeError("kl_categorical: empty support");
    double kl = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] < 0.0 || q[j] < 0.0) throw std::domain_error("kl_categorical: negative mass");
        if (p[j] == 0.0) continue;
        if (q[j] == 0.0) return std::numeric_limits<double>::infinity();
        kl += p[j] * std::log(p[j] / q[j]);
    }
    return kl;
}

double renyi_gaussian(const GaussianParams& p, const GaussianParams& q, double alpha) {
    require_gaussian(p, "renyi_gaussian");
    require_gaussian(q, "renyi_gaussian");
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::domain_error("renyi_gaussian: alpha must lie in (0, 1)");
    }
    const double blend = alpha * q.variance + (1.0 - alpha) * p.variance;
    const double dm = p.mean - q.mean;
    return alpha * dm * dm / (2.0 * blend) +
           (std::log(blend) - (1.0 - alpha) * std::log(p.variance) -
            alpha * std::log(q.variance)) /
               (2.0 * (1.0 - alpha));
}

McEstimate renyi_divergence_mc(const std::function<double(double)>& log_p,
                               const std::function<double(double)>& log_q,
                               const std::function<double(Rng&)>& sample_p,
                               double alpha, std::int64_t n_samples, std::uint64_t seed) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::domain_error("renyi_divergence_mc: alpha must lie in (0, 1)");
    }
    if (n_samples < 2) throw std::domain_error("renyi_divergence_mc: need at least 2 samples");
    Rng rng(seed);
    // D_alpha = (alpha-1)^-1 log E_P[(q/p)^{1-alpha}]; streaming mean/variance.
    double mean = 0.0, m2 = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        const double x = sample_p(rng);
        const double r = std::exp((1.0 - alpha) * (log_q(x) - log_p(x)));
        const double delta = r - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (r - mean);
    }
    if (!(mean > 0.0)) throw NumericError("renyi_divergence_mc: non-positive ratio mean");
    const double n = static_cast<double>(n_samples);
    const double se_mean = std::sqrt(m2 / (n - 1.0) / n);
    McEstimate out;
    out.value = std::log(mean) / (alpha - 1.0);
    out.std_error = se_mean / ((1.0 - alpha) * mean);
    return out;
}

}  // namespace mixvb
