#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mixvb {

/// Derives an independent stream seed from a master seed (splitmix64 step).
/// Used everywhere a run fans out: restarts, per-K fits, datasets, methods.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Deterministic random source: mt19937_64 bits with our own transforms, so
/// sampled streams do not depend on implementation-defined stdlib
/// distributions.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform();

    /// Uniform on (0, 1]; safe to pass through log().
    double uniform_pos();

    /// Standard normal (Marsaglia polar, one spare cached).
    double normal();

    /// Gamma(shape, 1) for shape > 0 (Marsaglia-Tsang, boosted below 1).
    double gamma(double shape);

    /// Dirichlet draw: normalized Gamma(concentration_j) variates.
    std::vector<double> dirichlet(const std::vector<double>& concentration);

    /// Integer in [0, n) by rejection-free scaling of uniform().
    std::size_t index(std::size_t n);

   private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mixvb
