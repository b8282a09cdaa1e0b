#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace relseg {

/// SplitMix64 finaliser; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for the stream identified by `path` under `seed`, e.g.
/// derive_seed(seed, {sequence, segment}). Different paths give unrelated
/// streams; the mapping is fixed across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Portable random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; every variate below is computed from
/// raw engine output by this library, so draws are identical across
/// standard-library implementations (unlike the std:: distributions).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_{seed} {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi], unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }
    /// Number of successes in n Bernoulli(p) trials.
    std::int64_t binomial(std::int64_t n, double p);
    /// Failures before the n-th success, success probability p.
    std::int64_t negative_binomial(std::int64_t n, double p);
    /// Successes among `draws` draws without replacement from a population of
    /// `population` items containing `successes` success items.
    std::int64_t hypergeometric(std::int64_t population, std::int64_t successes, std::int64_t draws);
    /// Gamma with shape and scale (Marsaglia-Tsang, boosted for shape < 1).
    double gamma(double shape, double scale);
    /// Weibull with shape and scale by inversion.
    double weibull(double shape, double scale);
    /// Pareto with shape and scale; support [scale, inf).
    double pareto(double shape, double scale);
    std::int64_t poisson(double rate);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace relseg
