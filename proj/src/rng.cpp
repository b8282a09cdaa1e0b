#include "relseg/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace relseg {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t state = splitmix64(seed);
    for (std::uint64_t id : path) {
        state = splitmix64(state ^ splitmix64(id + 0x632be59bd9b4e019ULL));
    }
    return state;
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) {
        throw std::invalid_argument("uniform_int: empty range");
    }
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) {
        return static_cast<std::int64_t>(engine_());
    }
    // Reject the top partial bucket to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span + 1) % span;
    std::uint64_t draw;
    do {
        draw = engine_();
    } while (draw > limit);
    return lo + static_cast<std::int64_t>(draw % span);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        count += bernoulli(p) ? 1 : 0;
    }
    return count;
}

std::int64_t Rng::negative_binomial(std::int64_t n, double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("negative_binomial: p must lie in (0, 1]");
    }
    std::int64_t failures = 0;
    std::int64_t successes = 0;
    while (successes < n) {
        if (bernoulli(p)) {
            ++successes;
        } else {
            ++failures;
        }
    }
    return failures;
}

std::int64_t Rng::hypergeometric(std::int64_t population, std::int64_t successes, std::int64_t draws) {
    if (successes > population || draws > population || successes < 0 || draws < 0) {
        throw std::invalid_argument("hypergeometric: invalid parameters");
    }
    std::int64_t remaining = population;
    std::int64_t good = successes;
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < draws; ++i) {
        if (uniform_int(1, remaining) <= good) {
            ++hits;
            --good;
        }
        --remaining;
    }
    return hits;
}

double Rng::gamma(double shape, double scale) {
    if (!(shape > 0.0 && scale > 0.0)) {
        throw std::invalid_argument("gamma: shape and scale must be positive");
    }
    if (shape < 1.0) {
        const double boost = std::pow(uniform_open_low(), 1.0 / shape);
        return gamma(shape + 1.0, scale) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_open_low();
        if (u < 1.0 - 0.0331 * (x * x) * (x * x)) {
            return d * v * scale;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v * scale;
        }
    }
}

double Rng::weibull(double shape, double scale) {
    return scale * std::pow(-std::log(uniform_open_low()), 1.0 / shape);
}

double Rng::pareto(double shape, double scale) {
    return scale * std::pow(uniform_open_low(), -1.0 / shape);
}

std::int64_t Rng::poisson(double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("poisson: rate must be finite and nonnegative");
    }
    if (rate < 12.0) {
        const double limit = std::exp(-rate);
        std::int64_t k = 0;
        double prod = uniform_open_low();
        while (prod > limit) {
            ++k;
            prod *= uniform_open_low();
        }
        return k;
    }
    // Transformed rejection with squeeze (Hoermann, PTRS).
    const double slam = std::sqrt(rate);
    const double loglam = std::log(rate);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const auto k = static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + rate + 0.43));
        if (us >= 0.07 && v <= vr) {
            return k;
        }
        if (k < 0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -rate + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0)) {
            return k;
        }
    }
}

} // namespace relseg
