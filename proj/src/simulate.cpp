#include "relseg/simulate.hpp"

#include "relseg/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace relseg {

std::string_view distribution_name(DistributionTag tag) {
    switch (tag) {
    case DistributionTag::binomial: return "binom";
    case DistributionTag::negative_binomial: return "nbinom";
    case DistributionTag::hypergeometric: return "hypergeom";
    case DistributionTag::normal: return "normal";
    case DistributionTag::gamma: return "gamma";
    case DistributionTag::weibull: return "weibull";
    case DistributionTag::pareto: return "pareto";
    }
    throw std::invalid_argument("unknown distribution tag");
}

double sample(DistributionTag tag, Rng& rng) {
    switch (tag) {
    case DistributionTag::binomial: return static_cast<double>(rng.binomial(10, 0.2));
    case DistributionTag::negative_binomial: return static_cast<double>(rng.negative_binomial(3, 0.7));
    case DistributionTag::hypergeometric: return static_cast<double>(rng.hypergeometric(10, 5, 2));
    case DistributionTag::normal: return rng.normal(2.5, 0.5);
    case DistributionTag::gamma: return rng.gamma(0.5, 5.0);
    case DistributionTag::weibull: return rng.weibull(2.0, 5.0);
    case DistributionTag::pareto: return rng.pareto(3.0, 1.5);
    }
    throw std::invalid_argument("unknown distribution tag");
}

void ScenarioSpec::validate() const {
    if (sequences < 1) {
        throw std::invalid_argument("scenario needs at least one sequence");
    }
    for (std::size_t i = 0; i < change_points.size(); ++i) {
        const int cp = change_points[i];
        if (cp < 2 || static_cast<std::size_t>(cp) > length ||
            (i > 0 && cp <= change_points[i - 1])) {
            throw std::invalid_argument("scenario change points must be strictly increasing in [2, T]");
        }
    }
}

namespace {

/// `count` distinct values from {0..population-1}, sorted.
std::vector<std::size_t> sample_distinct(std::size_t population, std::size_t count, Rng& rng) {
    if (count > population) {
        throw std::invalid_argument("cannot draw " + std::to_string(count) +
                                    " distinct values from " + std::to_string(population));
    }
    std::vector<std::size_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(population) - 1));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

void check_poisson_shape(int segments, std::size_t length) {
    if (segments < 2 || static_cast<std::size_t>(segments) * 10 > length) {
        throw std::invalid_argument("segmented series needs K >= 2 and 10 K <= T (K=" +
                                    std::to_string(segments) + ", T=" + std::to_string(length) + ")");
    }
}

} // namespace

ScenarioSequence gen_arlot_s1_sequence(const ScenarioSpec& spec, std::size_t index) {
    ScenarioSequence out;
    const auto truth = segmentation_from_change_points(spec.change_points, spec.length);
    Rng chooser(derive_seed(spec.seed, {index, 0}));
    const auto n_tags = static_cast<std::int64_t>(kAllDistributions.size());
    std::int64_t previous = -1;
    for (int k = 0; k < spec.segments(); ++k) {
        std::int64_t pick;
        if (previous < 0) {
            pick = chooser.uniform_int(0, n_tags - 1);
        } else {
            pick = chooser.uniform_int(0, n_tags - 2);
            if (pick >= previous) {
                ++pick;
            }
        }
        previous = pick;
        out.distributions.push_back(kAllDistributions[static_cast<std::size_t>(pick)]);
    }
    out.values.reserve(spec.length);
    int current = 0;
    Rng filler(0);
    for (std::size_t t = 0; t < spec.length; ++t) {
        if (truth[t] != current) {
            current = truth[t];
            filler = Rng(derive_seed(spec.seed, {index, static_cast<std::uint64_t>(current)}));
        }
        out.values.push_back(sample(out.distributions[static_cast<std::size_t>(current - 1)], filler));
    }
    return out;
}

Scenario gen_arlot_s1(const ScenarioSpec& spec, std::size_t workers) {
    spec.validate();
    Scenario out;
    out.truth = segmentation_from_change_points(spec.change_points, spec.length);
    out.sequences.resize(static_cast<std::size_t>(spec.sequences));
    parallel_for(out.sequences.size(), workers,
                 [&](std::size_t i) { out.sequences[i] = gen_arlot_s1_sequence(spec, i); });
    return out;
}

Segmentation random_segmentation(int segments, std::size_t length, std::size_t min_length, Rng& rng) {
    if (segments < 1 || min_length < 1 ||
        static_cast<std::size_t>(segments) * min_length > length) {
        throw std::invalid_argument("cannot place " + std::to_string(segments) +
                                    " segments of length >= " + std::to_string(min_length) +
                                    " in " + std::to_string(length) + " steps");
    }
    const auto k = static_cast<std::size_t>(segments);
    const std::size_t slack = length - k * min_length;
    // Sorted distinct draws minus their rank are a uniform nondecreasing
    // sequence in [0, slack]; offset i gives the start of segment i + 2.
    const auto draws = sample_distinct(slack + k - 1, k - 1, rng);
    ChangePoints cps;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const std::size_t offset = draws[i] - i;
        cps.push_back(static_cast<int>(1 + (i + 1) * min_length + offset));
    }
    return segmentation_from_change_points(cps, length);
}

PoissonSeries gen_segmented_poisson(int segments, std::size_t length, std::uint64_t seed) {
    check_poisson_shape(segments, length);
    constexpr int kDays = 6;
    Rng rng(derive_seed(seed, {0}));
    PoissonSeries out;
    out.truth = random_segmentation(segments, length, length / (2 * static_cast<std::size_t>(segments)), rng);
    out.params = SegmentParams(segments, 2, kDays);

    const double scale = static_cast<double>(length);
    // Base rate around 100 counts per step; jumps stay within [15, 1000].
    const double low = std::log(15.0);
    const double high = std::log(1000.0);
    double level = std::log(100.0) + rng.uniform(-0.5, 0.5);
    std::size_t start = 0;
    for (int k = 0; k < segments; ++k) {
        std::size_t end = start;
        while (end + 1 < length && out.truth[end + 1] == k + 1) {
            ++end;
        }
        const double slope = rng.uniform(-2.0, 2.0);
        const double bias = level - slope * static_cast<double>(start + 1) / scale;
        out.params.row(k)[0] = bias;
        out.params.row(k)[1] = slope;
        const double end_level = bias + slope * static_cast<double>(end + 1) / scale;
        double jump = rng.uniform(0.4, 0.8) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
        if (end_level + jump < low || end_level + jump > high) {
            jump = -jump;
        }
        level = end_level + jump;
        start = end + 1;
    }
    for (double& effect : out.params.global()) {
        effect = rng.uniform(-0.3, 0.3);
    }

    std::vector<double> counts(length);
    std::vector<double> cov(length * kDays, 0.0);
    out.rates.resize(length);
    for (std::size_t t = 0; t < length; ++t) {
        const auto day = static_cast<int>(t % 7); // 0 = Monday
        if (day > 0) {
            cov[t * kDays + static_cast<std::size_t>(day - 1)] = 1.0;
        }
        const auto row = out.params.row(out.truth[t] - 1);
        double eta = row[0] + row[1] * static_cast<double>(t + 1) / scale;
        if (day > 0) {
            eta += out.params.global()[static_cast<std::size_t>(day - 1)];
        }
        out.rates[t] = std::exp(eta);
        counts[t] = static_cast<double>(rng.poisson(out.rates[t]));
    }
    out.data = SequenceData(1, std::move(counts), kDays, std::move(cov));
    return out;
}

DriftStream gen_drift_stream(std::size_t length, int classes, int inputs, std::uint64_t seed) {
    if (classes < 2 || inputs < 1 || length < 4) {
        throw std::invalid_argument("drift stream needs C >= 2, D_in >= 1 and T >= 4");
    }
    constexpr double kMinDistance = 5.0;
    const auto c_count = static_cast<std::size_t>(classes);
    const auto dim = static_cast<std::size_t>(inputs);
    Rng rng(derive_seed(seed, {0}));
    DriftStream out;
    out.centers.assign(c_count * dim, 0.0);
    double radius = kMinDistance * std::max(1.0, std::pow(static_cast<double>(classes), 1.0 / inputs));
    for (std::size_t c = 0; c < c_count;) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            for (std::size_t d = 0; d < dim; ++d) {
                out.centers[c * dim + d] = rng.uniform(-radius, radius);
            }
            placed = true;
            for (std::size_t o = 0; o < c && placed; ++o) {
                double dist2 = 0.0;
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = out.centers[c * dim + d] - out.centers[o * dim + d];
                    dist2 += diff * diff;
                }
                placed = dist2 >= kMinDistance * kMinDistance;
            }
        }
        if (placed) {
            ++c;
        } else {
            radius *= 1.25;
        }
    }

    const std::size_t half = length / 2;
    std::vector<double> labels(length);
    std::vector<double> features(length * dim);
    out.clusters.resize(length);
    out.truth.resize(length);
    for (std::size_t t = 0; t < length; ++t) {
        const auto cluster = static_cast<int>(rng.uniform_int(1, classes));
        out.clusters[t] = cluster;
        const bool drifted = t >= half;
        out.truth[t] = drifted ? 2 : 1;
        labels[t] = static_cast<double>(drifted ? cluster % classes + 1 : cluster);
        for (std::size_t d = 0; d < dim; ++d) {
            features[t * dim + d] =
                out.centers[static_cast<std::size_t>(cluster - 1) * dim + d] + rng.normal();
        }
    }
    out.data = SequenceData(1, std::move(labels), dim, std::move(features));
    return out;
}

PiecewiseConstant gen_piecewise_const(int segments, std::size_t length, int dim, double noise_sigma,
                                      std::uint64_t seed) {
    if (dim < 1 || !(noise_sigma >= 0.0) || segments < 1) {
        throw std::invalid_argument("piecewise-constant generator needs K >= 1, dim >= 1, sigma >= 0");
    }
    Rng rng(derive_seed(seed, {0}));
    PiecewiseConstant out;
    const auto width = static_cast<std::size_t>(dim);
    out.truth = random_segmentation(segments, length,
                                    std::max<std::size_t>(1, length / (2 * static_cast<std::size_t>(segments))), rng);
    out.levels.resize(static_cast<std::size_t>(segments) * width);
    for (double& v : out.levels) {
        v = rng.normal();
    }
    std::vector<double> obs(length * width);
    for (std::size_t t = 0; t < length; ++t) {
        const auto k = static_cast<std::size_t>(out.truth[t] - 1);
        for (std::size_t d = 0; d < width; ++d) {
            obs[t * width + d] = out.levels[k * width + d] + noise_sigma * rng.normal();
        }
    }
    out.data = SequenceData(width, std::move(obs));
    return out;
}

ChangePoints random_baseline(std::size_t length, int count, std::uint64_t seed) {
    if (length < 2 || count < 0) {
        throw std::invalid_argument("random baseline needs T >= 2 and a nonnegative count");
    }
    Rng rng(derive_seed(seed, {0}));
    const auto picks = sample_distinct(length - 1, static_cast<std::size_t>(count), rng);
    ChangePoints out;
    out.reserve(picks.size());
    for (std::size_t p : picks) {
        out.push_back(static_cast<int>(p) + 2);
    }
    return out;
}

} // namespace relseg
