#pragma once

#include "relseg/model.hpp"
#include "relseg/rng.hpp"
#include "relseg/sequence.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace relseg {

/// The seven scenario-1 distributions with their fixed parameters.
enum class DistributionTag {
    binomial,          ///< Binom(n=10, p=0.2)
    negative_binomial, ///< failures before the 3rd success, p=0.7
    hypergeometric,    ///< population 10, 5 success states, 2 draws
    normal,            ///< mean 2.5, variance 0.25
    gamma,             ///< shape 0.5, scale 5
    weibull,           ///< shape 2, scale 5
    pareto,            ///< shape 3, scale 1.5, support [1.5, inf)
};

inline constexpr std::array<DistributionTag, 7> kAllDistributions{
    DistributionTag::binomial, DistributionTag::negative_binomial,
    DistributionTag::hypergeometric, DistributionTag::normal,
    DistributionTag::gamma, DistributionTag::weibull,
    DistributionTag::pareto};

std::string_view distribution_name(DistributionTag tag);
double sample(DistributionTag tag, Rng& rng);

struct ScenarioSpec {
    std::size_t length = 1000;
    ChangePoints change_points{100, 130, 220, 320, 370, 520, 620, 740, 790, 870};
    int sequences = 500;
    std::uint64_t seed = 0;

    int segments() const { return static_cast<int>(change_points.size()) + 1; }
    /// Throws std::invalid_argument unless the change points are strictly
    /// increasing inside [2, length] and sequences >= 1.
    void validate() const;
};

struct ScenarioSequence {
    std::vector<double> values;
    std::vector<DistributionTag> distributions; ///< one per segment
};

struct Scenario {
    std::vector<ScenarioSequence> sequences;
    Segmentation truth;
};

/// Piecewise i.i.d. sequences: each segment draws its distribution uniformly
/// from the seven tags minus the previous segment's. Sequence i uses the
/// streams derive_seed(seed, {i, 0}) for the tags and
/// derive_seed(seed, {i, k}) for the values of segment k (1-based).
Scenario gen_arlot_s1(const ScenarioSpec& spec, std::size_t workers = 1);
ScenarioSequence gen_arlot_s1_sequence(const ScenarioSpec& spec, std::size_t index);

/// Segmented Poisson counts. Covariates are six day-of-week indicators
/// (Tuesday..Sunday, t = 1 is a Monday) with effects tied across segments;
/// fit with PoissonGlmDgp(0, 6).
struct PoissonSeries {
    SequenceData data;
    Segmentation truth;
    /// K x 2 (bias, slope in t/T units) plus 6 tied day effects.
    SegmentParams params;
    std::vector<double> rates;
};

/// Requires 2 <= K and 10 K <= T. Segments are at least T / (2K) long;
/// the log-rate jumps by +-U[0.4, 0.8] at each change point.
PoissonSeries gen_segmented_poisson(int segments, std::size_t length, std::uint64_t seed);

/// Labelled stream for softmax regression: class c is drawn uniformly, the
/// features are N(center_c, I) with centers pairwise at least 5 apart, and
/// from t > T/2 on the label of cluster c becomes c mod C + 1.
struct DriftStream {
    SequenceData data; ///< observations are labels 1..C, covariates the features
    Segmentation truth;
    std::vector<int> clusters;  ///< generating cluster per step (1-based)
    std::vector<double> centers; ///< C x D_in, row-major
};

DriftStream gen_drift_stream(std::size_t length, int classes, int inputs, std::uint64_t seed);

/// K random N(0, I) level vectors plus i.i.d. N(0, sigma^2) noise, segments
/// at least T / (2K) long.
struct PiecewiseConstant {
    SequenceData data;
    Segmentation truth;
    std::vector<double> levels; ///< K x dim, row-major
};

PiecewiseConstant gen_piecewise_const(int segments, std::size_t length, int dim, double noise_sigma,
                                      std::uint64_t seed);

/// `count` distinct change points drawn uniformly without replacement from
/// {2..T}, sorted.
ChangePoints random_baseline(std::size_t length, int count, std::uint64_t seed);

/// Uniformly random segmentation into K segments of length >= min_length.
Segmentation random_segmentation(int segments, std::size_t length, std::size_t min_length, Rng& rng);

} // namespace relseg
