#include "relseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace relseg {

namespace {

double directed(std::span<const int> from, std::span<const int> to) {
    double worst = 0.0;
    for (int a : from) {
        int best = std::numeric_limits<int>::max();
        for (int b : to) {
            best = std::min(best, std::abs(a - b));
        }
        worst = std::max(worst, static_cast<double>(best));
    }
    return worst;
}

/// Block length of every step's segment; throws if a label reappears after
/// its block ended.
std::vector<std::size_t> block_sizes(std::span<const int> labels) {
    std::vector<std::size_t> sizes(labels.size());
    std::map<int, bool> seen;
    std::size_t start = 0;
    for (std::size_t t = 0; t <= labels.size(); ++t) {
        if (t == labels.size() || labels[t] != labels[start]) {
            if (!seen.emplace(labels[start], true).second) {
                throw std::invalid_argument("segment label " + std::to_string(labels[start]) +
                                            " is not contiguous");
            }
            std::fill(sizes.begin() + static_cast<std::ptrdiff_t>(start),
                      sizes.begin() + static_cast<std::ptrdiff_t>(t), t - start);
            start = t;
        }
    }
    return sizes;
}

} // namespace

double hausdorff(std::span<const int> tau, std::span<const int> tau_prime) {
    if (tau.empty() || tau_prime.empty()) {
        throw std::invalid_argument("Hausdorff distance needs two nonempty change-point sets");
    }
    return std::max(directed(tau, tau_prime), directed(tau_prime, tau));
}

double frobenius(std::span<const int> zeta, std::span<const int> zeta_prime) {
    if (zeta.size() != zeta_prime.size()) {
        throw std::invalid_argument("segmentations differ in length (" + std::to_string(zeta.size()) +
                                    " vs " + std::to_string(zeta_prime.size()) + ")");
    }
    if (zeta.empty()) {
        return 0.0;
    }
    const auto n = block_sizes(zeta);
    const auto n_prime = block_sizes(zeta_prime);
    // ||M - M'||^2 = K + K' - 2 sum_{k,k'} o_{kk'}^2 / (n_k n'_k'). Blocks are
    // intervals, so each overlap o_{kk'} is a single run of equal label pairs.
    double segments = 0.0;
    double segments_prime = 0.0;
    double cross = 0.0;
    std::size_t run = 0;
    for (std::size_t t = 0; t < zeta.size(); ++t) {
        ++run;
        if (t == 0 || zeta[t] != zeta[t - 1]) {
            segments += 1.0;
        }
        if (t == 0 || zeta_prime[t] != zeta_prime[t - 1]) {
            segments_prime += 1.0;
        }
        const bool last = t + 1 == zeta.size();
        if (last || zeta[t + 1] != zeta[t] || zeta_prime[t + 1] != zeta_prime[t]) {
            const double o = static_cast<double>(run);
            cross += o * o / (static_cast<double>(n[t]) * static_cast<double>(n_prime[t]));
            run = 0;
        }
    }
    return std::sqrt(std::max(0.0, segments + segments_prime - 2.0 * cross));
}

std::vector<std::int64_t> detection_histogram(const std::vector<ChangePoints>& detections,
                                              std::size_t length) {
    std::vector<std::int64_t> counts(length, 0);
    for (const auto& set : detections) {
        for (int tau : set) {
            if (tau < 1 || static_cast<std::size_t>(tau) > length) {
                throw std::invalid_argument("change point " + std::to_string(tau) +
                                            " outside 1.." + std::to_string(length));
            }
            ++counts[static_cast<std::size_t>(tau) - 1];
        }
    }
    return counts;
}

void write_histogram_tsv(std::ostream& out, std::span<const std::int64_t> histogram) {
    out << "t\tcount\n";
    for (std::size_t t = 0; t < histogram.size(); ++t) {
        out << t + 1 << '\t' << histogram[t] << '\n';
    }
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) {
        throw std::invalid_argument("cannot aggregate an empty column");
    }
    // Shifted by the first value so that a constant column is reproduced exactly.
    const double pivot = values.front();
    double sum = 0.0;
    for (double v : values) {
        sum += v - pivot;
    }
    const double mean = pivot + sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size() || truth.empty()) {
        throw std::invalid_argument("accuracy needs two nonempty label vectors of equal length");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        hits += predicted[i] == truth[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

} // namespace relseg
