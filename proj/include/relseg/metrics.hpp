#pragma once

#include "relseg/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace relseg {

/// Hausdorff distance between two change-point sets. Throws
/// std::invalid_argument if either set is empty.
double hausdorff(std::span<const int> tau, std::span<const int> tau_prime);

/// Frobenius norm of the difference of the rescaled equivalence matrices
/// M_{t,t'} = 1[same segment] / |segment of t|, computed from segment overlap
/// counts. Labels may be any integers as long as each label occupies one
/// contiguous block; throws std::invalid_argument otherwise or on a length
/// mismatch.
double frobenius(std::span<const int> zeta, std::span<const int> zeta_prime);

/// Number of times each step 1..T appears as a change point (index t - 1).
std::vector<std::int64_t> detection_histogram(const std::vector<ChangePoints>& detections,
                                              std::size_t length);

/// Two-column TSV (t, count) with a header line.
void write_histogram_tsv(std::ostream& out, std::span<const std::int64_t> histogram);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; ///< population standard deviation
};

/// Throws std::invalid_argument on an empty input.
MeanStd mean_std(std::span<const double> values);

/// Fraction of positions where the two label vectors agree.
double accuracy(std::span<const int> predicted, std::span<const int> truth);

} // namespace relseg
