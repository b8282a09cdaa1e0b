#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace relseg {

/// Hyperparameters of a relaxed segmented model over a sequence of `length`
/// time steps. `segments == 1` is accepted and yields the unsegmented model
/// (no warping parameters).
struct ModelConfig {
    int segments = 2;
    double width = 0.125;
    double power = 16.0;
    std::size_t length = 0;

    /// Throws std::invalid_argument on K < 1, K >= T or an invalid TSP width/power.
    void validate() const;
};

/// Unconstrained warping parameters mu_1..mu_K with mu_1 pinned to zero.
/// Only the K - 1 trailing entries are trainable.
class WarpParams {
public:
    explicit WarpParams(int segments);

    /// Builds from the K - 1 trainable entries.
    static WarpParams from_trainable(std::span<const double> trainable);

    int segments() const { return static_cast<int>(mu_.size()); }
    std::span<const double> mu() const { return mu_; }
    std::span<const double> trainable() const { return std::span<const double>(mu_).subspan(1); }
    std::span<double> trainable() { return std::span<double>(mu_).subspan(1); }

private:
    std::vector<double> mu_;
};

/// Per-segment parameter matrix (K x P, row-major) plus a block of G
/// parameters tied across all segments.
class SegmentParams {
public:
    SegmentParams() = default;
    SegmentParams(int segments, int per_segment, int global = 0);

    int segments() const { return segments_; }
    int per_segment() const { return per_segment_; }
    int global_size() const { return static_cast<int>(global_.size()); }
    /// P + G: the length of a predicted parameter vector.
    int predicted_size() const { return per_segment_ + global_size(); }

    std::span<const double> row(int k) const;
    std::span<double> row(int k);
    std::span<const double> theta() const { return theta_; }
    std::span<double> theta() { return theta_; }
    std::span<const double> global() const { return global_; }
    std::span<double> global() { return global_; }

private:
    int segments_ = 0;
    int per_segment_ = 0;
    std::vector<double> theta_;
    std::vector<double> global_;
};

/// Interpolation weights of one time step. Nonzero weights sit on segment
/// `index` (0-based) and, if `upper > 0`, on `index + 1`.
struct WeightRow {
    int index = 0;
    double lower = 1.0;
    double upper = 0.0;

    std::vector<double> dense(int segments) const;
};

struct SoftAlignment {
    std::vector<double> zeta_hat;
    std::vector<WeightRow> weights;
};

/// Segment labels 1..K per time step.
using Segmentation = std::vector<int>;

/// Hard-segmentation change points: the 1-based positions where a segment begins.
using ChangePoints = std::vector<int>;

std::vector<double> unit_grid(std::size_t length);

/// Normalised cumulative softmax: m_k = sum_{j<=k} e^mu_j / sum_j e^mu_j, k < K.
std::vector<double> modes_from_mu(std::span<const double> mu);
std::vector<double> modes_from_mu(const WarpParams& warp);

/// Inverse of modes_from_mu for strictly increasing modes in (0, 1).
WarpParams warp_from_modes(std::span<const double> modes);

/// Uniform mixture of TSP cdfs with the given (strictly increasing) modes.
double warp_tsp(double u, std::span<const double> modes, double width, double power);

/// zeta_hat_t = 1 + gamma_t (K - 1).
std::vector<double> seg_predict(std::span<const double> gamma, int segments);

/// w_k = max(0, 1 - |zeta_hat - k|), stored sparsely.
WeightRow weights(double zeta_hat, int segments);

/// Weighted segment parameters followed by the tied block.
std::vector<double> param_predict(const WeightRow& row, const SegmentParams& params);
void param_predict(const WeightRow& row, const SegmentParams& params, std::span<double> out);

/// Full soft forward pass from warping parameters to alignment.
SoftAlignment soft_alignment(const WarpParams& warp, const ModelConfig& config);

/// Nearest-integer rounding (ties up), clamped to [1, K].
int round_segment(double zeta_hat, int segments);
Segmentation hard_segmentation(std::span<const double> zeta_hat);
Segmentation hard_segmentation(std::span<const double> zeta_hat, int segments);

/// Positions t (1-based) with zeta(t) > zeta(t - 1).
ChangePoints change_points(std::span<const int> segmentation);

/// Builds the labels 1..K+1 for `length` steps from sorted 1-based change points.
Segmentation segmentation_from_change_points(std::span<const int> change_points, std::size_t length);

/// Throws std::invalid_argument unless labels are nondecreasing, start at 1,
/// increase by at most one per step and end at K (onto {1..K}).
void validate_segmentation(std::span<const int> segmentation);

struct ExactWarp {
    std::vector<double> modes;
    double width;
};

/// Warping that represents `segmentation` exactly on the unit grid: modes at
/// the midpoints between each change point and its predecessor, width equal
/// to the grid resolution.
ExactWarp exact_warp_from_segmentation(std::span<const int> segmentation);

} // namespace relseg
