#pragma once

#include "relseg/dgp.hpp"
#include "relseg/model.hpp"
#include "relseg/sequence.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace relseg {

/// How the segmentation predictors enter the forward pass: interpolated
/// (`soft`) or rounded to the nearest segment (`hard`, the integer epochs).
enum class AlignmentMode { soft, hard };

/// All learnable state of a relaxed segmented model.
struct ModelParams {
    WarpParams warp{2};
    SegmentParams segments;
    std::vector<double> internal;
};

struct GradientBundle {
    std::vector<double> d_theta;    // K x P, row-major
    std::vector<double> d_global;   // G
    std::vector<double> d_internal; // DGP-internal parameters
    std::vector<double> d_mu;       // K - 1; the pinned mu_1 has no entry
};

struct LossAndGradient {
    double loss = 0.0;
    GradientBundle gradient;
};

/// Non-finite loss or gradient; `time_step` is the offending 1-based t.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t time_step)
        : std::runtime_error(what), time_step_{time_step} {}
    std::size_t time_step() const { return time_step_; }

private:
    std::size_t time_step_;
};

/// Total loss of a model over one sequence together with its exact reverse pass.
/// Holds references to `data` and `dgp`; both must outlive the objective.
class Objective {
public:
    Objective(const ModelConfig& config, const SequenceData& data, const Dgp& dgp);

    const ModelConfig& config() const { return config_; }
    const SequenceData& data() const { return data_; }
    const Dgp& dgp() const { return dgp_; }

    /// Parameters with the right shapes, all zero.
    ModelParams zero_params() const;
    /// Throws std::invalid_argument on a shape mismatch.
    void check_params(const ModelParams& params) const;

    /// Sum over t of the per-step loss, data constants included.
    double loss(const ModelParams& params, AlignmentMode mode = AlignmentMode::soft) const;
    LossAndGradient backward(const ModelParams& params, AlignmentMode mode = AlignmentMode::soft) const;

    /// Segmentation predictors; rounded in hard mode.
    std::vector<double> zeta_hat(const ModelParams& params, AlignmentMode mode = AlignmentMode::soft) const;

    /// Discrete forward-pass state (interpolation cell, TSP branch, support
    /// clipping, DGP kinks). Equal signatures on both sides of a perturbation
    /// mean the loss is smooth in between.
    std::vector<int> kink_signature(const ModelParams& params, AlignmentMode mode) const;

private:
    template <bool WithGradient>
    double run(const ModelParams& params, AlignmentMode mode, GradientBundle* grad) const;

    ModelConfig config_;
    const SequenceData& data_;
    const Dgp& dgp_;
    ParamLayout layout_;
    std::vector<double> grid_;
    double data_constant_ = 0.0;
};

LossAndGradient backward(const ModelConfig& config, const ModelParams& params,
                         const SequenceData& data, const Dgp& dgp,
                         AlignmentMode mode = AlignmentMode::soft);

/// Trainable parameters in a fixed order: mu_2..mu_K, theta, global, internal.
std::vector<double> flatten(const ModelParams& params);
void unflatten(std::span<const double> flat, ModelParams& params);
/// Gradient in the same order as flatten(ModelParams).
std::vector<double> flatten(const GradientBundle& gradient);

struct FdCheckResult {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
    /// Flattened indices whose +-h perturbation crosses a kink; reported but
    /// excluded from max_rel_error.
    std::vector<std::size_t> near_kink;
    std::vector<double> analytic;
    std::vector<double> numeric;
};

/// Central finite differences over every trainable scalar. The relative
/// error of one entry is |analytic - numeric| / max(|analytic|, |numeric|, abs_floor).
FdCheckResult fd_check(const ModelConfig& config, const ModelParams& params,
                       const SequenceData& data, const Dgp& dgp, double step = 1e-6,
                       AlignmentMode mode = AlignmentMode::soft, double abs_floor = 1e-3);

} // namespace relseg
