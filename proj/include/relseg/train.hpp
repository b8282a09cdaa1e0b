#pragma once

#include "relseg/dgp.hpp"
#include "relseg/grad.hpp"
#include "relseg/model.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace relseg {

/// How restarts draw the warping parameters.
enum class WarpInit {
    /// mu_k ~ U[-spread, spread]: modes scattered around an even split.
    uniform_mu,
    /// Modes are the order statistics of K - 1 uniforms on (0, 1), i.e.
    /// segment proportions ~ Dirichlet(1, ..., 1).
    uniform_modes,
};

/// Batch gradient descent schedule: `total_epochs` full-sequence steps of
/// which the last `integer_epochs` use hard-rounded segmentation predictors.
struct TrainSchedule {
    int total_epochs = 300;
    int integer_epochs = 100;
    double learning_rate = 0.1;
    int restarts = 10;
    std::uint64_t seed = 0;
    WarpInit warp_init = WarpInit::uniform_mu;
    /// Range of the uniform_mu draw.
    double init_spread = 0.5;

    void validate() const;
};

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    explicit AdamState(std::size_t size) : first(size, 0.0), second(size, 0.0) {}

    std::vector<double> first;
    std::vector<double> second;
    long step = 0;
};

/// One bias-corrected Adam update. Entries before `first_active` are frozen:
/// neither they nor their moment estimates change. Throws NumericalError on
/// a non-finite gradient.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate, std::size_t first_active = 0, const AdamOptions& options = {});

/// Raised when no restart produced a finite fit.
class OptimizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FitResult {
    double best_loss = 0.0;
    int best_restart = 0;
    ModelParams params;
    Segmentation hard_seg;
    ChangePoints change_points;
    /// Final loss per restart; NaN marks a discarded (diverged) restart.
    std::vector<double> per_restart_losses;
    /// Loss before each epoch's update, per restart.
    std::vector<std::vector<double>> traces;
    int epochs_run = 0;
    /// Segment labels that no time step is assigned to.
    std::vector<int> empty_segments;
};

/// Fits a relaxed segmented model with `schedule.restarts` independent random
/// restarts and keeps the one with the lowest final loss. Restart r draws
/// from the stream derive_seed(schedule.seed, {r}), so the result does not
/// depend on `workers`.
FitResult fit(const SequenceData& data, const ModelConfig& config, const Dgp& dgp,
              const TrainSchedule& schedule, std::size_t workers = 1);

/// Same as fit(), starting every restart from `init` instead of a random draw.
FitResult fit_from(const SequenceData& data, const ModelConfig& config, const Dgp& dgp,
                   const TrainSchedule& schedule, const ModelParams& init);

/// Model configuration whose hard alignment reproduces `segmentation`
/// exactly (window at the grid resolution), and the matching warp.
struct FixedSegmentation {
    ModelConfig config;
    WarpParams warp;
};
FixedSegmentation fixed_segmentation(std::span<const int> segmentation);

/// Fits segment parameters with the segmentation held fixed: every epoch is
/// an integer epoch under the exact warp of `segmentation`.
FitResult fit_fixed_segmentation(const SequenceData& data, std::span<const int> segmentation,
                                 const Dgp& dgp, TrainSchedule schedule);

} // namespace relseg
