#include "relseg/train.hpp"

#include "relseg/parallel.hpp"
#include "relseg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace relseg {

void TrainSchedule::validate() const {
    if (total_epochs < 0 || integer_epochs < 0 || integer_epochs > total_epochs) {
        throw std::invalid_argument("schedule needs 0 <= integer_epochs <= total_epochs");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning rate must be positive");
    }
    if (!(init_spread >= 0.0) || !std::isfinite(init_spread)) {
        throw std::invalid_argument("initial spread must be finite and nonnegative");
    }
    if (restarts < 1) {
        throw std::invalid_argument("at least one restart is required");
    }
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double learning_rate, std::size_t first_active, const AdamOptions& options) {
    if (params.size() != grads.size() || state.first.size() != params.size()) {
        throw std::invalid_argument("adam_step: parameter, gradient and state sizes differ");
    }
    for (std::size_t i = first_active; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericalError("non-finite gradient entry " + std::to_string(i), 0);
        }
    }
    ++state.step;
    const double correction1 = 1.0 - std::pow(options.beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(options.beta2, static_cast<double>(state.step));
    for (std::size_t i = first_active; i < params.size(); ++i) {
        double& m = state.first[i];
        double& v = state.second[i];
        m = options.beta1 * m + (1.0 - options.beta1) * grads[i];
        v = options.beta2 * v + (1.0 - options.beta2) * grads[i] * grads[i];
        const double denom = std::sqrt(v / correction2) + options.epsilon;
        params[i] -= learning_rate * (m / correction1) / denom;
    }
}

namespace {

struct RestartOutcome {
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    ModelParams params;
    std::vector<double> trace;
};

RestartOutcome run_restart(const Objective& objective, const TrainSchedule& schedule,
                           ModelParams params) {
    RestartOutcome out;
    const int soft_epochs = schedule.total_epochs - schedule.integer_epochs;
    const auto n_mu = params.warp.trainable().size();
    auto x = flatten(params);
    AdamState state(x.size());
    out.trace.reserve(static_cast<std::size_t>(schedule.total_epochs));
    try {
        for (int epoch = 0; epoch < schedule.total_epochs; ++epoch) {
            const auto mode = epoch < soft_epochs ? AlignmentMode::soft : AlignmentMode::hard;
            const auto step = objective.backward(params, mode);
            out.trace.push_back(step.loss);
            const auto grad = flatten(step.gradient);
            // The warping receives no gradient through rounded predictors; keep it fixed.
            adam_step(x, grad, state, schedule.learning_rate,
                      mode == AlignmentMode::hard ? n_mu : 0);
            unflatten(x, params);
        }
        const auto final_mode =
            schedule.integer_epochs > 0 ? AlignmentMode::hard : AlignmentMode::soft;
        const double loss = objective.loss(params, final_mode);
        if (std::isfinite(loss)) {
            out.final_loss = loss;
        }
    } catch (const NumericalError&) {
        out.final_loss = std::numeric_limits<double>::quiet_NaN();
    }
    out.params = std::move(params);
    return out;
}

FitResult assemble(const Objective& objective, const TrainSchedule& schedule,
                   std::vector<RestartOutcome> outcomes) {
    FitResult result;
    result.epochs_run = schedule.total_epochs;
    int best = -1;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const double loss = outcomes[r].final_loss;
        result.per_restart_losses.push_back(loss);
        if (std::isfinite(loss) && (best < 0 || loss < outcomes[static_cast<std::size_t>(best)].final_loss)) {
            best = static_cast<int>(r);
        }
    }
    if (best < 0) {
        throw OptimizationError("all " + std::to_string(outcomes.size()) +
                                " restarts diverged (non-finite loss)");
    }
    for (auto& o : outcomes) {
        result.traces.push_back(std::move(o.trace));
    }
    auto& winner = outcomes[static_cast<std::size_t>(best)];
    result.best_restart = best;
    result.best_loss = winner.final_loss;
    result.params = std::move(winner.params);

    const int segments = objective.config().segments;
    result.hard_seg = hard_segmentation(objective.zeta_hat(result.params), segments);
    result.change_points = change_points(result.hard_seg);
    std::vector<bool> used(static_cast<std::size_t>(segments) + 1, false);
    for (int k : result.hard_seg) {
        used[static_cast<std::size_t>(k)] = true;
    }
    for (int k = 1; k <= segments; ++k) {
        if (!used[static_cast<std::size_t>(k)]) {
            result.empty_segments.push_back(k);
        }
    }
    return result;
}

} // namespace

FitResult fit(const SequenceData& data, const ModelConfig& config, const Dgp& dgp,
              const TrainSchedule& schedule, std::size_t workers) {
    schedule.validate();
    const Objective objective(config, data, dgp);
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(schedule.restarts));
    parallel_for(outcomes.size(), workers, [&](std::size_t r) {
        Rng rng(derive_seed(schedule.seed, {r}));
        ModelParams params = objective.zero_params();
        if (schedule.warp_init == WarpInit::uniform_mu) {
            for (double& mu : params.warp.trainable()) {
                mu = rng.uniform(-schedule.init_spread, schedule.init_spread);
            }
        } else if (config.segments > 1) {
            // Normalised exponential spacings are Dirichlet(1, ..., 1), so
            // mu_k = log E_k - log E_1 places the modes like sorted uniforms.
            auto log_exponential = [&rng] {
                double e;
                do {
                    e = -std::log(rng.uniform_open_low());
                } while (!(e > 0.0));
                return std::log(e);
            };
            const double first = log_exponential();
            for (double& mu : params.warp.trainable()) {
                mu = log_exponential() - first;
            }
        }
        dgp.initialize(data, rng, params.segments, params.internal);
        outcomes[r] = run_restart(objective, schedule, std::move(params));
    });
    return assemble(objective, schedule, std::move(outcomes));
}

FitResult fit_from(const SequenceData& data, const ModelConfig& config, const Dgp& dgp,
                   const TrainSchedule& schedule, const ModelParams& init) {
    schedule.validate();
    const Objective objective(config, data, dgp);
    objective.check_params(init);
    std::vector<RestartOutcome> outcomes;
    for (int r = 0; r < schedule.restarts; ++r) {
        outcomes.push_back(run_restart(objective, schedule, init));
    }
    return assemble(objective, schedule, std::move(outcomes));
}

FixedSegmentation fixed_segmentation(std::span<const int> segmentation) {
    const auto exact = exact_warp_from_segmentation(segmentation);
    ModelConfig config;
    config.segments = static_cast<int>(exact.modes.size()) + 1;
    config.width = exact.width;
    config.power = 2.0;
    config.length = segmentation.size();
    return {config, warp_from_modes(exact.modes)};
}

FitResult fit_fixed_segmentation(const SequenceData& data, std::span<const int> segmentation,
                                 const Dgp& dgp, TrainSchedule schedule) {
    auto fixed = fixed_segmentation(segmentation);
    schedule.integer_epochs = schedule.total_epochs;
    schedule.restarts = 1;
    const Objective objective(fixed.config, data, dgp);
    ModelParams init = objective.zero_params();
    init.warp = fixed.warp;
    Rng rng(derive_seed(schedule.seed, {0}));
    dgp.initialize(data, rng, init.segments, init.internal);
    return fit_from(data, fixed.config, dgp, schedule, init);
}

} // namespace relseg
