#include "relseg/grad.hpp"

#include "relseg/tsp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace relseg {

Objective::Objective(const ModelConfig& config, const SequenceData& data, const Dgp& dgp)
    : config_{config}, data_{data}, dgp_{dgp}, layout_{dgp.layout()} {
    if (config_.length == 0) {
        config_.length = data.length();
    }
    if (config_.length != data.length()) {
        throw std::invalid_argument("model length " + std::to_string(config_.length) +
                                    " does not match the sequence length " +
                                    std::to_string(data.length()));
    }
    config_.validate();
    dgp_.check_data(data_);
    grid_ = unit_grid(config_.length);
    for (std::size_t t = 0; t < data_.length(); ++t) {
        data_constant_ += dgp_.data_constant_at(data_, t);
    }
}

ModelParams Objective::zero_params() const {
    ModelParams params{WarpParams(config_.segments),
                       SegmentParams(config_.segments, layout_.per_segment, layout_.global),
                       std::vector<double>(static_cast<std::size_t>(layout_.internal), 0.0)};
    return params;
}

void Objective::check_params(const ModelParams& params) const {
    if (params.warp.segments() != config_.segments ||
        params.segments.segments() != config_.segments) {
        throw std::invalid_argument("parameters are shaped for a different segment count");
    }
    if (params.segments.per_segment() != layout_.per_segment ||
        params.segments.global_size() != layout_.global ||
        params.internal.size() != static_cast<std::size_t>(layout_.internal)) {
        throw std::invalid_argument("parameters do not match the " + dgp_.name() + " DGP layout");
    }
    if (params.warp.mu()[0] != 0.0) {
        throw std::invalid_argument("mu_1 must be pinned to 0");
    }
}

template <bool WithGradient>
double Objective::run(const ModelParams& params, AlignmentMode mode, GradientBundle* grad) const {
    check_params(params);
    const int segments = config_.segments;
    const auto per_segment = static_cast<std::size_t>(layout_.per_segment);
    const auto predicted = static_cast<std::size_t>(params.segments.predicted_size());
    const auto n_modes = static_cast<std::size_t>(segments - 1);
    const bool soft = mode == AlignmentMode::soft;

    std::vector<double> theta_hat(predicted);
    std::vector<double> d_theta_hat(predicted);
    std::vector<double> d_cdf(n_modes);
    std::vector<double> d_modes(n_modes, 0.0);

    std::vector<TspComponent> components;
    std::vector<double> modes;
    if (segments > 1) {
        modes = modes_from_mu(params.warp);
        components.reserve(n_modes);
        for (double m : modes) {
            components.emplace_back(m, config_.width, config_.power);
        }
    }

    if constexpr (WithGradient) {
        grad->d_theta.assign(params.segments.theta().size(), 0.0);
        grad->d_global.assign(params.segments.global().size(), 0.0);
        grad->d_internal.assign(params.internal.size(), 0.0);
        grad->d_mu.assign(n_modes, 0.0);
    }

    double total = 0.0;
    for (std::size_t t = 0; t < data_.length(); ++t) {
        double zeta = 1.0;
        for (std::size_t k = 0; k < n_modes; ++k) {
            if (WithGradient && soft) {
                const auto v = tsp_cdf_with_dmode(grid_[t], components[k]);
                zeta += v.cdf;
                d_cdf[k] = v.dmode;
            } else {
                zeta += tsp_cdf(grid_[t], components[k]);
            }
        }
        if (!soft) {
            zeta = round_segment(zeta, segments);
        }
        const WeightRow row = weights(zeta, segments);
        param_predict(row, params.segments, theta_hat);

        double step_loss;
        if constexpr (WithGradient) {
            step_loss = dgp_.gradient_at(data_, t, theta_hat, params.internal, d_theta_hat,
                                         grad->d_internal);
        } else {
            step_loss = dgp_.objective_at(data_, t, theta_hat, params.internal);
        }
        if (!std::isfinite(step_loss)) {
            throw NumericalError("non-finite loss at t=" + std::to_string(t + 1), t + 1);
        }
        total += step_loss;

        if constexpr (WithGradient) {
            const auto lo = static_cast<std::size_t>(row.index) * per_segment;
            for (std::size_t p = 0; p < per_segment; ++p) {
                grad->d_theta[lo + p] += row.lower * d_theta_hat[p];
            }
            for (std::size_t g = 0; g < grad->d_global.size(); ++g) {
                grad->d_global[g] += d_theta_hat[per_segment + g];
            }
            if (row.upper > 0.0) {
                const auto hi = lo + per_segment;
                double d_zeta = 0.0;
                for (std::size_t p = 0; p < per_segment; ++p) {
                    grad->d_theta[hi + p] += row.upper * d_theta_hat[p];
                    d_zeta += d_theta_hat[p] *
                              (params.segments.theta()[hi + p] - params.segments.theta()[lo + p]);
                }
                // At integer zeta_hat (upper == 0) the weight kinks contribute zero slope.
                if (soft) {
                    for (std::size_t k = 0; k < n_modes; ++k) {
                        d_modes[k] += d_zeta * d_cdf[k];
                    }
                }
            }
        }
    }

    if constexpr (WithGradient) {
        if (soft && n_modes > 0) {
            // d m_k / d mu_j = p_j (1[j <= k] - m_k) with p = softmax(mu).
            const auto mu = params.warp.mu();
            const double shift = *std::max_element(mu.begin(), mu.end());
            std::vector<double> p(mu.size());
            double sum = 0.0;
            for (std::size_t j = 0; j < mu.size(); ++j) {
                p[j] = std::exp(mu[j] - shift);
                sum += p[j];
            }
            double weighted = 0.0;
            for (std::size_t k = 0; k < n_modes; ++k) {
                weighted += d_modes[k] * modes[k];
            }
            double suffix = 0.0;
            for (std::size_t j = mu.size() - 1; j >= 1; --j) {
                if (j < n_modes) {
                    suffix += d_modes[j];
                }
                grad->d_mu[j - 1] = p[j] / sum * (suffix - weighted);
            }
        }
        auto finite = [](const std::vector<double>& v) {
            return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
        };
        if (!finite(grad->d_theta) || !finite(grad->d_global) || !finite(grad->d_internal) ||
            !finite(grad->d_mu)) {
            throw NumericalError("non-finite gradient", 0);
        }
    }
    return total + data_constant_;
}

double Objective::loss(const ModelParams& params, AlignmentMode mode) const {
    return run<false>(params, mode, nullptr);
}

LossAndGradient Objective::backward(const ModelParams& params, AlignmentMode mode) const {
    LossAndGradient out;
    out.loss = run<true>(params, mode, &out.gradient);
    return out;
}

std::vector<double> Objective::zeta_hat(const ModelParams& params, AlignmentMode mode) const {
    check_params(params);
    auto alignment = soft_alignment(params.warp, config_);
    if (mode == AlignmentMode::hard) {
        for (double& z : alignment.zeta_hat) {
            z = round_segment(z, config_.segments);
        }
    }
    return alignment.zeta_hat;
}

std::vector<int> Objective::kink_signature(const ModelParams& params, AlignmentMode mode) const {
    check_params(params);
    std::vector<int> signature;
    std::vector<TspComponent> components;
    if (config_.segments > 1) {
        for (double m : modes_from_mu(params.warp)) {
            components.emplace_back(m, config_.width, config_.power);
            signature.push_back(static_cast<int>(components.back().support_slope()));
        }
    }
    std::vector<double> theta_hat(static_cast<std::size_t>(params.segments.predicted_size()));
    for (std::size_t t = 0; t < data_.length(); ++t) {
        const double u = grid_[t];
        double zeta = 1.0;
        for (const auto& c : components) {
            const auto [a, b] = c.support();
            signature.push_back(u <= a ? 0 : u <= c.mode() ? 1 : u < b ? 2 : 3);
            zeta += tsp_cdf(u, c);
        }
        if (mode == AlignmentMode::hard) {
            zeta = round_segment(zeta, config_.segments);
            signature.push_back(static_cast<int>(zeta));
        } else {
            const double cell = std::floor(zeta);
            signature.push_back(static_cast<int>(cell));
            signature.push_back(zeta == cell ? 1 : 0);
        }
        param_predict(weights(zeta, config_.segments), params.segments, theta_hat);
        dgp_.append_kink_signature(data_, t, theta_hat, params.internal, signature);
    }
    return signature;
}

LossAndGradient backward(const ModelConfig& config, const ModelParams& params,
                         const SequenceData& data, const Dgp& dgp, AlignmentMode mode) {
    return Objective(config, data, dgp).backward(params, mode);
}

std::vector<double> flatten(const ModelParams& params) {
    std::vector<double> flat;
    const auto mu = params.warp.trainable();
    const auto theta = params.segments.theta();
    const auto global = params.segments.global();
    flat.reserve(mu.size() + theta.size() + global.size() + params.internal.size());
    flat.insert(flat.end(), mu.begin(), mu.end());
    flat.insert(flat.end(), theta.begin(), theta.end());
    flat.insert(flat.end(), global.begin(), global.end());
    flat.insert(flat.end(), params.internal.begin(), params.internal.end());
    return flat;
}

void unflatten(std::span<const double> flat, ModelParams& params) {
    auto mu = params.warp.trainable();
    auto theta = params.segments.theta();
    auto global = params.segments.global();
    if (flat.size() != mu.size() + theta.size() + global.size() + params.internal.size()) {
        throw std::invalid_argument("flattened parameter vector has the wrong length");
    }
    auto it = flat.begin();
    auto take = [&it](std::span<double> dst) {
        std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
        it += static_cast<std::ptrdiff_t>(dst.size());
    };
    take(mu);
    take(theta);
    take(global);
    take(params.internal);
}

std::vector<double> flatten(const GradientBundle& gradient) {
    std::vector<double> flat;
    flat.reserve(gradient.d_mu.size() + gradient.d_theta.size() + gradient.d_global.size() +
                 gradient.d_internal.size());
    flat.insert(flat.end(), gradient.d_mu.begin(), gradient.d_mu.end());
    flat.insert(flat.end(), gradient.d_theta.begin(), gradient.d_theta.end());
    flat.insert(flat.end(), gradient.d_global.begin(), gradient.d_global.end());
    flat.insert(flat.end(), gradient.d_internal.begin(), gradient.d_internal.end());
    return flat;
}

FdCheckResult fd_check(const ModelConfig& config, const ModelParams& params,
                       const SequenceData& data, const Dgp& dgp, double step,
                       AlignmentMode mode, double abs_floor) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("finite-difference step must be positive");
    }
    const Objective objective(config, data, dgp);
    FdCheckResult result;
    result.analytic = flatten(objective.backward(params, mode).gradient);
    const auto base_signature = objective.kink_signature(params, mode);

    const auto x0 = flatten(params);
    result.numeric.assign(x0.size(), 0.0);
    ModelParams probe = params;
    auto x = x0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
        x[i] = x0[i] + step;
        unflatten(x, probe);
        const double plus = objective.loss(probe, mode);
        const bool plus_smooth = objective.kink_signature(probe, mode) == base_signature;
        x[i] = x0[i] - step;
        unflatten(x, probe);
        const double minus = objective.loss(probe, mode);
        const bool minus_smooth = objective.kink_signature(probe, mode) == base_signature;
        x[i] = x0[i];

        result.numeric[i] = (plus - minus) / (2.0 * step);
        if (!plus_smooth || !minus_smooth) {
            result.near_kink.push_back(i);
            continue;
        }
        const double a = result.analytic[i];
        const double n = result.numeric[i];
        const double rel = std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), abs_floor});
        ++result.checked;
        if (rel > result.max_rel_error) {
            result.max_rel_error = rel;
            result.worst_index = i;
        }
    }
    return result;
}

} // namespace relseg
