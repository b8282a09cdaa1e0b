#include "relseg/model.hpp"

#include "relseg/tsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relseg {

void ModelConfig::validate() const {
    if (segments < 1) {
        throw std::invalid_argument("number of segments must be >= 1");
    }
    if (length < 2) {
        throw std::invalid_argument("sequence length must be >= 2");
    }
    if (static_cast<std::size_t>(segments) >= length) {
        throw std::invalid_argument("number of segments (" + std::to_string(segments) +
                                    ") must be smaller than the sequence length (" +
                                    std::to_string(length) + ")");
    }
    if (!(width > 0.0 && width <= 1.0)) {
        throw std::invalid_argument("TSP width must lie in (0, 1]");
    }
    if (!(power > 1.0) || !std::isfinite(power)) {
        throw std::invalid_argument("TSP power must be > 1");
    }
}

WarpParams::WarpParams(int segments) {
    if (segments < 1) {
        throw std::invalid_argument("WarpParams needs at least one segment");
    }
    mu_.assign(static_cast<std::size_t>(segments), 0.0);
}

WarpParams WarpParams::from_trainable(std::span<const double> trainable) {
    WarpParams warp(static_cast<int>(trainable.size()) + 1);
    std::copy(trainable.begin(), trainable.end(), warp.mu_.begin() + 1);
    return warp;
}

SegmentParams::SegmentParams(int segments, int per_segment, int global)
    : segments_{segments}, per_segment_{per_segment} {
    if (segments < 1 || per_segment < 1 || global < 0) {
        throw std::invalid_argument("SegmentParams needs K >= 1, P >= 1, G >= 0");
    }
    theta_.assign(static_cast<std::size_t>(segments) * static_cast<std::size_t>(per_segment), 0.0);
    global_.assign(static_cast<std::size_t>(global), 0.0);
}

std::span<const double> SegmentParams::row(int k) const {
    return std::span<const double>(theta_).subspan(static_cast<std::size_t>(k * per_segment_),
                                                   static_cast<std::size_t>(per_segment_));
}

std::span<double> SegmentParams::row(int k) {
    return std::span<double>(theta_).subspan(static_cast<std::size_t>(k * per_segment_),
                                             static_cast<std::size_t>(per_segment_));
}

std::vector<double> WeightRow::dense(int segments) const {
    std::vector<double> out(static_cast<std::size_t>(segments), 0.0);
    out[static_cast<std::size_t>(index)] = lower;
    if (upper > 0.0) {
        out[static_cast<std::size_t>(index) + 1] = upper;
    }
    return out;
}

std::vector<double> unit_grid(std::size_t length) {
    if (length < 2) {
        throw std::invalid_argument("unit grid needs at least two points");
    }
    std::vector<double> grid(length);
    const double denom = static_cast<double>(length - 1);
    for (std::size_t t = 0; t < length; ++t) {
        grid[t] = static_cast<double>(t) / denom;
    }
    return grid;
}

std::vector<double> modes_from_mu(std::span<const double> mu) {
    if (mu.empty()) {
        throw std::invalid_argument("modes_from_mu needs at least one parameter");
    }
    const double shift = *std::max_element(mu.begin(), mu.end());
    std::vector<double> cumulative(mu.size());
    double total = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        total += std::exp(mu[k] - shift);
        cumulative[k] = total;
    }
    std::vector<double> modes(mu.size() - 1);
    for (std::size_t k = 0; k + 1 < mu.size(); ++k) {
        modes[k] = cumulative[k] / total;
    }
    return modes;
}

std::vector<double> modes_from_mu(const WarpParams& warp) {
    return modes_from_mu(warp.mu());
}

WarpParams warp_from_modes(std::span<const double> modes) {
    std::vector<double> trainable(modes.size());
    if (modes.empty()) {
        return WarpParams(1);
    }
    // mu_j = log(m_j - m_{j-1}) - log(m_1), with m_K := 1.
    const double first = std::log(modes[0]);
    for (std::size_t j = 1; j <= modes.size(); ++j) {
        const double next = j < modes.size() ? modes[j] : 1.0;
        const double gap = next - modes[j - 1];
        if (!(gap > 0.0) || !(modes[0] > 0.0)) {
            throw std::invalid_argument("modes must be strictly increasing inside (0, 1)");
        }
        trainable[j - 1] = std::log(gap) - first;
    }
    return WarpParams::from_trainable(trainable);
}

double warp_tsp(double u, std::span<const double> modes, double width, double power) {
    if (modes.empty()) {
        throw std::invalid_argument("warp_tsp needs at least one mode");
    }
    double sum = 0.0;
    for (double m : modes) {
        sum += tsp_cdf(u, TspComponent(m, width, power));
    }
    return sum / static_cast<double>(modes.size());
}

std::vector<double> seg_predict(std::span<const double> gamma, int segments) {
    std::vector<double> zeta_hat(gamma.size());
    const double scale = static_cast<double>(segments - 1);
    std::transform(gamma.begin(), gamma.end(), zeta_hat.begin(),
                   [scale](double g) { return 1.0 + g * scale; });
    return zeta_hat;
}

WeightRow weights(double zeta_hat, int segments) {
    const double clamped = std::clamp(zeta_hat, 1.0, static_cast<double>(segments));
    const double base = std::floor(clamped);
    const int index = static_cast<int>(base) - 1;
    if (index >= segments - 1) {
        return {segments - 1, 1.0, 0.0};
    }
    const double frac = clamped - base;
    return {index, 1.0 - frac, frac};
}

void param_predict(const WeightRow& row, const SegmentParams& params, std::span<double> out) {
    const auto per_segment = static_cast<std::size_t>(params.per_segment());
    if (out.size() != static_cast<std::size_t>(params.predicted_size())) {
        throw std::invalid_argument("param_predict: output size does not match P + G");
    }
    if (row.index < 0 || row.index >= params.segments() ||
        (row.upper > 0.0 && row.index + 1 >= params.segments())) {
        throw std::invalid_argument("param_predict: weight row does not match the segment count");
    }
    auto lo = params.row(row.index);
    if (row.upper > 0.0) {
        auto hi = params.row(row.index + 1);
        for (std::size_t p = 0; p < per_segment; ++p) {
            out[p] = row.lower * lo[p] + row.upper * hi[p];
        }
    } else {
        for (std::size_t p = 0; p < per_segment; ++p) {
            out[p] = row.lower * lo[p];
        }
    }
    auto global = params.global();
    std::copy(global.begin(), global.end(), out.begin() + static_cast<std::ptrdiff_t>(per_segment));
}

std::vector<double> param_predict(const WeightRow& row, const SegmentParams& params) {
    std::vector<double> out(static_cast<std::size_t>(params.predicted_size()));
    param_predict(row, params, out);
    return out;
}

SoftAlignment soft_alignment(const WarpParams& warp, const ModelConfig& config) {
    config.validate();
    const int segments = warp.segments();
    if (segments != config.segments) {
        throw std::invalid_argument("warp parameters do not match the configured segment count");
    }
    SoftAlignment out;
    out.zeta_hat.assign(config.length, 1.0);
    if (segments > 1) {
        const auto grid = unit_grid(config.length);
        std::vector<TspComponent> components;
        for (double m : modes_from_mu(warp)) {
            components.emplace_back(m, config.width, config.power);
        }
        for (std::size_t t = 0; t < config.length; ++t) {
            double sum = 0.0;
            for (const auto& c : components) {
                sum += tsp_cdf(grid[t], c);
            }
            out.zeta_hat[t] = 1.0 + sum;
        }
    }
    out.weights.reserve(config.length);
    for (double z : out.zeta_hat) {
        out.weights.push_back(weights(z, segments));
    }
    return out;
}

int round_segment(double zeta_hat, int segments) {
    const int k = static_cast<int>(std::floor(zeta_hat + 0.5));
    return std::clamp(k, 1, segments);
}

Segmentation hard_segmentation(std::span<const double> zeta_hat, int segments) {
    Segmentation seg(zeta_hat.size());
    std::transform(zeta_hat.begin(), zeta_hat.end(), seg.begin(),
                   [segments](double z) { return round_segment(z, segments); });
    return seg;
}

Segmentation hard_segmentation(std::span<const double> zeta_hat) {
    double top = 1.0;
    for (double z : zeta_hat) {
        top = std::max(top, z);
    }
    return hard_segmentation(zeta_hat, static_cast<int>(std::floor(top + 0.5)));
}

ChangePoints change_points(std::span<const int> segmentation) {
    ChangePoints out;
    for (std::size_t t = 1; t < segmentation.size(); ++t) {
        if (segmentation[t] > segmentation[t - 1]) {
            out.push_back(static_cast<int>(t) + 1);
        }
    }
    return out;
}

Segmentation segmentation_from_change_points(std::span<const int> cps, std::size_t length) {
    Segmentation seg(length, 1);
    int label = 1;
    std::size_t next = 0;
    for (std::size_t t = 0; t < length; ++t) {
        while (next < cps.size() && static_cast<std::size_t>(cps[next]) == t + 1) {
            ++label;
            ++next;
        }
        seg[t] = label;
    }
    if (next != cps.size()) {
        throw std::invalid_argument("change points must be strictly increasing and lie in [2, T]");
    }
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] < 2 || (i > 0 && cps[i] <= cps[i - 1])) {
            throw std::invalid_argument("change points must be strictly increasing and lie in [2, T]");
        }
    }
    return seg;
}

void validate_segmentation(std::span<const int> segmentation) {
    if (segmentation.empty() || segmentation.front() != 1) {
        throw std::invalid_argument("segmentation must start with segment 1");
    }
    for (std::size_t t = 1; t < segmentation.size(); ++t) {
        const int step = segmentation[t] - segmentation[t - 1];
        if (step < 0 || step > 1) {
            throw std::invalid_argument("segmentation must be monotone and onto: label jumps by " +
                                        std::to_string(step) + " at t=" + std::to_string(t + 1));
        }
    }
}

ExactWarp exact_warp_from_segmentation(std::span<const int> segmentation) {
    validate_segmentation(segmentation);
    const auto cps = change_points(segmentation);
    if (cps.empty()) {
        throw std::invalid_argument("segmentation needs at least two segments");
    }
    const auto grid = unit_grid(segmentation.size());
    ExactWarp out;
    out.width = 1.0 / static_cast<double>(segmentation.size() - 1);
    for (int tau : cps) {
        const auto idx = static_cast<std::size_t>(tau) - 1;
        out.modes.push_back(0.5 * (grid[idx] + grid[idx - 1]));
    }
    return out;
}

} // namespace relseg
