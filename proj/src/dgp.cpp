#include "relseg/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace relseg {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Initial spread of the segment parameters around the data-informed start.
constexpr double kMeanJitter = 0.1;    // in units of the sequence standard deviation
constexpr double kLogVarJitter = 0.1;
constexpr double kNoiseScale = 0.01;

bool is_count(double x) {
    return std::isfinite(x) && x >= 0.0 && x == std::floor(x);
}

void check_finite(const SequenceData& data) {
    for (double v : data.observations()) {
        if (!std::isfinite(v)) {
            throw DataError("observations must be finite");
        }
    }
    for (double v : data.covariates()) {
        if (!std::isfinite(v)) {
            throw DataError("covariates must be finite");
        }
    }
}

double log_sum_exp(std::span<const double> values) {
    const double top = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) {
        sum += std::exp(v - top);
    }
    return top + std::log(sum);
}

} // namespace

// Per-step losses -----------------------------------------------------------

double normal_nll(double x, std::span<const double> theta_hat) {
    const double resid = x - theta_hat[0];
    const double logvar = theta_hat[1];
    return 0.5 * (logvar + kLog2Pi + resid * resid * std::exp(-logvar));
}

double normal_nll_grad(double x, std::span<const double> theta_hat, std::span<double> d_theta_hat) {
    const double resid = x - theta_hat[0];
    const double logvar = theta_hat[1];
    const double precision = std::exp(-logvar);
    const double scaled = resid * resid * precision;
    d_theta_hat[0] = -resid * precision;
    d_theta_hat[1] = 0.5 * (1.0 - scaled);
    return 0.5 * (logvar + kLog2Pi + scaled);
}

double poisson_nll(double count, double eta) {
    if (!is_count(count)) {
        throw DataError("Poisson observations must be nonnegative integers, got " +
                        std::to_string(count));
    }
    return std::exp(eta) - count * eta + std::lgamma(count + 1.0);
}

double softmax_ce(int label, std::span<const double> scores) {
    if (label < 1 || label > static_cast<int>(scores.size())) {
        throw std::out_of_range("class label " + std::to_string(label) + " outside 1.." +
                                std::to_string(scores.size()));
    }
    return log_sum_exp(scores) - scores[static_cast<std::size_t>(label - 1)];
}

double softmax_ce_grad(int label, std::span<const double> scores, std::span<double> d_scores) {
    const double loss = softmax_ce(label, scores);
    const double lse = loss + scores[static_cast<std::size_t>(label - 1)];
    for (std::size_t c = 0; c < scores.size(); ++c) {
        d_scores[c] = std::exp(scores[c] - lse);
    }
    d_scores[static_cast<std::size_t>(label - 1)] -= 1.0;
    return loss;
}

std::vector<double> softmax(std::span<const double> scores) {
    const double lse = log_sum_exp(scores);
    std::vector<double> probs(scores.size());
    std::transform(scores.begin(), scores.end(), probs.begin(),
                   [lse](double s) { return std::exp(s - lse); });
    return probs;
}

double mse_loss(std::span<const double> x, std::span<const double> theta_hat) {
    if (x.size() != theta_hat.size()) {
        throw std::invalid_argument("mse_loss: dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i] - theta_hat[i];
        sum += r * r;
    }
    return sum;
}

double mse_loss_grad(std::span<const double> x, std::span<const double> theta_hat,
                     std::span<double> d_theta_hat) {
    if (x.size() != theta_hat.size() || d_theta_hat.size() != x.size()) {
        throw std::invalid_argument("mse_loss: dimension mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = theta_hat[i] - x[i];
        d_theta_hat[i] = 2.0 * r;
        sum += r * r;
    }
    return sum;
}

// NormalDgp -----------------------------------------------------------------

void NormalDgp::check_data(const SequenceData& data) const {
    if (data.obs_dim() != 1) {
        throw DataError("normal DGP expects scalar observations");
    }
    check_finite(data);
}

double NormalDgp::objective_at(const SequenceData& data, std::size_t t,
                               std::span<const double> theta_hat,
                               std::span<const double> /*internal*/) const {
    return normal_nll(data.x(t)[0], theta_hat);
}

double NormalDgp::gradient_at(const SequenceData& data, std::size_t t,
                              std::span<const double> theta_hat,
                              std::span<const double> /*internal*/, std::span<double> d_theta_hat,
                              std::span<double> /*d_internal*/) const {
    return normal_nll_grad(data.x(t)[0], theta_hat, d_theta_hat);
}

void NormalDgp::initialize(const SequenceData& data, Rng& rng, SegmentParams& params,
                           std::vector<double>& internal) const {
    internal.clear();
    const auto obs = data.observations();
    const double n = static_cast<double>(obs.size());
    const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : obs) {
        ss += (x - mean) * (x - mean);
    }
    const double var = std::max(ss / n, 1e-12);
    const double sd = std::sqrt(var);
    for (int k = 0; k < params.segments(); ++k) {
        auto row = params.row(k);
        row[0] = mean + kMeanJitter * sd * rng.normal();
        row[1] = std::log(var) + kLogVarJitter * rng.normal();
    }
}

// PoissonGlmDgp -------------------------------------------------------------

PoissonGlmDgp::PoissonGlmDgp(int untied, int tied) : untied_{untied}, tied_{tied} {
    if (untied < 0 || tied < 0) {
        throw std::invalid_argument("covariate counts must be nonnegative");
    }
}

void PoissonGlmDgp::check_data(const SequenceData& data) const {
    if (data.obs_dim() != 1) {
        throw DataError("Poisson DGP expects scalar counts");
    }
    if (data.cov_dim() != static_cast<std::size_t>(untied_ + tied_)) {
        throw DataError("Poisson DGP expects " + std::to_string(untied_ + tied_) +
                        " covariate columns, got " + std::to_string(data.cov_dim()));
    }
    check_finite(data);
    for (std::size_t t = 0; t < data.length(); ++t) {
        if (!is_count(data.x(t)[0])) {
            throw DataError("Poisson observation at t=" + std::to_string(t + 1) +
                            " is not a nonnegative integer");
        }
    }
}

double PoissonGlmDgp::linear_predictor(const SequenceData& data, std::size_t t,
                                       std::span<const double> theta_hat) const {
    const double time = static_cast<double>(t + 1) / static_cast<double>(data.length());
    const auto z = data.z(t);
    double eta = theta_hat[0] + theta_hat[1] * time;
    for (std::size_t j = 0; j < z.size(); ++j) {
        eta += theta_hat[2 + j] * z[j];
    }
    return eta;
}

double PoissonGlmDgp::objective_at(const SequenceData& data, std::size_t t,
                                   std::span<const double> theta_hat,
                                   std::span<const double> /*internal*/) const {
    const double eta = linear_predictor(data, t, theta_hat);
    return std::exp(eta) - data.x(t)[0] * eta;
}

double PoissonGlmDgp::gradient_at(const SequenceData& data, std::size_t t,
                                  std::span<const double> theta_hat,
                                  std::span<const double> /*internal*/,
                                  std::span<double> d_theta_hat,
                                  std::span<double> /*d_internal*/) const {
    const double eta = linear_predictor(data, t, theta_hat);
    const double count = data.x(t)[0];
    const double rate = std::exp(eta);
    const double d_eta = rate - count;
    const double time = static_cast<double>(t + 1) / static_cast<double>(data.length());
    const auto z = data.z(t);
    d_theta_hat[0] = d_eta;
    d_theta_hat[1] = d_eta * time;
    for (std::size_t j = 0; j < z.size(); ++j) {
        d_theta_hat[2 + j] = d_eta * z[j];
    }
    return rate - count * eta;
}

double PoissonGlmDgp::data_constant_at(const SequenceData& data, std::size_t t) const {
    return std::lgamma(data.x(t)[0] + 1.0);
}

void PoissonGlmDgp::initialize(const SequenceData& data, Rng& /*rng*/, SegmentParams& params,
                               std::vector<double>& internal) const {
    internal.clear();
    const auto obs = data.observations();
    const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
    const double bias = std::log(std::max(mean, 1e-3));
    for (int k = 0; k < params.segments(); ++k) {
        auto row = params.row(k);
        std::fill(row.begin(), row.end(), 0.0);
        row[0] = bias;
    }
    auto global = params.global();
    std::fill(global.begin(), global.end(), 0.0);
}

// SoftmaxDgp ----------------------------------------------------------------

SoftmaxDgp::SoftmaxDgp(int classes, int inputs, int hidden)
    : classes_{classes}, inputs_{inputs}, hidden_{hidden} {
    if (classes < 2 || inputs < 1 || hidden < 1) {
        throw std::invalid_argument("softmax DGP needs C >= 2, inputs >= 1, D >= 1");
    }
}

ParamLayout SoftmaxDgp::layout() const {
    return {classes_ * hidden_, 0, hidden_ * inputs_ + hidden_};
}

void SoftmaxDgp::check_data(const SequenceData& data) const {
    if (data.obs_dim() != 1) {
        throw DataError("softmax DGP expects one label column");
    }
    if (data.cov_dim() != static_cast<std::size_t>(inputs_)) {
        throw DataError("softmax DGP expects " + std::to_string(inputs_) +
                        " feature columns, got " + std::to_string(data.cov_dim()));
    }
    check_finite(data);
    for (std::size_t t = 0; t < data.length(); ++t) {
        const double label = data.x(t)[0];
        if (label != std::floor(label) || label < 1.0 || label > classes_) {
            throw DataError("class label at t=" + std::to_string(t + 1) + " outside 1.." +
                            std::to_string(classes_));
        }
    }
}

std::vector<double> SoftmaxDgp::features(std::span<const double> raw,
                                         std::span<const double> internal) const {
    const auto in = static_cast<std::size_t>(inputs_);
    const auto bias = internal.subspan(static_cast<std::size_t>(hidden_) * in);
    std::vector<double> out(static_cast<std::size_t>(hidden_));
    for (std::size_t h = 0; h < out.size(); ++h) {
        double pre = bias[h];
        for (std::size_t i = 0; i < in; ++i) {
            pre += internal[h * in + i] * raw[i];
        }
        out[h] = pre > 0.0 ? pre : 0.0;
    }
    return out;
}

std::vector<double> SoftmaxDgp::scores(const SequenceData& data, std::size_t t,
                                       std::span<const double> theta_hat,
                                       std::span<const double> internal) const {
    const auto feat = features(data.z(t), internal);
    std::vector<double> out(static_cast<std::size_t>(classes_), 0.0);
    for (std::size_t c = 0; c < out.size(); ++c) {
        for (std::size_t h = 0; h < feat.size(); ++h) {
            out[c] += theta_hat[c * feat.size() + h] * feat[h];
        }
    }
    return out;
}

int SoftmaxDgp::predict(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                        std::span<const double> internal) const {
    const auto s = scores(data, t, theta_hat, internal);
    return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin()) + 1;
}

double SoftmaxDgp::objective_at(const SequenceData& data, std::size_t t,
                                std::span<const double> theta_hat,
                                std::span<const double> internal) const {
    return softmax_ce(static_cast<int>(data.x(t)[0]), scores(data, t, theta_hat, internal));
}

double SoftmaxDgp::gradient_at(const SequenceData& data, std::size_t t,
                               std::span<const double> theta_hat,
                               std::span<const double> internal, std::span<double> d_theta_hat,
                               std::span<double> d_internal) const {
    const auto in = static_cast<std::size_t>(inputs_);
    const auto hid = static_cast<std::size_t>(hidden_);
    const auto cls = static_cast<std::size_t>(classes_);
    const auto raw = data.z(t);
    const auto bias = internal.subspan(hid * in);

    thread_local std::vector<double> pre, feat, s, ds;
    pre.resize(hid);
    feat.resize(hid);
    s.assign(cls, 0.0);
    ds.resize(cls);

    for (std::size_t h = 0; h < hid; ++h) {
        double acc = bias[h];
        for (std::size_t i = 0; i < in; ++i) {
            acc += internal[h * in + i] * raw[i];
        }
        pre[h] = acc;
        feat[h] = acc > 0.0 ? acc : 0.0;
    }
    for (std::size_t c = 0; c < cls; ++c) {
        for (std::size_t h = 0; h < hid; ++h) {
            s[c] += theta_hat[c * hid + h] * feat[h];
        }
    }
    const double loss = softmax_ce_grad(static_cast<int>(data.x(t)[0]), s, ds);

    auto d_bias = d_internal.subspan(hid * in);
    for (std::size_t h = 0; h < hid; ++h) {
        double d_feat = 0.0;
        for (std::size_t c = 0; c < cls; ++c) {
            d_theta_hat[c * hid + h] = ds[c] * feat[h];
            d_feat += theta_hat[c * hid + h] * ds[c];
        }
        // Rectifier slope at exactly zero is taken as zero.
        if (pre[h] > 0.0) {
            for (std::size_t i = 0; i < in; ++i) {
                d_internal[h * in + i] += d_feat * raw[i];
            }
            d_bias[h] += d_feat;
        }
    }
    return loss;
}

void SoftmaxDgp::initialize(const SequenceData& /*data*/, Rng& rng, SegmentParams& params,
                            std::vector<double>& internal) const {
    for (double& v : params.theta()) {
        v = kNoiseScale * rng.normal();
    }
    const auto in = static_cast<std::size_t>(inputs_);
    const auto hid = static_cast<std::size_t>(hidden_);
    internal.assign(hid * in + hid, 0.0);
    // He-style scaling keeps roughly half of the rectifiers active at the start.
    const double scale = std::sqrt(2.0 / static_cast<double>(inputs_));
    for (std::size_t i = 0; i < hid * in; ++i) {
        internal[i] = scale * rng.normal();
    }
}

void SoftmaxDgp::append_kink_signature(const SequenceData& data, std::size_t t,
                                       std::span<const double> /*theta_hat*/,
                                       std::span<const double> internal,
                                       std::vector<int>& signature) const {
    const auto in = static_cast<std::size_t>(inputs_);
    const auto hid = static_cast<std::size_t>(hidden_);
    const auto raw = data.z(t);
    for (std::size_t h = 0; h < hid; ++h) {
        double pre = internal[hid * in + h];
        for (std::size_t i = 0; i < in; ++i) {
            pre += internal[h * in + i] * raw[i];
        }
        signature.push_back(pre > 0.0 ? 1 : 0);
    }
}

// ConstDgp ------------------------------------------------------------------

ConstDgp::ConstDgp(int dim) : dim_{dim} {
    if (dim < 1) {
        throw std::invalid_argument("const DGP needs dimension >= 1");
    }
}

void ConstDgp::check_data(const SequenceData& data) const {
    if (data.obs_dim() != static_cast<std::size_t>(dim_)) {
        throw DataError("const DGP expects " + std::to_string(dim_) + " observation columns, got " +
                        std::to_string(data.obs_dim()));
    }
    check_finite(data);
}

double ConstDgp::objective_at(const SequenceData& data, std::size_t t,
                              std::span<const double> theta_hat,
                              std::span<const double> /*internal*/) const {
    return mse_loss(data.x(t), theta_hat);
}

double ConstDgp::gradient_at(const SequenceData& data, std::size_t t,
                             std::span<const double> theta_hat,
                             std::span<const double> /*internal*/, std::span<double> d_theta_hat,
                             std::span<double> /*d_internal*/) const {
    return mse_loss_grad(data.x(t), theta_hat, d_theta_hat);
}

void ConstDgp::initialize(const SequenceData& /*data*/, Rng& rng, SegmentParams& params,
                          std::vector<double>& internal) const {
    internal.clear();
    for (double& v : params.theta()) {
        v = kNoiseScale * rng.normal();
    }
}

} // namespace relseg
