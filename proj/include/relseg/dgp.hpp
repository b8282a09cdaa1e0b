#pragma once

#include "relseg/model.hpp"
#include "relseg/rng.hpp"
#include "relseg/sequence.hpp"

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relseg {

/// Raised for malformed or out-of-domain input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shape of the parameters a DGP consumes: P per-segment entries, G tied
/// entries appended to every predicted vector, and I internal parameters
/// shared across segments (e.g. a feature layer).
struct ParamLayout {
    int per_segment = 1;
    int global = 0;
    int internal = 0;
};

/// Per-time-step conditional model x_t | z_t ~ f(z_t, theta_hat_t).
///
/// Implementations are stateless after construction and safe to call
/// concurrently.
class Dgp {
public:
    virtual ~Dgp() = default;

    virtual std::string name() const = 0;
    virtual ParamLayout layout() const = 0;

    /// Throws DataError if the sequence cannot be modelled by this DGP.
    virtual void check_data(const SequenceData& data) const = 0;

    /// Loss without terms that depend on the data only.
    virtual double objective_at(const SequenceData& data, std::size_t t,
                                std::span<const double> theta_hat,
                                std::span<const double> internal) const = 0;

    /// Writes d(objective)/d(theta_hat) into `d_theta_hat`, adds the
    /// internal-parameter gradient into `d_internal`, returns objective_at.
    virtual double gradient_at(const SequenceData& data, std::size_t t,
                               std::span<const double> theta_hat,
                               std::span<const double> internal, std::span<double> d_theta_hat,
                               std::span<double> d_internal) const = 0;

    /// Data-only term of the negative log-likelihood at t (e.g. log x!).
    virtual double data_constant_at(const SequenceData& /*data*/, std::size_t /*t*/) const {
        return 0.0;
    }

    /// Complete per-step loss: objective plus data constant.
    double loss_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                   std::span<const double> internal) const {
        return objective_at(data, t, theta_hat, internal) + data_constant_at(data, t);
    }

    /// Starting values for one restart.
    virtual void initialize(const SequenceData& data, Rng& rng, SegmentParams& params,
                            std::vector<double>& internal) const = 0;

    /// Appends discrete state that marks non-differentiable points (e.g.
    /// rectifier activation pattern). Used by the finite-difference checker.
    virtual void append_kink_signature(const SequenceData& /*data*/, std::size_t /*t*/,
                                       std::span<const double> /*theta_hat*/,
                                       std::span<const double> /*internal*/,
                                       std::vector<int>& /*signature*/) const {}
};

// Per-step losses -----------------------------------------------------------

/// 0.5 (logvar + log 2 pi + (x - mean)^2 exp(-logvar)); theta_hat = (mean, logvar).
double normal_nll(double x, std::span<const double> theta_hat);
double normal_nll_grad(double x, std::span<const double> theta_hat, std::span<double> d_theta_hat);

/// exp(eta) - x eta + log(x!). Throws DataError for negative or fractional x.
double poisson_nll(double count, double eta);

/// Cross-entropy of class `label` (1-based) under softmax(scores), stabilised
/// by max subtraction. Throws std::out_of_range for an invalid label.
double softmax_ce(int label, std::span<const double> scores);
double softmax_ce_grad(int label, std::span<const double> scores, std::span<double> d_scores);
std::vector<double> softmax(std::span<const double> scores);

/// ||x - theta_hat||^2.
double mse_loss(std::span<const double> x, std::span<const double> theta_hat);
double mse_loss_grad(std::span<const double> x, std::span<const double> theta_hat,
                     std::span<double> d_theta_hat);

// DGPs ----------------------------------------------------------------------

/// Scalar observations, segment parameters (mean, log-variance).
class NormalDgp final : public Dgp {
public:
    std::string name() const override { return "normal"; }
    ParamLayout layout() const override { return {2, 0, 0}; }
    void check_data(const SequenceData& data) const override;
    double objective_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                        std::span<const double> internal) const override;
    double gradient_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                       std::span<const double> internal, std::span<double> d_theta_hat,
                       std::span<double> d_internal) const override;
    void initialize(const SequenceData& data, Rng& rng, SegmentParams& params,
                    std::vector<double>& internal) const override;
};

/// Poisson regression with log link. The linear predictor is
///   eta_t = bias_k + slope_k * (t / T) + sum_j beta_kj z_tj + sum_g alpha_g z_tg
/// where the first `untied` covariate columns get per-segment coefficients
/// and the remaining `tied` columns get coefficients shared by all segments.
/// Slopes are in units of the rescaled time t/T; divide by T for per-step
/// growth rates.
class PoissonGlmDgp final : public Dgp {
public:
    PoissonGlmDgp(int untied, int tied);

    std::string name() const override { return "poisson"; }
    ParamLayout layout() const override { return {2 + untied_, tied_, 0}; }
    void check_data(const SequenceData& data) const override;
    double objective_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                        std::span<const double> internal) const override;
    double gradient_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                       std::span<const double> internal, std::span<double> d_theta_hat,
                       std::span<double> d_internal) const override;
    double data_constant_at(const SequenceData& data, std::size_t t) const override;
    void initialize(const SequenceData& data, Rng& rng, SegmentParams& params,
                    std::vector<double>& internal) const override;

    double linear_predictor(const SequenceData& data, std::size_t t,
                            std::span<const double> theta_hat) const;

private:
    int untied_;
    int tied_;
};

/// Softmax regression over a shared rectified affine feature layer.
/// Observations are class labels 1..C; covariates are raw features of width
/// `inputs`. Segment parameters are a C x D score matrix (row-major); the
/// internal parameters are the D x inputs weight matrix followed by D biases.
class SoftmaxDgp final : public Dgp {
public:
    SoftmaxDgp(int classes, int inputs, int hidden = 8);

    std::string name() const override { return "softmax"; }
    ParamLayout layout() const override;
    void check_data(const SequenceData& data) const override;
    double objective_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                        std::span<const double> internal) const override;
    double gradient_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                       std::span<const double> internal, std::span<double> d_theta_hat,
                       std::span<double> d_internal) const override;
    void initialize(const SequenceData& data, Rng& rng, SegmentParams& params,
                    std::vector<double>& internal) const override;
    void append_kink_signature(const SequenceData& data, std::size_t t,
                               std::span<const double> theta_hat, std::span<const double> internal,
                               std::vector<int>& signature) const override;

    int classes() const { return classes_; }
    int inputs() const { return inputs_; }
    int hidden() const { return hidden_; }

    /// Rectified features of z_t.
    std::vector<double> features(std::span<const double> raw, std::span<const double> internal) const;
    std::vector<double> scores(const SequenceData& data, std::size_t t,
                               std::span<const double> theta_hat,
                               std::span<const double> internal) const;
    /// Most probable class (1-based).
    int predict(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                std::span<const double> internal) const;

private:
    int classes_;
    int inputs_;
    int hidden_;
};

/// Deterministic piecewise-constant output: x_t = theta_hat, squared error loss.
class ConstDgp final : public Dgp {
public:
    explicit ConstDgp(int dim);

    std::string name() const override { return "const"; }
    ParamLayout layout() const override { return {dim_, 0, 0}; }
    void check_data(const SequenceData& data) const override;
    double objective_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                        std::span<const double> internal) const override;
    double gradient_at(const SequenceData& data, std::size_t t, std::span<const double> theta_hat,
                       std::span<const double> internal, std::span<double> d_theta_hat,
                       std::span<double> d_internal) const override;
    void initialize(const SequenceData& data, Rng& rng, SegmentParams& params,
                    std::vector<double>& internal) const override;

private:
    int dim_;
};

} // namespace relseg
