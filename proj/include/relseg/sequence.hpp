#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace relseg {

/// Observations x_1..x_T (each `obs_dim` wide) with optional covariates
/// z_1..z_T (each `cov_dim` wide), stored row-major.
class SequenceData {
public:
    SequenceData() = default;
    SequenceData(std::size_t obs_dim, std::vector<double> obs, std::size_t cov_dim = 0,
                 std::vector<double> cov = {});

    /// Scalar observations without covariates.
    static SequenceData scalar(std::vector<double> obs);

    std::size_t length() const { return length_; }
    std::size_t obs_dim() const { return obs_dim_; }
    std::size_t cov_dim() const { return cov_dim_; }

    std::span<const double> x(std::size_t t) const {
        return std::span<const double>(obs_).subspan(t * obs_dim_, obs_dim_);
    }
    std::span<const double> z(std::size_t t) const {
        return std::span<const double>(cov_).subspan(t * cov_dim_, cov_dim_);
    }
    std::span<const double> observations() const { return obs_; }
    std::span<const double> covariates() const { return cov_; }

private:
    std::size_t length_ = 0;
    std::size_t obs_dim_ = 1;
    std::size_t cov_dim_ = 0;
    std::vector<double> obs_;
    std::vector<double> cov_;
};

} // namespace relseg
