#include "relseg/sequence.hpp"

#include <stdexcept>

namespace relseg {

SequenceData::SequenceData(std::size_t obs_dim, std::vector<double> obs, std::size_t cov_dim,
                           std::vector<double> cov)
    : obs_dim_{obs_dim}, cov_dim_{cov_dim}, obs_{std::move(obs)}, cov_{std::move(cov)} {
    if (obs_dim_ == 0) {
        throw std::invalid_argument("observation dimension must be positive");
    }
    if (obs_.size() % obs_dim_ != 0) {
        throw std::invalid_argument("observation buffer is not a multiple of the dimension");
    }
    length_ = obs_.size() / obs_dim_;
    if (cov_.size() != length_ * cov_dim_) {
        throw std::invalid_argument("covariate buffer does not match T x cov_dim");
    }
}

SequenceData SequenceData::scalar(std::vector<double> obs) {
    return SequenceData(1, std::move(obs));
}

} // namespace relseg
