#pragma once

#include "relseg/dgp.hpp"
#include "relseg/model.hpp"
#include "relseg/train.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace relseg::cli {

/// Which DGP to fit and how its data columns map onto it.
struct DgpSpec {
    std::string name = "normal"; ///< normal | poisson | softmax | const
    int classes = 2;             ///< softmax: number of labels
    int hidden = 8;              ///< softmax: width of the shared feature layer
    std::vector<std::string> covariates; ///< per-segment covariate columns
    std::vector<std::string> tied;       ///< covariate columns tied across segments

    /// Throws std::invalid_argument for an unknown name or inconsistent options.
    std::unique_ptr<Dgp> make(std::size_t obs_dim) const;
    /// Covariate columns in the order the DGP consumes them.
    std::vector<std::string> columns() const;
};

struct RunConfig {
    std::string command;

    // files
    std::string input;
    std::string output;
    std::string truth;
    std::string model;
    std::string report;
    std::string histogram;
    std::vector<std::string> reports;

    // fitting
    ModelConfig model_config{11, 0.125, 16.0, 0};
    TrainSchedule schedule{};
    DgpSpec dgp;
    std::uint64_t seed = 0;
    std::size_t workers = 0; ///< 0: RELSEG_THREADS or hardware concurrency

    // simulate
    std::string scenario = "arlot"; ///< arlot | poisson | drift | const
    int sequences = 500;
    std::size_t length = 1000;
    ChangePoints change_points{100, 130, 220, 320, 370, 520, 620, 740, 790, 870};
    int segments = 4;    ///< poisson/const scenarios
    int dim = 12;        ///< const scenario
    int inputs = 2;      ///< drift scenario
    double sigma = 0.1;  ///< const scenario

    // eval / bench
    bool random_baseline = false;
    int draws = 500;
    std::vector<double> widths{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> powers{4, 8, 16, 32};
    int limit = 0; ///< bench: fit only the first `limit` sequences (0 = all)

    std::size_t resolved_workers() const;
};

/// Registers every subcommand and option on `app`, writing into `config`.
/// A `--config FILE` (TOML/INI) is supported; flags override file values,
/// which override the defaults above.
void add_options(CLI::App& app, RunConfig& config);

} // namespace relseg::cli
