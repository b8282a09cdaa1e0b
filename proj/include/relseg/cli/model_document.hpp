#pragma once

#include "relseg/cli/config.hpp"
#include "relseg/grad.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace relseg::cli {

struct FittedSequence {
    std::int64_t id = 0;
    std::size_t length = 0;
    std::uint64_t fit_seed = 0;
    double loss = 0.0;
    int best_restart = 0;
    ChangePoints change_points;
    ModelParams params;
    /// NaN marks a diverged restart (stored as null).
    std::vector<double> per_restart_losses;
};

/// Everything needed to reproduce and inspect a fit: hyperparameters, DGP
/// options, and per sequence the warping parameters mu, segment parameters
/// theta, tied block, internal parameters (phi), loss and change points.
struct ModelDocument {
    static constexpr int kVersion = 1;

    ModelConfig model;
    TrainSchedule schedule;
    DgpSpec dgp;
    std::vector<FittedSequence> sequences;
};

/// Pretty-printed JSON followed by a newline. Numbers use the shortest
/// exact representation, so load followed by save reproduces the text.
std::string save_model(const ModelDocument& doc);
/// Throws DataError on malformed input or an unsupported version.
ModelDocument load_model(std::string_view text);

void write_model_file(const std::string& path, const ModelDocument& doc);
ModelDocument read_model_file(const std::string& path);

} // namespace relseg::cli
