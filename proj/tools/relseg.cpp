#include "relseg/cli/commands.hpp"
#include "relseg/dgp.hpp"
#include "relseg/train.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kUsageError = 2;
constexpr int kDataError = 3;
constexpr int kOptimizationError = 4;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relaxed segmented models with TSP-based warping functions"};
    relseg::cli::RunConfig config;
    relseg::cli::add_options(app, config);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }
    try {
        return relseg::cli::run(config, std::cout);
    } catch (const relseg::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const relseg::OptimizationError& e) {
        std::cerr << "optimization failed: " << e.what() << '\n';
        return kOptimizationError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
