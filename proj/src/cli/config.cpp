#include "relseg/cli/config.hpp"

#include "relseg/parallel.hpp"

#include <CLI11.hpp>

#include <map>
#include <stdexcept>

namespace relseg::cli {

std::unique_ptr<Dgp> DgpSpec::make(std::size_t obs_dim) const {
    if (name == "normal") {
        if (!covariates.empty() || !tied.empty()) {
            throw std::invalid_argument("the normal DGP takes no covariates");
        }
        return std::make_unique<NormalDgp>();
    }
    if (name == "poisson") {
        return std::make_unique<PoissonGlmDgp>(static_cast<int>(covariates.size()),
                                               static_cast<int>(tied.size()));
    }
    if (name == "softmax") {
        if (!tied.empty()) {
            throw std::invalid_argument("the softmax DGP has no tied covariates");
        }
        if (covariates.empty()) {
            throw std::invalid_argument("the softmax DGP needs feature columns (--covariates)");
        }
        return std::make_unique<SoftmaxDgp>(classes, static_cast<int>(covariates.size()), hidden);
    }
    if (name == "const") {
        if (!covariates.empty() || !tied.empty()) {
            throw std::invalid_argument("the const DGP takes no covariates");
        }
        return std::make_unique<ConstDgp>(static_cast<int>(obs_dim));
    }
    throw std::invalid_argument("unknown DGP '" + name + "' (expected normal, poisson, softmax or const)");
}

std::vector<std::string> DgpSpec::columns() const {
    std::vector<std::string> out = covariates;
    out.insert(out.end(), tied.begin(), tied.end());
    return out;
}

std::size_t RunConfig::resolved_workers() const {
    return workers > 0 ? workers : default_workers();
}

namespace {

void add_fit_options(CLI::App& sub, RunConfig& c) {
    static const std::map<std::string, WarpInit> kInit{{"mu", WarpInit::uniform_mu},
                                                       {"modes", WarpInit::uniform_modes}};
    sub.add_option("-K,--segments", c.model_config.segments, "Number of segments")
        ->capture_default_str();
    sub.add_option("-w,--width", c.model_config.width, "TSP window width")->capture_default_str();
    sub.add_option("-n,--power", c.model_config.power, "TSP power")->capture_default_str();
    sub.add_option("--epochs", c.schedule.total_epochs, "Total training epochs")
        ->capture_default_str();
    sub.add_option("--integer-epochs", c.schedule.integer_epochs,
                   "Final epochs with rounded segmentation")
        ->capture_default_str();
    sub.add_option("--lr", c.schedule.learning_rate, "Adam learning rate")->capture_default_str();
    sub.add_option("--restarts", c.schedule.restarts, "Random restarts per sequence")
        ->capture_default_str();
    sub.add_option("--init", c.schedule.warp_init, "Warp initialisation: mu or modes")
        ->transform(CLI::CheckedTransformer(kInit, CLI::ignore_case))
        ->default_str("mu");
    sub.add_option("--init-spread", c.schedule.init_spread, "Range of the uniform mu draw")
        ->capture_default_str();
    sub.add_option("--dgp", c.dgp.name, "normal | poisson | softmax | const")->capture_default_str();
    sub.add_option("--classes", c.dgp.classes, "Softmax classes")->capture_default_str();
    sub.add_option("--hidden", c.dgp.hidden, "Softmax feature-layer width")->capture_default_str();
    sub.add_option("--covariates", c.dgp.covariates, "Per-segment covariate columns")
        ->delimiter(',');
    sub.add_option("--tied", c.dgp.tied, "Covariate columns tied across segments")->delimiter(',');
}

void add_common(CLI::App& sub, RunConfig& c) {
    sub.add_option("--seed", c.seed, "Base random seed")->capture_default_str();
    sub.add_option("--threads", c.workers, "Worker threads (0: RELSEG_THREADS or all cores)")
        ->capture_default_str();
}

} // namespace

void add_options(CLI::App& app, RunConfig& c) {
    app.set_config("--config", "", "TOML/INI file with option values");
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Generate synthetic sequences and their truth");
    sim->add_option("--scenario", c.scenario, "arlot | poisson | drift | const")
        ->check(CLI::IsMember({"arlot", "poisson", "drift", "const"}))
        ->capture_default_str();
    sim->add_option("-N,--sequences", c.sequences, "Number of sequences")->capture_default_str();
    sim->add_option("-T,--length", c.length, "Sequence length")->capture_default_str();
    sim->add_option("--change-points", c.change_points, "Change points of the arlot scenario")
        ->delimiter(',');
    sim->add_option("-K,--segments", c.segments, "Segments (poisson, const)")->capture_default_str();
    sim->add_option("--dim", c.dim, "Observation width (const)")->capture_default_str();
    sim->add_option("--inputs", c.inputs, "Feature width (drift)")->capture_default_str();
    sim->add_option("--classes", c.dgp.classes, "Classes (drift)")->capture_default_str();
    sim->add_option("--sigma", c.sigma, "Noise standard deviation (const)")->capture_default_str();
    sim->add_option("-o,--output", c.output, "Sequence CSV (required)");
    sim->add_option("--truth", c.truth, "Truth CSV (required)");
    add_common(*sim, c);
    sim->parse_complete_callback([&c] { c.command = "simulate"; });

    auto* fit = app.add_subcommand("fit", "Fit a relaxed segmented model to every sequence");
    fit->add_option("-i,--input", c.input, "Sequence CSV (required)");
    fit->add_option("-m,--model", c.model, "Model document to write (JSON)");
    fit->add_option("-r,--report", c.report, "Report TSV (default: stdout)");
    fit->add_option("--truth", c.truth, "Truth CSV; adds d_hdf and d_fro columns");
    fit->add_option("--histogram", c.histogram, "Detection histogram TSV");
    add_fit_options(*fit, c);
    add_common(*fit, c);
    fit->parse_complete_callback([&c] { c.command = "fit"; });

    auto* eval = app.add_subcommand("eval", "Aggregate fit reports into mean and std rows");
    eval->add_option("-r,--report", c.reports, "Fit report TSV (repeatable)");
    eval->add_option("--truth", c.truth, "Truth CSV (needed for the random baseline)");
    eval->add_flag("--random-baseline", c.random_baseline, "Add the random change-point baseline");
    eval->add_option("--draws", c.draws, "Random baseline draws")->capture_default_str();
    eval->add_option("-T,--length", c.length, "Sequence length for the baseline")
        ->capture_default_str();
    eval->add_option("-o,--output", c.output, "Output TSV (default: stdout)");
    add_common(*eval, c);
    eval->parse_complete_callback([&c] { c.command = "eval"; });

    auto* bench = app.add_subcommand("bench", "Sweep TSP width and power over a data set");
    bench->add_option("-i,--input", c.input, "Sequence CSV (required)");
    bench->add_option("--truth", c.truth, "Truth CSV (required)");
    bench->add_option("--widths", c.widths, "TSP widths")->delimiter(',');
    bench->add_option("--powers", c.powers, "TSP powers")->delimiter(',');
    bench->add_option("--limit", c.limit, "Use the first N sequences (0: all)")->capture_default_str();
    bench->add_option("-o,--output", c.output, "Output TSV (default: stdout)");
    add_fit_options(*bench, c);
    add_common(*bench, c);
    bench->parse_complete_callback([&c] { c.command = "bench"; });

    // Checked here rather than with required(): CLI11 tests a subcommand's
    // required options before the parent's config file is applied.
    app.final_callback([&c] {
        auto need = [](const std::string& value, const std::string& flag) {
            if (value.empty()) {
                throw CLI::RequiredError(flag);
            }
        };
        if (c.command == "simulate") {
            need(c.output, "--output");
            need(c.truth, "--truth");
        } else if (c.command == "fit") {
            need(c.input, "--input");
        } else if (c.command == "bench") {
            need(c.input, "--input");
            need(c.truth, "--truth");
        }
    });
}

} // namespace relseg::cli
