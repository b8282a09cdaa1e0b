#pragma once

#include "relseg/cli/config.hpp"
#include "relseg/cli/csv.hpp"
#include "relseg/cli/model_document.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace relseg::cli {

struct ReportRow {
    std::int64_t id = 0;
    double loss = 0.0;
    ChangePoints change_points;
    std::optional<double> d_hdf; ///< empty when nothing was detected
    std::optional<double> d_fro;
};

/// Fits every record with `config` (sequence i uses the seed
/// derive_seed(config.seed, {id})). Runs sequences in a bounded pool.
std::vector<FittedSequence> fit_records(std::span<const SequenceRecord> records,
                                        const RunConfig& config,
                                        std::vector<Segmentation>* hard_segs = nullptr);

/// Report rows; metric columns are filled when `truth` is nonempty.
std::vector<ReportRow> make_report(std::span<const FittedSequence> fits,
                                   std::span<const Segmentation> hard_segs,
                                   std::span<const TruthRecord> truth);

void write_report(std::ostream& out, std::span<const ReportRow> rows, bool with_metrics);
std::vector<ReportRow> read_report(std::istream& in);

int cmd_simulate(const RunConfig& config);
int cmd_fit(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_bench(const RunConfig& config, std::ostream& out);

/// Dispatches on config.command.
int run(const RunConfig& config, std::ostream& out);

} // namespace relseg::cli
