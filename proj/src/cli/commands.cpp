#include "relseg/cli/commands.hpp"

#include "relseg/metrics.hpp"
#include "relseg/parallel.hpp"
#include "relseg/rng.hpp"
#include "relseg/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace relseg::cli {

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    return out;
}

/// Writes through `fallback` when `path` is empty.
template <class Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& fn) {
    if (path.empty()) {
        fn(fallback);
    } else {
        auto out = open_output(path);
        fn(out);
    }
}

std::string join(const ChangePoints& cps) {
    std::string out;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        out += (i > 0 ? ";" : "") + std::to_string(cps[i]);
    }
    return out;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : "NA";
}

std::optional<double> parse_optional(std::string_view field) {
    if (field == "NA") {
        return std::nullopt;
    }
    return parse_double(field);
}

} // namespace

std::vector<FittedSequence> fit_records(std::span<const SequenceRecord> records,
                                        const RunConfig& config,
                                        std::vector<Segmentation>* hard_segs) {
    if (records.empty()) {
        throw DataError("no sequences to fit");
    }
    const auto columns = config.dgp.columns();
    // Validate the DGP selection once, before spawning work.
    config.dgp.make(records.front().obs_dim);
    std::vector<FittedSequence> fits(records.size());
    std::vector<Segmentation> segs(records.size());
    const std::size_t workers = config.resolved_workers();
    const bool many = records.size() > 1;
    parallel_for(records.size(), many ? workers : 1, [&](std::size_t i) {
        const auto& rec = records[i];
        const auto data = rec.to_data(columns);
        const auto dgp = config.dgp.make(rec.obs_dim);
        ModelConfig model = config.model_config;
        model.length = data.length();
        TrainSchedule schedule = config.schedule;
        schedule.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(rec.id)});
        auto result = fit(data, model, *dgp, schedule, many ? 1 : workers);
        auto& f = fits[i];
        f.id = rec.id;
        f.length = data.length();
        f.fit_seed = schedule.seed;
        f.loss = result.best_loss;
        f.best_restart = result.best_restart;
        f.change_points = result.change_points;
        f.params = std::move(result.params);
        f.per_restart_losses = std::move(result.per_restart_losses);
        segs[i] = std::move(result.hard_seg);
    });
    if (hard_segs != nullptr) {
        *hard_segs = std::move(segs);
    }
    return fits;
}

std::vector<ReportRow> make_report(std::span<const FittedSequence> fits,
                                   std::span<const Segmentation> hard_segs,
                                   std::span<const TruthRecord> truth) {
    std::map<std::int64_t, const TruthRecord*> by_id;
    for (const auto& t : truth) {
        by_id[t.id] = &t;
    }
    std::vector<ReportRow> rows;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        ReportRow row{f.id, f.loss, f.change_points, std::nullopt, std::nullopt};
        if (!truth.empty()) {
            const auto it = by_id.find(f.id);
            if (it == by_id.end()) {
                throw DataError("no truth for sequence " + std::to_string(f.id));
            }
            const auto& true_cps = it->second->change_points;
            const auto true_seg = segmentation_from_change_points(true_cps, f.length);
            row.d_fro = frobenius(hard_segs[i], true_seg);
            if (!f.change_points.empty() && !true_cps.empty()) {
                row.d_hdf = hausdorff(f.change_points, true_cps);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_report(std::ostream& out, std::span<const ReportRow> rows, bool with_metrics) {
    out << "seq\tloss\tn_change_points\tchange_points";
    if (with_metrics) {
        out << "\td_hdf\td_fro";
    }
    out << '\n';
    for (const auto& row : rows) {
        out << row.id << '\t' << format_double(row.loss) << '\t' << row.change_points.size() << '\t'
            << join(row.change_points);
        if (with_metrics) {
            out << '\t' << format_optional(row.d_hdf) << '\t' << format_optional(row.d_fro);
        }
        out << '\n';
    }
}

std::vector<ReportRow> read_report(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty report");
    }
    const bool with_metrics = line == "seq\tloss\tn_change_points\tchange_points\td_hdf\td_fro";
    if (!with_metrics && line != "seq\tloss\tn_change_points\tchange_points") {
        throw DataError("unrecognised report header");
    }
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split(line, '\t');
        if (f.size() != (with_metrics ? 6u : 4u)) {
            throw DataError("malformed report row: " + line);
        }
        ReportRow row;
        row.id = static_cast<std::int64_t>(parse_double(f[0]));
        row.loss = parse_double(f[1]);
        if (!f[3].empty()) {
            for (auto part : split(f[3], ';')) {
                row.change_points.push_back(static_cast<int>(parse_double(part)));
            }
        }
        if (with_metrics) {
            row.d_hdf = parse_optional(f[4]);
            row.d_fro = parse_optional(f[5]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

int cmd_simulate(const RunConfig& c) {
    if (c.sequences < 1) {
        throw std::invalid_argument("--sequences must be >= 1");
    }
    std::vector<SequenceRecord> records(static_cast<std::size_t>(c.sequences));
    std::vector<TruthRecord> truth(records.size());
    const std::size_t workers = c.resolved_workers();
    if (c.scenario == "arlot") {
        ScenarioSpec spec{c.length, c.change_points, c.sequences, c.seed};
        const auto scenario = gen_arlot_s1(spec, workers);
        for (std::size_t i = 0; i < records.size(); ++i) {
            records[i] = {static_cast<std::int64_t>(i + 1), 1, scenario.sequences[i].values, {}, {}};
            truth[i] = {records[i].id, c.change_points};
        }
    } else {
        parallel_for(records.size(), workers, [&](std::size_t i) {
            const auto id = static_cast<std::int64_t>(i + 1);
            const auto seed = derive_seed(c.seed, {static_cast<std::uint64_t>(id)});
            auto& rec = records[i];
            rec.id = id;
            Segmentation seg;
            if (c.scenario == "poisson") {
                auto s = gen_segmented_poisson(c.segments, c.length, seed);
                rec.obs.assign(s.data.observations().begin(), s.data.observations().end());
                rec.extra_names = {"tue", "wed", "thu", "fri", "sat", "sun"};
                rec.extra.assign(s.data.covariates().begin(), s.data.covariates().end());
                seg = std::move(s.truth);
            } else if (c.scenario == "drift") {
                auto s = gen_drift_stream(c.length, c.dgp.classes, c.inputs, seed);
                rec.obs.assign(s.data.observations().begin(), s.data.observations().end());
                for (int d = 1; d <= c.inputs; ++d) {
                    rec.extra_names.push_back("f" + std::to_string(d));
                }
                rec.extra.assign(s.data.covariates().begin(), s.data.covariates().end());
                seg = std::move(s.truth);
            } else if (c.scenario == "const") {
                auto s = gen_piecewise_const(c.segments, c.length, c.dim, c.sigma, seed);
                rec.obs_dim = static_cast<std::size_t>(c.dim);
                rec.obs.assign(s.data.observations().begin(), s.data.observations().end());
                seg = std::move(s.truth);
            } else {
                throw std::invalid_argument("unknown scenario '" + c.scenario + "'");
            }
            truth[i] = {id, change_points(seg)};
        });
    }
    auto out = open_output(c.output);
    write_sequences_csv(out, records);
    auto truth_out = open_output(c.truth);
    write_truth_csv(truth_out, truth);
    return 0;
}

int cmd_fit(const RunConfig& c, std::ostream& stdout_stream) {
    const auto records = read_sequences_file(c.input);
    std::vector<TruthRecord> truth;
    if (!c.truth.empty()) {
        truth = read_truth_file(c.truth);
    }
    std::vector<Segmentation> segs;
    auto fits = fit_records(records, c, &segs);
    const auto rows = make_report(fits, segs, truth);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (!truth.empty() && row.change_points.empty()) {
            std::cerr << "sequence " << row.id << ": no change points detected\n";
        }
        const auto used = static_cast<int>(std::set<int>(segs[i].begin(), segs[i].end()).size());
        if (used < c.model_config.segments) {
            std::cerr << "sequence " << row.id << ": " << c.model_config.segments - used
                      << " empty segment(s) after rounding\n";
        }
    }
    with_output(c.report, stdout_stream, [&](std::ostream& o) { write_report(o, rows, !truth.empty()); });
    if (!c.histogram.empty()) {
        std::vector<ChangePoints> sets;
        std::size_t length = 0;
        for (const auto& f : fits) {
            sets.push_back(f.change_points);
            length = std::max(length, f.length);
        }
        auto out = open_output(c.histogram);
        write_histogram_tsv(out, detection_histogram(sets, length));
    }
    if (!c.model.empty()) {
        ModelDocument doc;
        doc.model = c.model_config;
        doc.model.length = 0;
        doc.schedule = c.schedule;
        doc.schedule.seed = c.seed;
        doc.dgp = c.dgp;
        doc.sequences = std::move(fits);
        write_model_file(c.model, doc);
    }
    return 0;
}

namespace {

struct Aggregate {
    std::string method;
    std::size_t rows = 0;
    std::optional<MeanStd> hdf;
    std::optional<MeanStd> fro;
};

Aggregate aggregate(const std::string& method, std::span<const ReportRow> rows) {
    std::vector<double> hdf;
    std::vector<double> fro;
    for (const auto& r : rows) {
        if (r.d_hdf) {
            hdf.push_back(*r.d_hdf);
        }
        if (r.d_fro) {
            fro.push_back(*r.d_fro);
        }
    }
    if (fro.empty()) {
        throw DataError(method + ": no metric values to aggregate (fit with --truth)");
    }
    Aggregate a{method, rows.size(), std::nullopt, mean_std(fro)};
    if (!hdf.empty()) {
        a.hdf = mean_std(hdf);
    }
    return a;
}

void write_metric(std::ostream& out, const std::optional<MeanStd>& m) {
    if (m) {
        out << '\t' << format_double(m->mean) << '\t' << format_double(m->std);
    } else {
        out << "\tNA\tNA";
    }
}

} // namespace

int cmd_eval(const RunConfig& c, std::ostream& stdout_stream) {
    std::vector<Aggregate> table;
    for (const auto& path : c.reports) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw DataError("cannot open " + path);
        }
        const auto rows = read_report(in);
        table.push_back(aggregate(std::filesystem::path(path).stem().string(), rows));
    }
    if (c.random_baseline) {
        if (c.truth.empty()) {
            throw std::invalid_argument("--random-baseline needs --truth");
        }
        const auto truth = read_truth_file(c.truth);
        if (truth.empty() || c.draws < 1) {
            throw DataError("random baseline needs truth rows and draws >= 1");
        }
        std::vector<ReportRow> rows(static_cast<std::size_t>(c.draws));
        parallel_for(rows.size(), c.resolved_workers(), [&](std::size_t j) {
            const auto& t = truth[j % truth.size()];
            auto cps = random_baseline(c.length, static_cast<int>(t.change_points.size()),
                                       derive_seed(c.seed, {j}));
            auto& row = rows[j];
            row.id = t.id;
            row.d_fro = frobenius(segmentation_from_change_points(cps, c.length),
                                  segmentation_from_change_points(t.change_points, c.length));
            if (!cps.empty() && !t.change_points.empty()) {
                row.d_hdf = hausdorff(cps, t.change_points);
            }
            row.change_points = std::move(cps);
        });
        table.push_back(aggregate("random", rows));
    }
    if (table.empty()) {
        throw DataError("nothing to aggregate: pass --report and/or --random-baseline");
    }
    with_output(c.output, stdout_stream, [&](std::ostream& o) {
        o << "method\tn\td_hdf_mean\td_hdf_std\td_fro_mean\td_fro_std\n";
        for (const auto& a : table) {
            o << a.method << '\t' << a.rows;
            write_metric(o, a.hdf);
            write_metric(o, a.fro);
            o << '\n';
        }
    });
    return 0;
}

int cmd_bench(const RunConfig& c, std::ostream& stdout_stream) {
    auto records = read_sequences_file(c.input);
    if (c.limit > 0 && static_cast<std::size_t>(c.limit) < records.size()) {
        records.resize(static_cast<std::size_t>(c.limit));
    }
    const auto truth = read_truth_file(c.truth);
    auto powers = c.powers;
    auto widths = c.widths;
    std::sort(powers.begin(), powers.end());
    std::sort(widths.begin(), widths.end());
    if (powers.empty() || widths.empty()) {
        throw std::invalid_argument("bench needs at least one width and one power");
    }
    with_output(c.output, stdout_stream, [&](std::ostream& o) {
        o << "n\tw\td_hdf_mean\td_hdf_std\td_fro_mean\td_fro_std\tseconds\n";
        for (double n : powers) {
            for (double w : widths) {
                RunConfig cell = c;
                cell.model_config.power = n;
                cell.model_config.width = w;
                const auto start = std::chrono::steady_clock::now();
                std::vector<Segmentation> segs;
                const auto fits = fit_records(records, cell, &segs);
                const auto rows = make_report(fits, segs, truth);
                const double seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                const auto a = aggregate("bench", rows);
                o << format_double(n) << '\t' << format_double(w);
                write_metric(o, a.hdf);
                write_metric(o, a.fro);
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f", seconds);
                o << '\t' << buf << '\n';
            }
        }
    });
    return 0;
}

int run(const RunConfig& config, std::ostream& out) {
    if (config.command == "simulate") {
        return cmd_simulate(config);
    }
    if (config.command == "fit") {
        return cmd_fit(config, out);
    }
    if (config.command == "eval") {
        return cmd_eval(config, out);
    }
    if (config.command == "bench") {
        return cmd_bench(config, out);
    }
    throw std::invalid_argument("unknown command '" + config.command + "'");
}

} // namespace relseg::cli
