#include "relseg/cli/commands.hpp"
#include "relseg/cli/config.hpp"
#include "relseg/cli/csv.hpp"
#include "relseg/cli/model_document.hpp"

#include "relseg/metrics.hpp"
#include "relseg/rng.hpp"
#include "relseg/simulate.hpp"

#include <CLI11.hpp>
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace relseg;
using namespace relseg::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("relseg_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

// Small arlot data set plus a quick schedule.
RunConfig small_config(const TempDir& dir) {
    RunConfig c;
    c.workers = 1;
    c.seed = 5;
    c.sequences = 3;
    c.length = 200;
    c.change_points = {60, 130};
    c.output = dir.file("seqs.csv");
    c.truth = dir.file("truth.csv");
    c.input = c.output;
    c.model_config.segments = 3;
    c.schedule.total_epochs = 80;
    c.schedule.integer_epochs = 20;
    c.schedule.restarts = 2;
    return c;
}

RunConfig parse(const std::vector<std::string>& args) {
    CLI::App app;
    RunConfig c;
    add_options(app, c);
    std::vector<const char*> argv{"relseg"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    app.parse(static_cast<int>(argv.size()), argv.data());
    return c;
}

} // namespace

TEST_CASE("doubles round-trip through text") {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.normal() * std::pow(10.0, rng.uniform(-300.0, 300.0));
        CHECK(parse_double(format_double(v)) == v);
    }
    for (double v : {0.0, -0.0, 1.0, 0.1, 1e-320, std::numeric_limits<double>::max()}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(parse_double("+2.5") == 2.5);
    CHECK(parse_double("1e3") == 1000.0);
    CHECK_THROWS_AS(parse_double("1,5"), DataError);
    CHECK_THROWS_AS(parse_double(""), DataError);
    CHECK_THROWS_AS(parse_double("abc"), DataError);
    CHECK_THROWS_AS(parse_double("2.5x"), DataError);
}

TEST_CASE("sequence CSV round-trip") {
    std::vector<SequenceRecord> recs;
    Rng rng(2);
    for (int id : {3, 1, 7}) {
        SequenceRecord r{id, 2, {}, {"a", "b"}, {}};
        const int n = static_cast<int>(rng.uniform_int(1, 20));
        for (int t = 0; t < 2 * n; ++t) {
            r.obs.push_back(rng.normal() / 3.0);
            r.extra.push_back(rng.uniform());
        }
        recs.push_back(r);
    }
    std::stringstream buf;
    write_sequences_csv(buf, recs);
    CHECK(buf.str().rfind("seq,t,x,x2,a,b\n", 0) == 0);
    const auto back = read_sequences_csv(buf);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].id == recs[i].id);
        CHECK(back[i].obs_dim == 2);
        CHECK(back[i].obs == recs[i].obs);
        CHECK(back[i].extra_names == recs[i].extra_names);
        CHECK(back[i].extra == recs[i].extra);
    }

    const auto data = back[0].to_data({"b"});
    CHECK(data.cov_dim() == 1);
    CHECK(data.z(0)[0] == recs[0].extra[1]);
    try {
        back[0].to_data({"c"});
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("'c'") != std::string::npos);
    }
}

TEST_CASE("malformed sequence CSV") {
    auto read = [](const std::string& text) {
        std::istringstream in(text);
        return read_sequences_csv(in);
    };
    CHECK_THROWS_AS(read(""), DataError);
    CHECK_THROWS_AS(read("id,t,x\n1,1,0\n"), DataError);
    CHECK_THROWS_AS(read("seq,t,x\n"), DataError);
    CHECK_THROWS_AS(read("seq,t,x\n1,1,0\n1,3,0\n"), DataError);
    CHECK_THROWS_AS(read("seq,t,x\n1,1,0\n2,1,0\n1,2,0\n"), DataError);
    CHECK_THROWS_AS(read("seq,t,x\n1,1,0,4\n"), DataError);
    try {
        read("seq,t,x\n1,1,0\n1,2,zz\n");
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).rfind("line 3:", 0) == 0);
    }
    // CRLF line endings and blank lines are accepted.
    const auto recs = read("seq,t,x\r\n1,1,0.5\r\n\r\n1,2,1.5\r\n");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].obs == std::vector<double>{0.5, 1.5});
}

TEST_CASE("truth CSV round-trip") {
    const std::vector<TruthRecord> truth{{1, {100, 130}}, {2, {}}, {5, {7}}};
    std::stringstream buf;
    write_truth_csv(buf, truth);
    CHECK(buf.str() == "seq,change_points\n1,100;130\n2,\n5,7\n");
    const auto back = read_truth_csv(buf);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].id == truth[i].id);
        CHECK(back[i].change_points == truth[i].change_points);
    }
    std::istringstream bad("seq,cp\n");
    CHECK_THROWS_AS(read_truth_csv(bad), DataError);
}

TEST_CASE("simulate writes deterministic, readable files") {
    TempDir dir;
    auto c = small_config(dir);
    CHECK(cmd_simulate(c) == 0);
    const auto first = slurp(c.output);
    const auto first_truth = slurp(c.truth);
    c.workers = 3;
    CHECK(cmd_simulate(c) == 0);
    CHECK(slurp(c.output) == first);
    CHECK(slurp(c.truth) == first_truth);

    const auto recs = read_sequences_file(c.output);
    REQUIRE(recs.size() == 3);
    ScenarioSpec spec{c.length, c.change_points, c.sequences, c.seed};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(recs[i].id == static_cast<std::int64_t>(i + 1));
        CHECK(recs[i].obs == gen_arlot_s1_sequence(spec, i).values);
    }
    const auto truth = read_truth_file(c.truth);
    CHECK(truth.at(2).change_points == c.change_points);

    for (const std::string scenario : {"poisson", "drift", "const"}) {
        c.scenario = scenario;
        c.length = 100;
        CHECK(cmd_simulate(c) == 0);
        const auto again = slurp(c.output);
        CHECK(cmd_simulate(c) == 0);
        CHECK(slurp(c.output) == again);
        CHECK(read_sequences_file(c.output).size() == 3);
    }
    c.scenario = "nope";
    CHECK_THROWS_AS(cmd_simulate(c), std::invalid_argument);
}

TEST_CASE("default simulation has 500 sequences of length 1000") {
    TempDir dir;
    RunConfig c;
    c.output = dir.file("s.csv");
    c.truth = dir.file("t.csv");
    c.workers = 1;
    CHECK(cmd_simulate(c) == 0);
    const auto recs = read_sequences_file(c.output);
    REQUIRE(recs.size() == 500);
    for (const auto& r : recs) {
        CHECK(r.length() == 1000);
    }
}

TEST_CASE("fit: report, model document and reproducibility") {
    TempDir dir;
    auto c = small_config(dir);
    cmd_simulate(c);
    c.model = dir.file("model.json");
    c.report = dir.file("report.tsv");
    c.histogram = dir.file("hist.tsv");
    std::ostringstream unused;
    CHECK(cmd_fit(c, unused) == 0);

    const auto report = slurp(c.report);
    CHECK(report.rfind("seq\tloss\tn_change_points\tchange_points\td_hdf\td_fro\n", 0) == 0);
    std::istringstream rin(report);
    const auto rows = read_report(rin);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.d_fro.has_value());
    }

    const auto hist = slurp(c.histogram);
    CHECK(hist.rfind("t\tcount\n", 0) == 0);

    // save -> load -> save is byte-identical.
    const auto text = slurp(c.model);
    const auto doc = load_model(text);
    CHECK(save_model(doc) == text);
    CHECK(doc.schedule.seed == 5);
    CHECK(doc.model.segments == 3);
    REQUIRE(doc.sequences.size() == 3);

    // Refit one sequence with its stored seed.
    const auto recs = read_sequences_file(c.input);
    const auto& s = doc.sequences[1];
    auto schedule = doc.schedule;
    schedule.seed = s.fit_seed;
    ModelConfig config = doc.model;
    config.length = s.length;
    const auto dgp = doc.dgp.make(1);
    const auto refit = fit(recs[1].to_data({}), config, *dgp, schedule);
    CHECK(refit.best_loss == s.loss);
    CHECK(refit.change_points == s.change_points);
    CHECK(rows[1].loss == s.loss);

    // Same config, different worker count: identical bytes.
    const auto model_bytes = slurp(c.model);
    c.workers = 3;
    CHECK(cmd_fit(c, unused) == 0);
    CHECK(slurp(c.model) == model_bytes);
    CHECK(slurp(c.report) == report);
    CHECK(slurp(c.histogram) == hist);
}

TEST_CASE("fit without truth has no metric columns") {
    TempDir dir;
    auto c = small_config(dir);
    cmd_simulate(c);
    c.truth.clear();
    std::ostringstream out;
    CHECK(cmd_fit(c, out) == 0);
    CHECK(out.str().rfind("seq\tloss\tn_change_points\tchange_points\n", 0) == 0);
}

TEST_CASE("fit errors") {
    TempDir dir;
    auto c = small_config(dir);
    c.scenario = "poisson";
    c.segments = 2;
    c.length = 60;
    cmd_simulate(c);
    std::ostringstream out;

    c.model_config.segments = 2;
    c.dgp.name = "poisson";
    c.dgp.tied = {"tue", "wed", "holiday"};
    try {
        cmd_fit(c, out);
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("holiday") != std::string::npos);
    }

    c.dgp.tied = {"tue"};
    c.dgp.name = "gaussian";
    CHECK_THROWS_AS(cmd_fit(c, out), std::invalid_argument);

    c.dgp.name = "poisson";
    c.model_config.segments = 60;
    CHECK_THROWS_AS(cmd_fit(c, out), std::invalid_argument);

    c.model_config.segments = 2;
    spit(c.input, "seq,t,x,tue\n1,1,3,0\n1,2,three,1\n");
    CHECK_THROWS_AS(cmd_fit(c, out), DataError);

    c.input = dir.file("missing.csv");
    CHECK_THROWS_AS(cmd_fit(c, out), DataError);
}

TEST_CASE("dgp specs") {
    DgpSpec s;
    CHECK(s.make(1)->name() == "normal");
    s.covariates = {"a"};
    CHECK_THROWS_AS(s.make(1), std::invalid_argument);
    s = DgpSpec{};
    s.name = "poisson";
    s.covariates = {"a"};
    s.tied = {"b", "c"};
    CHECK(s.make(1)->layout().per_segment == 3);
    CHECK(s.make(1)->layout().global == 2);
    CHECK(s.columns() == std::vector<std::string>{"a", "b", "c"});
    s = DgpSpec{};
    s.name = "softmax";
    CHECK_THROWS_AS(s.make(1), std::invalid_argument);
    s.covariates = {"f1", "f2"};
    s.classes = 3;
    CHECK(s.make(1)->layout().per_segment == 3 * 8);
    s = DgpSpec{};
    s.name = "const";
    CHECK(s.make(4)->layout().per_segment == 4);
}

TEST_CASE("eval aggregates reports") {
    TempDir dir;
    const auto path = dir.file("const.tsv");
    spit(path,
         "seq\tloss\tn_change_points\tchange_points\td_hdf\td_fro\n"
         "1\t1.5\t1\t10\t7\t0.25\n"
         "2\t2.5\t1\t12\t7\t0.25\n"
         "3\t3.5\t0\t\tNA\t0.25\n");
    RunConfig c;
    c.reports = {path};
    std::ostringstream out;
    CHECK(cmd_eval(c, out) == 0);
    CHECK(out.str() == "method\tn\td_hdf_mean\td_hdf_std\td_fro_mean\td_fro_std\n"
                       "const\t3\t7\t0\t0.25\t0\n");

    const auto empty = dir.file("empty.tsv");
    spit(empty, "seq\tloss\tn_change_points\tchange_points\td_hdf\td_fro\n");
    c.reports = {empty};
    CHECK_THROWS_AS(cmd_eval(c, out), DataError);
    c.reports.clear();
    CHECK_THROWS_AS(cmd_eval(c, out), DataError);
}

TEST_CASE("eval random baseline at the default scenario") {
    TempDir dir;
    const auto truth = dir.file("truth.csv");
    std::ostringstream tout;
    const std::vector<TruthRecord> recs{{1, ScenarioSpec{}.change_points}};
    write_truth_csv(tout, recs);
    spit(truth, tout.str());
    RunConfig c;
    c.truth = truth;
    c.random_baseline = true;
    c.workers = 2;
    std::ostringstream out;
    CHECK(cmd_eval(c, out) == 0);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    const auto f = split(line, '\t');
    REQUIRE(f.size() == 6);
    CHECK(f[0] == "random");
    CHECK(f[1] == "500");
    CHECK(std::abs(parse_double(f[2]) - 128.0) <= 15.0);
    CHECK(parse_double(f[4]) >= 3.1);
    CHECK(parse_double(f[4]) <= 3.5);

    std::ostringstream again;
    c.workers = 1;
    cmd_eval(c, again);
    CHECK(again.str() == out.str());
}

TEST_CASE("a one-cell bench equals eval of the same fit") {
    TempDir dir;
    auto c = small_config(dir);
    cmd_simulate(c);
    c.model_config.width = 0.25;
    c.model_config.power = 8.0;
    c.report = dir.file("fit.tsv");
    std::ostringstream unused;
    cmd_fit(c, unused);

    RunConfig e;
    e.reports = {c.report};
    std::ostringstream eval_out;
    cmd_eval(e, eval_out);

    auto b = c;
    b.widths = {0.25};
    b.powers = {8.0};
    b.output.clear();
    std::ostringstream bench_out;
    CHECK(cmd_bench(b, bench_out) == 0);

    std::istringstream ein(eval_out.str()), bin(bench_out.str());
    std::string line;
    std::getline(ein, line);
    std::getline(ein, line);
    const auto ef = split(line, '\t');
    std::string bline;
    std::getline(bin, bline);
    CHECK(bline == "n\tw\td_hdf_mean\td_hdf_std\td_fro_mean\td_fro_std\tseconds");
    std::getline(bin, bline);
    const auto bf = split(bline, '\t');
    REQUIRE(bf.size() == 7);
    CHECK(bf[0] == "8");
    CHECK(bf[1] == "0.25");
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(bf[2 + i] == ef[2 + i]);
    }
    CHECK(parse_double(bf[6]) >= 0.0);
}

TEST_CASE("bench rows are sorted by power, then width") {
    TempDir dir;
    auto c = small_config(dir);
    c.sequences = 1;
    cmd_simulate(c);
    c.output.clear();
    c.schedule.total_epochs = 10;
    c.schedule.integer_epochs = 5;
    c.schedule.restarts = 1;
    c.widths = {0.5, 0.125};
    c.powers = {16, 4};
    std::ostringstream out;
    cmd_bench(c, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<std::string, std::string>> cells;
    while (std::getline(in, line)) {
        const auto f = split(line, '\t');
        cells.emplace_back(std::string(f[0]), std::string(f[1]));
    }
    const std::vector<std::pair<std::string, std::string>> expected{
        {"4", "0.125"}, {"4", "0.5"}, {"16", "0.125"}, {"16", "0.5"}};
    CHECK(cells == expected);
}

TEST_CASE("model documents reject bad input") {
    CHECK_THROWS_AS(load_model("{"), DataError);
    CHECK_THROWS_AS(load_model("{\"format\": \"other\"}"), DataError);
    ModelDocument doc;
    auto text = save_model(doc);
    CHECK(save_model(load_model(text)) == text);
    const auto pos = text.find("\"version\": 1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 12, "\"version\": 9");
    CHECK_THROWS_AS(load_model(text), DataError);
}

TEST_CASE("model documents store NaN restart losses as null") {
    ModelDocument doc;
    FittedSequence s;
    s.id = 4;
    s.length = 10;
    s.params.warp = WarpParams(2);
    s.params.segments = SegmentParams(2, 2);
    s.per_restart_losses = {1.0, std::numeric_limits<double>::quiet_NaN()};
    doc.sequences.push_back(s);
    const auto text = save_model(doc);
    CHECK(text.find("null") != std::string::npos);
    const auto back = load_model(text);
    CHECK(std::isnan(back.sequences[0].per_restart_losses[1]));
    CHECK(save_model(back) == text);
}

TEST_CASE("flags override the config file, which overrides defaults") {
    TempDir dir;
    const auto cfg = dir.file("run.toml");
    spit(cfg, "[fit]\nsegments = 5\nlr = 0.05\ninput = \"data.csv\"\n");
    const auto c = parse({"--config", cfg, "fit", "-K", "3"});
    CHECK(c.command == "fit");
    CHECK(c.model_config.segments == 3);
    CHECK(c.schedule.learning_rate == 0.05);
    CHECK(c.input == "data.csv");
    CHECK(c.schedule.total_epochs == 300);
    CHECK(c.model_config.width == 0.125);
    CHECK(c.model_config.power == 16.0);
}

TEST_CASE("option parsing") {
    const auto c = parse({"fit", "-i", "x.csv", "--dgp", "poisson", "--tied", "tue,wed", "--init", "modes",
                          "--seed", "9", "--threads", "2"});
    CHECK(c.dgp.tied == std::vector<std::string>{"tue", "wed"});
    CHECK(c.schedule.warp_init == WarpInit::uniform_modes);
    CHECK(c.seed == 9);
    CHECK(c.resolved_workers() == 2);
    CHECK_THROWS_AS(parse({}), CLI::ParseError);
    CHECK_THROWS_AS(parse({"fit"}), CLI::ParseError);
    CHECK_THROWS_AS(parse({"fit", "-i", "x", "--init", "bogus"}), CLI::ParseError);
    CHECK_THROWS_AS(parse({"simulate", "-o", "x"}), CLI::ParseError);
    CHECK_THROWS_AS(parse({"bench", "-i", "x"}), CLI::ParseError);
    CHECK(parse({"eval", "-r", "a.tsv"}).command == "eval");
    const auto b = parse({"bench", "-i", "x", "--truth", "t", "--widths", "0.5,0.25"});
    CHECK(b.widths == std::vector<double>{0.5, 0.25});
}
