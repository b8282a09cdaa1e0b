#include "relseg/cli/model_document.hpp"

#include "relseg/dgp.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace relseg::cli {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "relseg-model";

Json losses_to_json(const std::vector<double>& values) {
    Json out = Json::array();
    for (double v : values) {
        if (std::isfinite(v)) {
            out.push_back(v);
        } else {
            out.push_back(nullptr);
        }
    }
    return out;
}

std::vector<double> losses_from_json(const Json& j) {
    std::vector<double> out;
    for (const auto& v : j) {
        out.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    return out;
}

const char* init_name(WarpInit init) {
    return init == WarpInit::uniform_modes ? "modes" : "mu";
}

WarpInit init_from_name(const std::string& name) {
    if (name == "mu") {
        return WarpInit::uniform_mu;
    }
    if (name == "modes") {
        return WarpInit::uniform_modes;
    }
    throw DataError("unknown warp initialisation '" + name + "'");
}

Json sequence_to_json(const FittedSequence& s) {
    const auto& seg = s.params.segments;
    Json theta = Json::array();
    for (int k = 0; k < seg.segments(); ++k) {
        const auto row = seg.row(k);
        theta.push_back(std::vector<double>(row.begin(), row.end()));
    }
    const auto mu = s.params.warp.mu();
    const auto global = seg.global();
    Json j;
    j["seq"] = s.id;
    j["length"] = s.length;
    j["fit_seed"] = s.fit_seed;
    j["loss"] = s.loss;
    j["best_restart"] = s.best_restart;
    j["change_points"] = s.change_points;
    j["mu"] = std::vector<double>(mu.begin(), mu.end());
    j["theta"] = std::move(theta);
    j["global"] = std::vector<double>(global.begin(), global.end());
    j["phi"] = s.params.internal;
    j["restart_losses"] = losses_to_json(s.per_restart_losses);
    return j;
}

FittedSequence sequence_from_json(const Json& j) {
    FittedSequence s;
    s.id = j.at("seq").get<std::int64_t>();
    s.length = j.at("length").get<std::size_t>();
    s.fit_seed = j.at("fit_seed").get<std::uint64_t>();
    s.loss = j.at("loss").get<double>();
    s.best_restart = j.at("best_restart").get<int>();
    s.change_points = j.at("change_points").get<ChangePoints>();
    const auto mu = j.at("mu").get<std::vector<double>>();
    if (mu.empty() || mu[0] != 0.0) {
        throw DataError("sequence " + std::to_string(s.id) + ": mu must start with 0");
    }
    s.params.warp = WarpParams::from_trainable(std::span<const double>(mu).subspan(1));
    const auto theta = j.at("theta").get<std::vector<std::vector<double>>>();
    const auto global = j.at("global").get<std::vector<double>>();
    if (theta.size() != mu.size() || theta.empty() || theta[0].empty()) {
        throw DataError("sequence " + std::to_string(s.id) + ": theta must have one row per segment");
    }
    s.params.segments = SegmentParams(static_cast<int>(theta.size()), static_cast<int>(theta[0].size()),
                                      static_cast<int>(global.size()));
    for (std::size_t k = 0; k < theta.size(); ++k) {
        if (theta[k].size() != theta[0].size()) {
            throw DataError("sequence " + std::to_string(s.id) + ": ragged theta");
        }
        std::copy(theta[k].begin(), theta[k].end(), s.params.segments.row(static_cast<int>(k)).begin());
    }
    std::copy(global.begin(), global.end(), s.params.segments.global().begin());
    s.params.internal = j.at("phi").get<std::vector<double>>();
    s.per_restart_losses = losses_from_json(j.at("restart_losses"));
    return s;
}

} // namespace

std::string save_model(const ModelDocument& doc) {
    Json j;
    j["format"] = kFormat;
    j["version"] = ModelDocument::kVersion;
    j["model"] = {{"segments", doc.model.segments},
                  {"width", doc.model.width},
                  {"power", doc.model.power}};
    j["schedule"] = {{"epochs", doc.schedule.total_epochs},
                     {"integer_epochs", doc.schedule.integer_epochs},
                     {"learning_rate", doc.schedule.learning_rate},
                     {"restarts", doc.schedule.restarts},
                     {"seed", doc.schedule.seed},
                     {"init", init_name(doc.schedule.warp_init)},
                     {"init_spread", doc.schedule.init_spread}};
    j["dgp"] = {{"name", doc.dgp.name},
                {"classes", doc.dgp.classes},
                {"hidden", doc.dgp.hidden},
                {"covariates", doc.dgp.covariates},
                {"tied", doc.dgp.tied}};
    Json seqs = Json::array();
    for (const auto& s : doc.sequences) {
        seqs.push_back(sequence_to_json(s));
    }
    j["sequences"] = std::move(seqs);
    return j.dump(2) + "\n";
}

ModelDocument load_model(std::string_view text) {
    try {
        const Json j = Json::parse(text.begin(), text.end());
        if (j.at("format").get<std::string>() != kFormat) {
            throw DataError("not a relseg model document");
        }
        const int version = j.at("version").get<int>();
        if (version != ModelDocument::kVersion) {
            throw DataError("unsupported model document version " + std::to_string(version));
        }
        ModelDocument doc;
        const auto& m = j.at("model");
        doc.model.segments = m.at("segments").get<int>();
        doc.model.width = m.at("width").get<double>();
        doc.model.power = m.at("power").get<double>();
        const auto& s = j.at("schedule");
        doc.schedule.total_epochs = s.at("epochs").get<int>();
        doc.schedule.integer_epochs = s.at("integer_epochs").get<int>();
        doc.schedule.learning_rate = s.at("learning_rate").get<double>();
        doc.schedule.restarts = s.at("restarts").get<int>();
        doc.schedule.seed = s.at("seed").get<std::uint64_t>();
        doc.schedule.warp_init = init_from_name(s.at("init").get<std::string>());
        doc.schedule.init_spread = s.at("init_spread").get<double>();
        const auto& d = j.at("dgp");
        doc.dgp.name = d.at("name").get<std::string>();
        doc.dgp.classes = d.at("classes").get<int>();
        doc.dgp.hidden = d.at("hidden").get<int>();
        doc.dgp.covariates = d.at("covariates").get<std::vector<std::string>>();
        doc.dgp.tied = d.at("tied").get<std::vector<std::string>>();
        for (const auto& seq : j.at("sequences")) {
            doc.sequences.push_back(sequence_from_json(seq));
        }
        return doc;
    } catch (const Json::exception& e) {
        throw DataError(std::string("malformed model document: ") + e.what());
    }
}

void write_model_file(const std::string& path, const ModelDocument& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write " + path);
    }
    out << save_model(doc);
}

ModelDocument read_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return load_model(text);
}

} // namespace relseg::cli
