#include "relseg/cli/csv.hpp"

#include "relseg/dgp.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

namespace relseg::cli {

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    if (ec != std::errc{}) {
        throw std::runtime_error("cannot format a double");
    }
    return std::string(buf, ptr);
}

double parse_double(std::string_view field) {
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw DataError("not a number: '" + std::string(field) + "'");
    }
    return value;
}

namespace {

std::int64_t parse_int(std::string_view field) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw DataError("not an integer: '" + std::string(field) + "'");
    }
    return value;
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return true;
}

std::string at_line(std::size_t line_no) {
    return "line " + std::to_string(line_no) + ": ";
}

} // namespace

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

SequenceData SequenceRecord::to_data(const std::vector<std::string>& covariates) const {
    const std::size_t n = length();
    std::vector<std::size_t> cols;
    for (const auto& name : covariates) {
        const auto it = std::find(extra_names.begin(), extra_names.end(), name);
        if (it == extra_names.end()) {
            throw DataError("sequence " + std::to_string(id) + ": missing covariate column '" +
                            name + "'");
        }
        cols.push_back(static_cast<std::size_t>(it - extra_names.begin()));
    }
    std::vector<double> cov;
    cov.reserve(n * cols.size());
    const std::size_t width = extra_names.size();
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t c : cols) {
            cov.push_back(extra[t * width + c]);
        }
    }
    return SequenceData(obs_dim, obs, cols.size(), std::move(cov));
}

std::vector<SequenceRecord> read_sequences_csv(std::istream& in) {
    std::string line;
    if (!read_line(in, line)) {
        throw DataError("empty sequence file");
    }
    const std::string header_line = line;
    const auto header = split(header_line, ',');
    if (header.size() < 3 || header[0] != "seq" || header[1] != "t" || header[2] != "x") {
        throw DataError("sequence header must start with seq,t,x");
    }
    std::size_t obs_dim = 1;
    while (2 + obs_dim < header.size() && header[2 + obs_dim] == "x" + std::to_string(obs_dim + 1)) {
        ++obs_dim;
    }
    std::vector<std::string> extra_names;
    for (std::size_t c = 2 + obs_dim; c < header.size(); ++c) {
        extra_names.emplace_back(header[c]);
    }

    std::vector<SequenceRecord> records;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw DataError(at_line(line_no) + "expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
        }
        try {
            const auto id = parse_int(fields[0]);
            const auto t = parse_int(fields[1]);
            if (records.empty() || records.back().id != id) {
                if (std::any_of(records.begin(), records.end(),
                                [id](const SequenceRecord& r) { return r.id == id; })) {
                    throw DataError("rows of sequence " + std::to_string(id) + " are not contiguous");
                }
                records.push_back({id, obs_dim, {}, extra_names, {}});
            }
            auto& rec = records.back();
            if (t != static_cast<std::int64_t>(rec.length()) + 1) {
                throw DataError("expected t=" + std::to_string(rec.length() + 1) + ", got " +
                                std::to_string(t));
            }
            for (std::size_t c = 2; c < 2 + obs_dim; ++c) {
                rec.obs.push_back(parse_double(fields[c]));
            }
            for (std::size_t c = 2 + obs_dim; c < fields.size(); ++c) {
                rec.extra.push_back(parse_double(fields[c]));
            }
        } catch (const DataError& e) {
            throw DataError(at_line(line_no) + e.what());
        }
    }
    if (records.empty()) {
        throw DataError("sequence file has no rows");
    }
    return records;
}

void write_sequences_csv(std::ostream& out, std::span<const SequenceRecord> records) {
    if (records.empty()) {
        return;
    }
    const auto& first = records.front();
    out << "seq,t,x";
    for (std::size_t d = 2; d <= first.obs_dim; ++d) {
        out << ",x" << d;
    }
    for (const auto& name : first.extra_names) {
        out << ',' << name;
    }
    out << '\n';
    for (const auto& rec : records) {
        if (rec.obs_dim != first.obs_dim || rec.extra_names != first.extra_names) {
            throw std::invalid_argument("all sequences in one file must share their columns");
        }
        const std::size_t width = rec.extra_names.size();
        for (std::size_t t = 0; t < rec.length(); ++t) {
            out << rec.id << ',' << t + 1;
            for (std::size_t d = 0; d < rec.obs_dim; ++d) {
                out << ',' << format_double(rec.obs[t * rec.obs_dim + d]);
            }
            for (std::size_t c = 0; c < width; ++c) {
                out << ',' << format_double(rec.extra[t * width + c]);
            }
            out << '\n';
        }
    }
}

std::vector<TruthRecord> read_truth_csv(std::istream& in) {
    std::string line;
    if (!read_line(in, line) || line != "seq,change_points") {
        throw DataError("truth header must be seq,change_points");
    }
    std::vector<TruthRecord> out;
    std::size_t line_no = 1;
    while (read_line(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 2) {
            throw DataError(at_line(line_no) + "expected 2 fields");
        }
        try {
            TruthRecord rec{parse_int(fields[0]), {}};
            if (!fields[1].empty()) {
                for (auto part : split(fields[1], ';')) {
                    rec.change_points.push_back(static_cast<int>(parse_int(part)));
                }
            }
            out.push_back(std::move(rec));
        } catch (const DataError& e) {
            throw DataError(at_line(line_no) + e.what());
        }
    }
    return out;
}

void write_truth_csv(std::ostream& out, std::span<const TruthRecord> records) {
    out << "seq,change_points\n";
    for (const auto& rec : records) {
        out << rec.id << ',';
        for (std::size_t i = 0; i < rec.change_points.size(); ++i) {
            out << (i > 0 ? ";" : "") << rec.change_points[i];
        }
        out << '\n';
    }
}

std::vector<SequenceRecord> read_sequences_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    return read_sequences_csv(in);
}

std::vector<TruthRecord> read_truth_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    return read_truth_csv(in);
}

} // namespace relseg::cli
