#pragma once

#include "relseg/model.hpp"
#include "relseg/sequence.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relseg::cli {

/// 17 significant digits, '.' decimal point, no locale; parses back to
/// exactly `value`.
std::string format_double(double value);
/// Locale-independent parse of the whole field; throws DataError.
double parse_double(std::string_view field);

/// One sequence of a `seq,t,x[,x2,...][,extra...]` table.
struct SequenceRecord {
    std::int64_t id = 0;
    std::size_t obs_dim = 1;
    std::vector<double> obs; ///< T x obs_dim
    std::vector<std::string> extra_names;
    std::vector<double> extra; ///< T x extra_names.size()

    std::size_t length() const { return obs_dim == 0 ? 0 : obs.size() / obs_dim; }
    /// Observations plus the named extra columns as covariates, in the
    /// given order. Throws DataError naming a missing column.
    SequenceData to_data(const std::vector<std::string>& covariates) const;
};

/// Reads rows grouped by `seq`, with t = 1..T consecutive inside a group.
/// Observation columns are `x`, `x2`, `x3`, ...; other columns are extras.
std::vector<SequenceRecord> read_sequences_csv(std::istream& in);
/// All records must share obs_dim and extra_names.
void write_sequences_csv(std::ostream& out, std::span<const SequenceRecord> records);

struct TruthRecord {
    std::int64_t id = 0;
    ChangePoints change_points;
};

/// `seq,change_points` with semicolon-separated positions.
std::vector<TruthRecord> read_truth_csv(std::istream& in);
void write_truth_csv(std::ostream& out, std::span<const TruthRecord> records);

std::vector<SequenceRecord> read_sequences_file(const std::string& path);
std::vector<TruthRecord> read_truth_file(const std::string& path);

/// Splits on `sep` without trimming.
std::vector<std::string_view> split(std::string_view line, char sep);

} // namespace relseg::cli
