#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "gerber/errors.hpp"
#include "gerber/format.hpp"

namespace gerber {

/// Per-period security returns, one column per asset.
struct ReturnMatrix {
    Eigen::MatrixXd values;                  // T x K, every entry finite
    std::vector<std::string> asset_labels;   // K labels, pairwise distinct
    std::vector<std::string> period_labels;  // empty, or one label per row

    Eigen::Index periods() const { return values.rows(); }  // T
    Eigen::Index assets() const { return values.cols(); }   // K
};

enum class HeaderMode {
    detect,   // header iff the first row has a non-numeric cell
    require,  // first row is always a header
    none,     // first row is data; labels are synthesized
};

struct IngestOptions {
    char delimiter = ',';
    HeaderMode header = HeaderMode::detect;
    bool period_column = false;  // column 1 holds period labels, not returns
};

namespace detail {

inline std::string trim(std::string_view s) {
    const char* ws = " \t\r\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        out.push_back(trim(std::string_view(line).substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

// Accepts plain decimals and scientific notation, with an optional leading
// '+' that std::from_chars does not take. The whole cell must be consumed.
inline bool parse_number(std::string_view cell, double& out) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = first + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

inline std::vector<std::string> default_labels(Eigen::Index count) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index k = 0; k < count; ++k) labels.push_back("A" + std::to_string(k + 1));
    return labels;
}

} // namespace detail

/// Checks the ReturnMatrix invariants: T >= 2, K >= 1, finite entries,
/// distinct labels of the right multiplicity. Throws ValidationError.
inline void validate_returns(const ReturnMatrix& r) {
    if (r.assets() < 1) throw ValidationError("return matrix has no asset columns");
    if (r.periods() < 2)
        throw ValidationError("need at least 2 return periods, found " +
                              std::to_string(r.periods()));
    if (static_cast<Eigen::Index>(r.asset_labels.size()) != r.assets())
        throw ValidationError("asset label count does not match column count");
    if (!r.period_labels.empty() &&
        static_cast<Eigen::Index>(r.period_labels.size()) != r.periods())
        throw ValidationError("period label count does not match row count");
    std::unordered_set<std::string> seen;
    for (const auto& label : r.asset_labels)
        if (!seen.insert(label).second)
            throw ValidationError("duplicate asset label '" + label + "'");
    if (!r.values.allFinite()) throw ValidationError("return matrix contains non-finite entries");
}

/// Parses delimiter-separated return data. `source` names the origin for
/// diagnostics; row/column coordinates in error messages are 1-based file
/// coordinates (header row and period column included).
inline ReturnMatrix parse_returns(const std::string& text, const std::string& source,
                                  const IngestOptions& opt = {}) {
    std::vector<std::pair<long, std::string>> lines;  // line number, content
    {
        std::istringstream is(text);
        std::string line;
        long number = 0;
        while (std::getline(is, line)) {
            ++number;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines.emplace_back(number, line);
        }
        while (!lines.empty() && detail::trim(lines.back().second).empty()) lines.pop_back();
    }
    if (lines.empty()) throw ValidationError(source + ": empty file");

    const int skip = opt.period_column ? 1 : 0;

    auto first_fields = detail::split_fields(lines.front().second, opt.delimiter);
    bool has_header = false;
    switch (opt.header) {
        case HeaderMode::require:
            has_header = true;
            break;
        case HeaderMode::none:
            has_header = false;
            break;
        case HeaderMode::detect: {
            double ignored;
            for (std::size_t f = static_cast<std::size_t>(skip); f < first_fields.size(); ++f)
                if (!detail::parse_number(first_fields[f], ignored)) {
                    has_header = true;
                    break;
                }
            break;
        }
    }

    ReturnMatrix result;
    std::size_t expected_fields = 0;
    if (has_header) {
        if (first_fields.size() <= static_cast<std::size_t>(skip))
            throw ValidationError(source + ": header row has no asset columns");
        for (std::size_t f = static_cast<std::size_t>(skip); f < first_fields.size(); ++f) {
            if (first_fields[f].empty())
                throw ValidationError(source + ": empty asset label in header, column " +
                                      std::to_string(f + 1));
            result.asset_labels.push_back(first_fields[f]);
        }
        expected_fields = first_fields.size();
    }

    std::vector<double> staged;
    long data_rows = 0;
    for (std::size_t li = has_header ? 1 : 0; li < lines.size(); ++li) {
        const auto& [line_number, line] = lines[li];
        if (detail::trim(line).empty())
            throw ValidationError(source + ": row " + std::to_string(line_number) + " is empty");
        auto fields = detail::split_fields(line, opt.delimiter);
        if (expected_fields == 0) expected_fields = fields.size();
        if (fields.size() != expected_fields)
            throw ValidationError(source + ": row " + std::to_string(line_number) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(expected_fields));
        if (opt.period_column) result.period_labels.push_back(fields[0]);
        for (std::size_t f = static_cast<std::size_t>(skip); f < fields.size(); ++f) {
            double v;
            if (!detail::parse_number(fields[f], v))
                throw ValidationError(source + ": non-numeric value '" + fields[f] +
                                      "' at row " + std::to_string(line_number) + ", column " +
                                      std::to_string(f + 1));
            if (!std::isfinite(v))
                throw ValidationError(source + ": non-finite value at row " +
                                      std::to_string(line_number) + ", column " +
                                      std::to_string(f + 1));
            staged.push_back(v);
        }
        ++data_rows;
    }

    const long columns = static_cast<long>(expected_fields) - skip;
    if (columns < 1) throw ValidationError(source + ": no asset columns");
    if (data_rows < 2)
        throw ValidationError(source + ": need at least 2 return periods, found " +
                              std::to_string(data_rows));
    if (result.asset_labels.empty()) result.asset_labels = detail::default_labels(columns);

    result.values.resize(data_rows, columns);
    for (long t = 0; t < data_rows; ++t)
        for (long k = 0; k < columns; ++k) result.values(t, k) = staged[t * columns + k];

    validate_returns(result);
    return result;
}

inline ReturnMatrix load_returns(const std::filesystem::path& path,
                                 const IngestOptions& opt = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path.string() + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_returns(buffer.str(), path.string(), opt);
}

/// Writes returns as CSV with a header row; exact double round-trip.
inline void write_returns(std::ostream& out, const ReturnMatrix& r, char delimiter = ',') {
    const bool with_periods = !r.period_labels.empty();
    if (with_periods) out << "period" << delimiter;
    for (Eigen::Index k = 0; k < r.assets(); ++k) {
        if (k > 0) out << delimiter;
        out << r.asset_labels[static_cast<std::size_t>(k)];
    }
    out << '\n';
    for (Eigen::Index t = 0; t < r.periods(); ++t) {
        if (with_periods) out << r.period_labels[static_cast<std::size_t>(t)] << delimiter;
        for (Eigen::Index k = 0; k < r.assets(); ++k) {
            if (k > 0) out << delimiter;
            out << format_double(r.values(t, k));
        }
        out << '\n';
    }
}

inline void save_returns(const std::filesystem::path& path, const ReturnMatrix& r,
                         char delimiter = ',') {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError(path.string() + ": cannot open file for writing");
    write_returns(out, r, delimiter);
}

/// Sample standard deviation of each column, (T-1) denominator. Constant
/// columns are rejected: their thresholds would be zero and the up/down
/// indicator cases would overlap.
inline Eigen::VectorXd column_stddevs(const ReturnMatrix& r) {
    validate_returns(r);
    const Eigen::Index periods = r.periods();
    Eigen::VectorXd out(r.assets());
    std::string constant_columns;
    for (Eigen::Index k = 0; k < r.assets(); ++k) {
        auto col = r.values.col(k);
        if (col.minCoeff() == col.maxCoeff()) {
            if (!constant_columns.empty()) constant_columns += ", ";
            constant_columns += "'" + r.asset_labels[static_cast<std::size_t>(k)] + "'";
            out(k) = 0.0;
            continue;
        }
        const double mean = col.mean();
        out(k) = std::sqrt((col.array() - mean).square().sum() /
                           static_cast<double>(periods - 1));
    }
    if (!constant_columns.empty())
        throw ValidationError("constant column(s) with zero standard deviation: " +
                              constant_columns);
    return out;
}

} // namespace gerber
