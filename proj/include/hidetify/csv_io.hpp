#ifndef HIDETIFY_CSV_IO_HPP
#define HIDETIFY_CSV_IO_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "benchmark.hpp"
#include "data_matrix.hpp"
#include "errors.hpp"

/**
 * @file csv_io.hpp
 *
 * @brief Numeric CSV tables, ground-truth sidecars, and conversion to DataMatrix.
 *
 * Format: first line is a header, comma separated, '.' decimal point, no
 * quoting of numeric cells, UTF-8. Every data cell must parse as a finite
 * number.
 */

namespace hidetify {

/// Malformed or non-numeric input; `line` is 1-based (0 when not tied to a line).
class CsvError : public InvalidArgument {
public:
    CsvError(std::size_t line, const std::string& what)
        : InvalidArgument(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct NumericTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

inline std::string unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(s);
}

}  // namespace detail

inline NumericTable read_csv(std::istream& in) {
    NumericTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) {
            line.erase(0, 3);
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        auto fields = detail::split_fields(line);
        if (!have_header) {
            for (auto f : fields) {
                table.header.push_back(detail::unquote(f));
            }
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw CsvError(line_no, "expected " + std::to_string(table.header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
        }
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            auto f = fields[c];
            const std::string where = "row " + std::to_string(table.rows.size() + 1) + ", column '" +
                                      table.header[c] + "'";
            if (f.empty()) {
                throw CsvError(line_no, where + ": empty cell");
            }
            if (f.front() == '+') {
                f.remove_prefix(1);
            }
            double v = 0.0;
            auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
                throw CsvError(line_no, where + ": '" + std::string(fields[c]) + "' is not a number");
            }
            if (!std::isfinite(v)) {
                throw CsvError(line_no, where + ": non-finite value");
            }
            row[c] = v;
        }
        table.rows.push_back(std::move(row));
    }
    if (!have_header) {
        throw CsvError(0, "input has no header line");
    }
    return table;
}

inline NumericTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open '" + path + "'");
    }
    return read_csv(in);
}

/// A data matrix with the names of its predictor columns and response.
struct NamedData {
    DataMatrix data;
    std::vector<std::string> predictor_names;
    std::string response_name;
};

/**
 * Splits a table into predictors and response. `response` is a column name,
 * or a 0-based column index when it is all digits and no column has that name.
 */
inline NamedData to_data_matrix(const NumericTable& table, const std::string& response) {
    std::optional<std::size_t> target;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c] == response) {
            target = c;
            break;
        }
    }
    if (!target && !response.empty() && std::all_of(response.begin(), response.end(), [](char ch) {
            return std::isdigit(static_cast<unsigned char>(ch));
        })) {
        std::size_t idx = std::stoul(response);
        if (idx < table.header.size()) {
            target = idx;
        }
    }
    if (!target) {
        throw InvalidArgument("response column '" + response + "' not found");
    }
    const std::size_t n = table.rows.size();
    const std::size_t p = table.header.size() - 1;
    if (p == 0) {
        throw InvalidArgument("input has no predictor columns");
    }
    if (n < 4) {
        throw InvalidArgument("input needs at least 4 data rows, got " + std::to_string(n));
    }
    NamedData out;
    out.response_name = table.header[*target];
    std::vector<double> x;
    x.reserve(n * p);
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c == *target) {
            continue;
        }
        out.predictor_names.push_back(table.header[c]);
        for (const auto& row : table.rows) {
            x.push_back(row[c]);
        }
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = table.rows[i][*target];
    }
    out.data = DataMatrix(n, p, std::move(x), std::move(y));
    return out;
}

/// Writes predictors then the response, header `x1..xp,<response_name>`.
inline void write_data_csv(std::ostream& out, const DataMatrix& data, const std::string& response_name = "y") {
    for (std::size_t j = 0; j < data.cols(); ++j) {
        out << 'x' << (j + 1) << ',';
    }
    out << response_name << '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            out << format_number(data.x(i, j)) << ',';
        }
        out << format_number(data.y(i)) << '\n';
    }
}

/// One 1-based row index per line.
inline void write_truth(std::ostream& out, std::span<const std::size_t> truth) {
    for (std::size_t i : truth) {
        out << (i + 1) << '\n';
    }
}

/// Reads a sidecar written by write_truth, returning 0-based indices.
inline std::vector<std::size_t> read_truth(std::istream& in) {
    std::vector<std::size_t> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = detail::trim(line);
        if (t.empty()) {
            continue;
        }
        std::size_t v = 0;
        auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size() || v == 0) {
            throw CsvError(line_no, "expected a 1-based row index");
        }
        out.push_back(v - 1);
    }
    return out;
}

}  // namespace hidetify

#endif
