#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mcc/covariates.hpp"

// Delimited-text ingestion: a feature matrix (rows = features, header row of
// sample ids) plus column files (response, covariates, strata) keyed by
// sample id and joined strictly.

namespace mcc::io {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline char detect_delimiter(const std::string& line) {
    return line.find('\t') != std::string::npos ? '\t' : ',';
}

inline std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.push_back("");
    return out;
}

inline Real parse_real(const std::string& s, const std::string& file,
                       Index lineno) {
    try {
        std::size_t pos = 0;
        const Real v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(file + ":" + std::to_string(lineno) +
                         ": not a number: '" + s + "'");
    }
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<Index> line_numbers;
};

inline RawTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    RawTable t;
    std::string line;
    Index lineno = 0;
    char delim = '\t';
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) {
            delim = detect_delimiter(line);
            t.header = split(line, delim);
            continue;
        }
        auto fields = split(line, delim);
        if (fields.size() != t.header.size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(t.header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(lineno);
    }
    if (t.header.empty()) throw ParseError(path + ": empty file");
    return t;
}

}  // namespace detail

struct MatrixFile {
    FeatureMatrix X;
    std::vector<std::string> sample_ids;
};

// First header cell is a label, remaining cells are sample ids; each data row
// is feature_id followed by one value per sample.
inline MatrixFile read_matrix(const std::string& path) {
    const auto t = detail::read_table(path);
    if (t.header.size() < 2)
        throw ParseError(path + ": matrix needs at least one sample column");
    MatrixFile m;
    m.sample_ids.assign(t.header.begin() + 1, t.header.end());
    m.X.rows = t.rows.size();
    m.X.cols = m.sample_ids.size();
    m.X.values.reserve(m.X.rows * m.X.cols);
    for (Index i = 0; i < t.rows.size(); ++i) {
        m.X.feature_ids.push_back(t.rows[i][0]);
        for (Index j = 1; j < t.rows[i].size(); ++j)
            m.X.values.push_back(
                detail::parse_real(t.rows[i][j], path, t.line_numbers[i]));
    }
    return m;
}

// Column file: header "id <name>..."; one row per sample. Values stay as
// strings so strata labels can be non-numeric.
struct ColumnFile {
    std::string path;
    std::vector<std::string> names;                 // value column names
    std::vector<std::string> ids;                   // sample ids, file order
    std::vector<std::vector<std::string>> values;   // row-major, per sample
};

inline ColumnFile read_column_file(const std::string& path) {
    const auto t = detail::read_table(path);
    if (t.header.size() < 2)
        throw ParseError(path + ": need an id column and a value column");
    ColumnFile c;
    c.path = path;
    c.names.assign(t.header.begin() + 1, t.header.end());
    for (const auto& row : t.rows) {
        c.ids.push_back(row[0]);
        c.values.emplace_back(row.begin() + 1, row.end());
    }
    return c;
}

namespace detail {

// sample id -> row position, with duplicate/missing errors naming the file
inline std::vector<Index> join_order(const ColumnFile& c,
                                     std::span<const std::string> sample_ids) {
    std::unordered_map<std::string, Index> pos;
    for (Index i = 0; i < c.ids.size(); ++i)
        if (!pos.emplace(c.ids[i], i).second)
            throw ParseError(c.path + ": duplicate sample id '" + c.ids[i] + "'");
    std::vector<Index> order;
    order.reserve(sample_ids.size());
    for (const auto& id : sample_ids) {
        const auto it = pos.find(id);
        if (it == pos.end())
            throw ParseError(c.path + ": sample id '" + id +
                             "' from the matrix header is missing");
        order.push_back(it->second);
    }
    return order;
}

}  // namespace detail

inline std::vector<Real> join_response(const ColumnFile& c,
                                       std::span<const std::string> sample_ids) {
    if (c.names.size() != 1)
        throw ParseError(c.path + ": response file must have exactly one value column");
    const auto order = detail::join_order(c, sample_ids);
    std::vector<Real> y;
    y.reserve(order.size());
    for (Index i : order)
        y.push_back(detail::parse_real(c.values[i][0], c.path, i + 2));
    return y;
}

inline CovariateMatrix join_covariates(const ColumnFile& c,
                                       std::span<const std::string> sample_ids) {
    const auto order = detail::join_order(c, sample_ids);
    CovariateMatrix Z;
    Z.n = order.size();
    Z.names = c.names;
    Z.columns.assign(c.names.size(), std::vector<Real>(Z.n));
    for (Index j = 0; j < order.size(); ++j)
        for (Index k = 0; k < c.names.size(); ++k)
            Z.columns[k][j] =
                detail::parse_real(c.values[order[j]][k], c.path, order[j] + 2);
    return Z;
}

// Labels may be arbitrary strings; they map to 1..K in order of first
// appearance along the matrix sample order.
inline StrataAssignment join_strata(const ColumnFile& c,
                                    std::span<const std::string> sample_ids) {
    if (c.names.size() != 1)
        throw ParseError(c.path + ": strata file must have exactly one value column");
    const auto order = detail::join_order(c, sample_ids);
    std::unordered_map<std::string, int> code;
    std::vector<int> labels;
    labels.reserve(order.size());
    for (Index i : order) {
        const auto& s = c.values[i][0];
        const auto it = code.emplace(s, static_cast<int>(code.size()) + 1).first;
        labels.push_back(it->second);
    }
    return StrataAssignment::from_labels(std::move(labels));
}

// Scientific notation with 6 significant digits by default; full doubles
// under raw mode (round-trip exact).
inline std::string format_real(Real v, bool raw = false) {
    char buf[40];
    if (raw)
        std::snprintf(buf, sizeof buf, "%.17g", v);
    else
        std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

}  // namespace mcc::io
