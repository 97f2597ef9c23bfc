#include "pac/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pac/error.hpp"
#include "pac/format.hpp"

namespace pac {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        while (!field.empty() && field.front() == ' ') field.erase(field.begin());
        out.push_back(field);
    }
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_number(const std::string& text, std::size_t line_no) {
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::Schema, "line " + std::to_string(line_no) + ": not a number: '" + text + "'");
    }
    return value;
}

}  // namespace

Dataset::Dataset(std::vector<std::string> names) : names_(std::move(names)), columns_(names_.size()) {}

bool Dataset::has_column(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t Dataset::index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw Error(ErrorCode::Schema, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> Dataset::column(const std::string& name) const { return columns_[index_of(name)]; }

void Dataset::add_row(std::span<const double> values) {
    if (values.size() != names_.size()) {
        throw Error(ErrorCode::Schema, "row has " + std::to_string(values.size()) + " fields, expected " +
                                           std::to_string(names_.size()));
    }
    for (std::size_t c = 0; c < values.size(); ++c) columns_[c].push_back(values[c]);
}

Dataset Dataset::select_rows(std::span<const std::size_t> row_indices) const {
    Dataset out(names_);
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        auto& dst = out.columns_[c];
        dst.reserve(row_indices.size());
        for (std::size_t r : row_indices) dst.push_back(columns_[c].at(r));
    }
    return out;
}

void Dataset::require_columns(const std::vector<std::string>& required) const {
    for (const auto& name : required) {
        if (!has_column(name)) throw Error(ErrorCode::Schema, "missing column '" + name + "'");
    }
}

Dataset read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Schema, "empty CSV (no header)");
    Dataset data(split(line, ','));
    std::vector<double> row(data.cols());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split(line, ',');
        if (fields.size() != data.cols()) {
            throw Error(ErrorCode::Schema, "line " + std::to_string(line_no) + ": expected " +
                                               std::to_string(data.cols()) + " fields");
        }
        for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_number(fields[c], line_no);
        data.add_row(row);
    }
    return data;
}

Dataset read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return read_csv(in);
}

void write_csv(std::ostream& out, const Dataset& data) {
    for (std::size_t c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data.names()[c];
    out << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < data.cols(); ++c) out << (c ? "," : "") << format_double(data.column(c)[r]);
        out << '\n';
    }
}

}  // namespace pac
