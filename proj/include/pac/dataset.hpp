#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pac {

/// Column-major numeric table with named columns.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<std::string> names);

    std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
    std::size_t cols() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    bool has_column(const std::string& name) const;
    std::size_t index_of(const std::string& name) const;
    std::span<const double> column(const std::string& name) const;
    std::span<const double> column(std::size_t index) const { return columns_.at(index); }

    void add_row(std::span<const double> values);

    /// Rows picked by index (with repetition), e.g. for bootstrap resampling.
    Dataset select_rows(std::span<const std::size_t> row_indices) const;

    /// Throws Schema when any required column is missing.
    void require_columns(const std::vector<std::string>& required) const;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

Dataset read_csv(std::istream& in);
Dataset read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const Dataset& data);

}  // namespace pac
