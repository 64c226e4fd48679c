#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epibench {

/// Rectangular table of finite doubles with unique, ordered column names.
/// Cells are stored row-major. Optional per-row weights travel with the rows
/// through filtering and splitting but are never written to CSV.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t n_rows() const { return n_cols() == 0 ? 0 : cells_.size() / n_cols(); }
    std::size_t n_cols() const { return columns_.size(); }

    double at(std::size_t row, std::size_t col) const { return cells_[row * n_cols() + col]; }
    double& at(std::size_t row, std::size_t col) { return cells_[row * n_cols() + col]; }

    std::span<const double> row(std::size_t r) const { return {cells_.data() + r * n_cols(), n_cols()}; }

    /// Appends a row; `weight` is only kept when the dataset carries weights.
    void add_row(std::span<const double> values, double weight = 1.0);

    std::optional<std::size_t> find_column(const std::string& name) const;
    /// Index of `name` or UnknownColumn.
    std::size_t column_index(const std::string& name) const;
    std::vector<double> column(std::size_t col) const;
    std::vector<double> column(const std::string& name) const { return column(column_index(name)); }

    bool has_weights() const { return weights_.has_value(); }
    const std::vector<double>& weights() const { return *weights_; }
    void set_weights(std::vector<double> weights);
    void clear_weights() { weights_.reset(); }

    /// New dataset holding the listed rows (with their weights) in order.
    Dataset select_rows(std::span<const std::size_t> rows) const;
    /// New dataset holding the listed columns in the given order.
    Dataset select_columns(const std::vector<std::string>& names) const;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<std::string> columns_;
    std::vector<double> cells_;
    std::optional<std::vector<double>> weights_;
};

/// Reads a one-header-row, comma-separated, dot-decimal table. Every cell
/// must parse as a finite number.
Dataset read_csv(std::istream& in, const std::string& context = "csv");
Dataset read_csv_file(const std::filesystem::path& path);

void write_csv(std::ostream& out, const Dataset& d);
void write_csv_file(const std::filesystem::path& path, const Dataset& d);

}  // namespace epibench
