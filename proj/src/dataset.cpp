#include "epibench/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "epibench/csv.hpp"
#include "epibench/error.hpp"

namespace epibench {

Dataset::Dataset(std::vector<std::string> columns) : columns_(std::move(columns))
{
    std::set<std::string> seen;
    for (const auto& c : columns_) {
        if (!seen.insert(c).second) {
            throw Error(ErrorCode::SchemaMismatch, "duplicate column name: " + c);
        }
    }
}

void Dataset::add_row(std::span<const double> values, double weight)
{
    if (values.size() != n_cols()) {
        throw Error(ErrorCode::SchemaMismatch, "row width " + std::to_string(values.size()) +
                                                   " does not match " + std::to_string(n_cols()) +
                                                   " columns");
    }
    cells_.insert(cells_.end(), values.begin(), values.end());
    if (weights_) {
        weights_->push_back(weight);
    }
}

std::optional<std::size_t> Dataset::find_column(const std::string& name) const
{
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c] == name) {
            return c;
        }
    }
    return std::nullopt;
}

std::size_t Dataset::column_index(const std::string& name) const
{
    if (auto idx = find_column(name)) {
        return *idx;
    }
    throw Error(ErrorCode::UnknownColumn, "unknown column: " + name);
}

std::vector<double> Dataset::column(std::size_t col) const
{
    std::vector<double> out(n_rows());
    for (std::size_t r = 0; r < out.size(); ++r) {
        out[r] = at(r, col);
    }
    return out;
}

void Dataset::set_weights(std::vector<double> weights)
{
    if (weights.size() != n_rows()) {
        throw Error(ErrorCode::SchemaMismatch, "weight vector length does not match row count");
    }
    weights_ = std::move(weights);
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const
{
    Dataset out(columns_);
    out.cells_.reserve(rows.size() * n_cols());
    if (weights_) {
        out.weights_.emplace();
        out.weights_->reserve(rows.size());
    }
    for (std::size_t r : rows) {
        out.add_row(row(r), weights_ ? (*weights_)[r] : 1.0);
    }
    return out;
}

Dataset Dataset::select_columns(const std::vector<std::string>& names) const
{
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) {
        idx.push_back(column_index(n));
    }
    Dataset out(names);
    out.cells_.reserve(n_rows() * names.size());
    for (std::size_t r = 0; r < n_rows(); ++r) {
        for (std::size_t c : idx) {
            out.cells_.push_back(at(r, c));
        }
    }
    out.weights_ = weights_;
    return out;
}

Dataset read_csv(std::istream& in, const std::string& context)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::ParseError, context + ": missing header row");
    }
    auto header = csv::split_record(line);
    Dataset d(std::move(header));
    std::vector<double> values(d.n_cols());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto fields = csv::split_record(line);
        if (fields.size() != d.n_cols()) {
            throw Error(ErrorCode::SchemaMismatch, context + ":" + std::to_string(line_no) + ": expected " +
                                                       std::to_string(d.n_cols()) + " fields, got " +
                                                       std::to_string(fields.size()));
        }
        const std::string where = context + ":" + std::to_string(line_no);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            values[c] = csv::parse_number(fields[c], where);
        }
        d.add_row(values);
    }
    return d;
}

Dataset read_csv_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    }
    return read_csv(in, path.string());
}

void write_csv(std::ostream& out, const Dataset& d)
{
    out << csv::join_record(d.columns()) << '\n';
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t c = 0; c < d.n_cols(); ++c) {
            if (c > 0) {
                out << ',';
            }
            out << csv::format_number(d.at(r, c));
        }
        out << '\n';
    }
}

void write_csv_file(const std::filesystem::path& path, const Dataset& d)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
    }
    write_csv(out, d);
}

}  // namespace epibench
