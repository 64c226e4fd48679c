#include "epibench/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "epibench/error.hpp"

namespace epibench::csv {

std::string format_number(double value)
{
    if (value == 0.0) {
        return "0";  // folds -0
    }
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw Error(ErrorCode::ParseError, "cannot format number");
    }
    return std::string(buf.data(), end);
}

std::vector<std::string> split_record(std::string_view line)
{
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < line.size() && line[k + 1] == '"') {
                    current += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                current += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current += c;
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

double parse_number(std::string_view field, std::string_view context)
{
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
        field.remove_suffix(1);
    }
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::ParseError,
                    std::string("non-numeric cell '") + std::string(field) + "' in " + std::string(context));
    }
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::ParseError,
                    std::string("non-finite cell in ") + std::string(context));
    }
    return value;
}

std::string join_record(const std::vector<std::string>& fields)
{
    std::string out;
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k > 0) {
            out += ',';
        }
        const auto& f = fields[k];
        if (f.find_first_of(",\"") != std::string::npos) {
            out += '"';
            for (char c : f) {
                if (c == '"') {
                    out += '"';
                }
                out += c;
            }
            out += '"';
        } else {
            out += f;
        }
    }
    return out;
}

}  // namespace epibench::csv
