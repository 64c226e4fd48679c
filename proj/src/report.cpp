#include "epibench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "epibench/csv.hpp"
#include "epibench/error.hpp"

namespace epibench {

namespace {

std::string cell(const std::optional<double>& value)
{
    return value ? csv::format_number(*value) : "n/a";
}

std::string fixed(double value, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

std::string escape_xml(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Series {
    std::string name;
    std::string color;
    std::vector<std::optional<double>> values;
};

/// Vertical grouped bars, one group per algorithm, one bar per series.
std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& categories,
                      const std::vector<Series>& series)
{
    constexpr double kLeft = 70.0;
    constexpr double kTop = 40.0;
    constexpr double kPlotHeight = 260.0;
    constexpr double kBottom = 70.0;
    constexpr double kGroupWidth = 80.0;
    const double plot_width = kGroupWidth * static_cast<double>(std::max<std::size_t>(1, categories.size()));
    const double width = kLeft + plot_width + 140.0;
    const double height = kTop + kPlotHeight + kBottom;

    double lo = 0.0;
    double hi = 0.0;
    for (const auto& s : series) {
        for (const auto& v : s.values) {
            if (v && std::isfinite(*v)) {
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
            }
        }
    }
    if (hi - lo <= 0.0) {
        hi = lo + 1.0;
    }
    auto y_of = [&](double v) { return kTop + kPlotHeight * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<title>" << escape_xml(title) << "</title>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
        << "</text>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + kPlotHeight
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << y_of(0.0) << "\" x2=\"" << kLeft + plot_width << "\" y2=\""
        << y_of(0.0) << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = lo + (hi - lo) * tick / 4.0;
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">" << fixed(v, 3)
            << "</text>\n";
    }
    svg << "<text x=\"16\" y=\"" << kTop + kPlotHeight / 2 << "\" transform=\"rotate(-90 16 "
        << kTop + kPlotHeight / 2 << ")\" text-anchor=\"middle\">" << escape_xml(y_label) << "</text>\n";

    const double bar_width = (kGroupWidth - 20.0) / static_cast<double>(series.size());
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const double group_x = kLeft + kGroupWidth * static_cast<double>(c) + 10.0;
        for (std::size_t s = 0; s < series.size(); ++s) {
            const auto& v = series[s].values[c];
            if (!v || !std::isfinite(*v)) {
                continue;
            }
            const double top = std::min(y_of(*v), y_of(0.0));
            const double h = std::abs(y_of(*v) - y_of(0.0));
            svg << "<rect class=\"bar\" data-series=\"" << escape_xml(series[s].name) << "\" data-category=\""
                << escape_xml(categories[c]) << "\" x=\"" << group_x + bar_width * static_cast<double>(s)
                << "\" y=\"" << top << "\" width=\"" << bar_width << "\" height=\"" << h << "\" fill=\""
                << series[s].color << "\"><title>" << escape_xml(series[s].name) << ' '
                << escape_xml(categories[c]) << ": " << csv::format_number(*v) << "</title></rect>\n";
        }
        const double label_x = group_x + (kGroupWidth - 20.0) / 2.0;
        const double label_y = kTop + kPlotHeight + 16.0;
        svg << "<text x=\"" << label_x << "\" y=\"" << label_y << "\" text-anchor=\"end\" transform=\"rotate(-35 "
            << label_x << ' ' << label_y << ")\">" << escape_xml(categories[c]) << "</text>\n";
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
        const double ly = kTop + 18.0 * static_cast<double>(s);
        const double lx = kLeft + plot_width + 20.0;
        svg << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"12\" height=\"12\" fill=\"" << series[s].color
            << "\"/>\n";
        svg << "<text x=\"" << lx + 18 << "\" y=\"" << ly + 10 << "\">" << escape_xml(series[s].name) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
    }
    out << text;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& name)
{
    if (name == "md") {
        return ReportFormat::Markdown;
    }
    if (name == "csv") {
        return ReportFormat::Csv;
    }
    if (name == "svg") {
        return ReportFormat::Svg;
    }
    throw Error(ErrorCode::ConfigInvalid, "format must be md, csv or svg, got " + name);
}

const std::vector<std::string>& report_header()
{
    static const std::vector<std::string> header = {
        "Algorithm", "TT",        "R2 (Train)", "MAE (Train)", "MSE (Train)",
        "MAPE (Train)", "R2 (Val)", "MAE (Val)", "MSE (Val)",  "MAPE (Val)",
    };
    return header;
}

std::vector<std::vector<std::string>> report_cells(const std::vector<EvalReport>& reports)
{
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        rows.push_back({
            r.algorithm,
            csv::format_number(r.training_time_s),
            cell(r.train.r2),
            csv::format_number(r.train.mae),
            csv::format_number(r.train.mse),
            cell(r.train.mape_pct),
            cell(r.val.r2),
            csv::format_number(r.val.mae),
            csv::format_number(r.val.mse),
            cell(r.val.mape_pct),
        });
    }
    return rows;
}

std::string render_markdown(const std::vector<EvalReport>& reports)
{
    std::ostringstream out;
    const auto& header = report_header();
    out << '|';
    for (const auto& h : header) {
        out << ' ' << h << " |";
    }
    out << "\n|";
    for (std::size_t k = 0; k < header.size(); ++k) {
        out << (k == 0 ? " --- |" : " ---: |");
    }
    out << '\n';
    for (const auto& row : report_cells(reports)) {
        out << '|';
        for (const auto& c : row) {
            out << ' ' << c << " |";
        }
        out << '\n';
    }
    return out.str();
}

std::string render_csv(const std::vector<EvalReport>& reports)
{
    std::string out = csv::join_record(report_header()) + "\n";
    for (const auto& row : report_cells(reports)) {
        out += csv::join_record(row) + "\n";
    }
    return out;
}

std::string render_r2_svg(const std::vector<EvalReport>& reports)
{
    std::vector<std::string> names;
    Series train{"R2 (Train)", "#4878a8", {}};
    Series val{"R2 (Val)", "#e07b39", {}};
    for (const auto& r : reports) {
        names.push_back(r.algorithm);
        train.values.push_back(r.train.r2);
        val.values.push_back(r.val.r2);
    }
    return bar_chart("Coefficient of determination", "R2", names, {train, val});
}

std::string render_training_time_svg(const std::vector<EvalReport>& reports)
{
    std::vector<std::string> names;
    Series time{"Training time (s)", "#5a9e6f", {}};
    for (const auto& r : reports) {
        names.push_back(r.algorithm);
        time.values.emplace_back(r.training_time_s);
    }
    return bar_chart("Training time", "seconds", names, {time});
}

std::vector<std::filesystem::path> render_report(const std::vector<EvalReport>& reports, ReportFormat format,
                                                 const std::filesystem::path& prefix)
{
    if (reports.empty()) {
        throw Error(ErrorCode::ConfigInvalid, "cannot render an empty report");
    }
    const std::string stem = prefix.string();
    std::vector<std::filesystem::path> written;
    switch (format) {
    case ReportFormat::Markdown:
        written.emplace_back(stem + ".md");
        write_file(written.back(), render_markdown(reports));
        break;
    case ReportFormat::Csv:
        written.emplace_back(stem + ".csv");
        write_file(written.back(), render_csv(reports));
        break;
    case ReportFormat::Svg:
        written.emplace_back(stem + "_r2.svg");
        write_file(written.back(), render_r2_svg(reports));
        written.emplace_back(stem + "_training_time.svg");
        write_file(written.back(), render_training_time_svg(reports));
        break;
    }
    return written;
}

}  // namespace epibench
