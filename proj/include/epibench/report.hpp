#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "epibench/benchmark.hpp"

namespace epibench {

enum class ReportFormat { Markdown, Csv, Svg };

ReportFormat report_format_from_string(const std::string& name);

/// Column order of the results tables: algorithm, training time, then
/// R2/MAE/MSE/MAPE on the training split and the same on validation.
const std::vector<std::string>& report_header();

/// Table cells in report_header() order. Numbers use their shortest exact
/// decimal form; undefined metrics print as "n/a".
std::vector<std::vector<std::string>> report_cells(const std::vector<EvalReport>& reports);

std::string render_markdown(const std::vector<EvalReport>& reports);
std::string render_csv(const std::vector<EvalReport>& reports);

/// Grouped bar chart of train/validation R2 per algorithm, in report order.
std::string render_r2_svg(const std::vector<EvalReport>& reports);
/// Bar chart of training time per algorithm.
std::string render_training_time_svg(const std::vector<EvalReport>& reports);

/// Writes `<prefix>.md`, `<prefix>.csv`, or `<prefix>_r2.svg` and
/// `<prefix>_training_time.svg`. Returns the paths written.
std::vector<std::filesystem::path> render_report(const std::vector<EvalReport>& reports, ReportFormat format,
                                                 const std::filesystem::path& prefix);

}  // namespace epibench
