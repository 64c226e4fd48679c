#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

#include "epibench/regression.hpp"

namespace epibench {

struct MetricBlock {
    std::size_t n = 0;
    std::optional<double> r2;  ///< empty when the target is constant
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    std::optional<double> mape_pct;  ///< empty when every target is zero
    std::size_t mape_excluded = 0;   ///< zero-target rows left out of MAPE
    bool constant_target = false;
};

/// mae, mse, rmse, r2 = 1 - SSres/SStot and MAPE over nonzero targets.
/// Needs at least two rows.
MetricBlock compute_metrics(std::span<const double> y, std::span<const double> predicted);

MetricBlock evaluate(const FittedModel& model, const Matrix& x, std::span<const double> y);

nlohmann::json to_json(const MetricBlock& m);

}  // namespace epibench
