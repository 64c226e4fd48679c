#include "epibench/metrics.hpp"

#include <cmath>

#include "epibench/error.hpp"

namespace epibench {

MetricBlock compute_metrics(std::span<const double> y, std::span<const double> predicted)
{
    if (y.size() != predicted.size()) {
        throw Error(ErrorCode::SchemaMismatch, "target and prediction lengths differ");
    }
    if (y.size() < 2) {
        throw Error(ErrorCode::TooFewRows, "metrics need at least 2 rows");
    }
    const double n = static_cast<double>(y.size());
    double mean = 0.0;
    for (double v : y) {
        mean += v;
    }
    mean /= n;

    MetricBlock m;
    m.n = y.size();
    double ss_res = 0.0;
    double ss_tot = 0.0;
    double abs_sum = 0.0;
    double pct_sum = 0.0;
    std::size_t pct_rows = 0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double err = y[k] - predicted[k];
        ss_res += err * err;
        ss_tot += (y[k] - mean) * (y[k] - mean);
        abs_sum += std::abs(err);
        if (y[k] != 0.0) {
            pct_sum += std::abs(err) / std::abs(y[k]);
            ++pct_rows;
        } else {
            ++m.mape_excluded;
        }
    }
    m.mae = abs_sum / n;
    m.mse = ss_res / n;
    m.rmse = std::sqrt(m.mse);
    if (ss_tot > 0.0) {
        m.r2 = 1.0 - ss_res / ss_tot;
    } else {
        m.constant_target = true;
    }
    if (pct_rows > 0) {
        m.mape_pct = 100.0 * pct_sum / static_cast<double>(pct_rows);
    }
    return m;
}

MetricBlock evaluate(const FittedModel& model, const Matrix& x, std::span<const double> y)
{
    if (x.rows != y.size()) {
        throw Error(ErrorCode::SchemaMismatch, "feature rows and target length differ");
    }
    const auto predicted = model.predict(x);
    return compute_metrics(y, predicted);
}

nlohmann::json to_json(const MetricBlock& m)
{
    nlohmann::json j;
    j["n"] = m.n;
    j["r2"] = m.r2 ? nlohmann::json(*m.r2) : nlohmann::json(nullptr);
    j["mae"] = m.mae;
    j["mse"] = m.mse;
    j["rmse"] = m.rmse;
    j["mape_pct"] = m.mape_pct ? nlohmann::json(*m.mape_pct) : nlohmann::json(nullptr);
    j["mape_excluded_rows"] = m.mape_excluded;
    if (m.constant_target) {
        j["flags"] = {"constant_target"};
    }
    return j;
}

}  // namespace epibench
