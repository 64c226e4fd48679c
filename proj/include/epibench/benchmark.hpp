#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epibench/dataprep.hpp"
#include "epibench/dataset.hpp"
#include "epibench/metrics.hpp"
#include "epibench/regression.hpp"

namespace epibench {

/// One benchmarked algorithm. A single candidate is fitted as is; several
/// candidates are grid-searched on the training split first.
struct RosterEntry {
    std::string algorithm;
    std::vector<RegressorSpec> candidates;
};

struct BenchConfig {
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
    Weighting weighting = Weighting::None;
    bool scale_features = true;  ///< standard scaling fitted on the training split
    std::vector<std::string> identifiers = {"run_id"};
    std::size_t folds = 5;
    std::size_t parallelism = 1;
};

struct EvalReport {
    std::string algorithm;
    RegressorSpec spec;
    MetricBlock train;
    MetricBlock val;
    double training_time_s = 0.0;  ///< wall time of fitting, grid search included
    std::optional<nlohmann::json> grid;
};

struct BenchmarkResult {
    std::string target;
    std::vector<std::string> features;
    BenchConfig config;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::vector<EvalReport> reports;  ///< roster order
};

/// LiR, LaR, RiR, ENR, KNN, DT, RF, HGB and XGBoost. The last two are both
/// histogram boosting: HGB grid-searched, XGBoost at depth 6 and rate 0.3.
/// With `with_grids` the linear models, KNN and HGB carry search grids.
std::vector<RosterEntry> paper_roster(bool with_grids = true);

/// Splits, optionally weights and scales, then fits and scores every roster
/// entry in order. Features are every column other than the target and the
/// identifier columns.
BenchmarkResult benchmark(const Dataset& data, const std::string& target, const std::vector<RosterEntry>& roster,
                          const BenchConfig& config);

/// Deterministic report: metrics, specs and split settings, no timings.
nlohmann::json to_json(const BenchmarkResult& result);
/// Wall-clock training times, kept apart so the main report is reproducible.
nlohmann::json timing_json(const BenchmarkResult& result);

/// Rebuilds the report rows from to_json output, merging timings when given.
std::vector<EvalReport> reports_from_json(const nlohmann::json& report,
                                          const std::optional<nlohmann::json>& timing = std::nullopt);

/// Feature matrix and target vector from a dataset.
Matrix feature_matrix(const Dataset& d, const std::vector<std::string>& features);

}  // namespace epibench
