#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "epibench/dataset.hpp"

namespace epibench {

// ---------------------------------------------------------------------------
// Merging

/// Applies `renames` to every sheet, then concatenates rows in sheet order.
/// Sheets may order their columns differently; the first sheet's order wins.
Dataset merge_and_rename(const std::vector<Dataset>& sheets,
                         const std::map<std::string, std::string>& renames);

/// sick -> infected, immune -> recovered.
const std::map<std::string, std::string>& netlogo_renames();

// ---------------------------------------------------------------------------
// Profiling

struct ColumnProfile {
    std::string name;
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;  ///< population standard deviation
    double skewness = 0.0;
    double zero_fraction = 0.0;
    std::size_t missing = 0;
    bool constant = false;
};

struct CorrelationAlert {
    std::string a;
    std::string b;
    double correlation = 0.0;
};

struct SkewAlert {
    std::string column;
    double skewness = 0.0;
};

struct ProfileReport {
    std::vector<ColumnProfile> columns;
    std::vector<std::vector<double>> correlation;  ///< Pearson, symmetric, unit diagonal
    std::vector<CorrelationAlert> correlation_alerts;
    std::vector<SkewAlert> skew_alerts;
    std::vector<std::string> notes;
    double corr_threshold = 0.9;
    double skew_threshold = 2.0;
};

inline constexpr double kDefaultCorrThreshold = 0.9;
inline constexpr double kDefaultSkewThreshold = 2.0;

/// Population-moment sample skewness g1 = m3 / m2^1.5; 0 for constant input.
double skewness(const std::vector<double>& values);

/// Pearson correlation; 0 when either side is constant.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

ProfileReport profile(const Dataset& d, double corr_threshold = kDefaultCorrThreshold,
                      double skew_threshold = kDefaultSkewThreshold);

nlohmann::json to_json(const ProfileReport& report);

/// Columns that are an exact affine copy (|rho| >= 1 - tolerance) of an
/// earlier kept column, in column order. Columns listed in `ignore` are
/// neither dropped nor used as the kept copy.
std::vector<std::string> redundant_columns(const ProfileReport& report, const std::vector<std::string>& ignore,
                                           double tolerance = 1e-12);

// ---------------------------------------------------------------------------
// Cleaning

struct DropColumns {
    std::vector<std::string> names;
};
struct DropAllZeroRows {};
struct RoundCells {
    int decimals = 2;
};
enum class RowPredicate { IsZero };
struct DropRowsWhere {
    std::string column;
    RowPredicate predicate = RowPredicate::IsZero;
};

using CleanOp = std::variant<DropColumns, DropAllZeroRows, RoundCells, DropRowsWhere>;

/// Half-away-from-zero rounding to `decimals` places.
double round_half_away(double value, int decimals);

/// Applies the ops in order. Every referenced column must exist when its op
/// runs (UnknownColumn otherwise).
Dataset clean(const Dataset& d, const std::vector<CleanOp>& ops);

/// {"op": "drop_columns", "columns": [...]}, {"op": "drop_all_zero_rows"},
/// {"op": "round", "decimals": 2}, {"op": "drop_rows_where", "column": c,
/// "predicate": "is_zero"}.
CleanOp clean_op_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Feature transforms. Each is fitted on one dataset and can be applied to any
// dataset that has the fitted columns.

struct StandardScaler {
    std::vector<std::string> columns;
    std::vector<double> mean;
    std::vector<double> scale;  ///< population sigma; 0 for constant columns
    std::vector<std::string> warnings;

    Dataset apply(const Dataset& d) const;
    Dataset invert(const Dataset& d) const;
};

StandardScaler fit_standard_scaler(const Dataset& d, const std::vector<std::string>& columns);

/// Yeo-Johnson transform of one value.
double yeo_johnson(double x, double lambda);
double yeo_johnson_inverse(double y, double lambda);

/// Profile log-likelihood maximized when fitting lambda.
double yeo_johnson_log_likelihood(const std::vector<double>& values, double lambda);

inline constexpr double kLambdaMin = -5.0;
inline constexpr double kLambdaMax = 5.0;
inline constexpr double kLambdaTolerance = 1e-5;

/// Golden-section maximization of the log-likelihood over [-5, 5].
double fit_yeo_johnson_lambda(const std::vector<double>& values);

struct PowerTransform {
    std::vector<std::string> columns;
    std::vector<double> lambdas;

    Dataset apply(const Dataset& d) const;
    Dataset invert(const Dataset& d) const;
};

PowerTransform fit_yeo_johnson(const Dataset& d, const std::vector<std::string>& columns);

nlohmann::json to_json(const StandardScaler& s);
nlohmann::json to_json(const PowerTransform& t);
StandardScaler standard_scaler_from_json(const nlohmann::json& j);
PowerTransform power_transform_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Filtering and splitting

inline constexpr double kDefaultZThreshold = 3.0;

/// Drops rows where any listed column has |x - mean| / sigma > threshold.
/// Statistics come from the unfiltered data; one pass only.
Dataset zscore_filter(const Dataset& d, const std::vector<std::string>& columns,
                      double threshold = kDefaultZThreshold);

enum class Weighting { None, InverseFrequencyDeciles };

struct TrainValSplit {
    Dataset train;
    Dataset val;
};

/// Seeded shuffle, then the last ceil(n * val_fraction) shuffled rows go to
/// validation. With InverseFrequencyDeciles the training target is cut into
/// ten equal-width bins over its range and each row gets
/// n_train / (10 * rows_in_its_bin).
TrainValSplit split_and_weight(const Dataset& d, const std::string& target, double val_fraction,
                               std::uint64_t seed, Weighting weighting = Weighting::None);

/// Row indices of the split, before any weighting.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double val_fraction,
                                                                            std::uint64_t seed);

std::vector<double> inverse_frequency_decile_weights(const std::vector<double>& target);

Weighting weighting_from_string(const std::string& name);
std::string to_string(Weighting w);

}  // namespace epibench
