#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "epibench/regression.hpp"

namespace epibench {

inline constexpr std::size_t kDefaultFolds = 5;

/// Fold of each row: a seeded shuffle of the row order, then position k of
/// the shuffled order goes to fold k % folds.
std::vector<std::size_t> kfold_assignments(std::size_t n, std::size_t folds, std::uint64_t seed);

struct GridSearchResult {
    std::size_t best_index = 0;
    RegressorSpec best_spec;
    std::vector<double> mean_mse;                 ///< per grid entry
    std::vector<std::vector<double>> fold_mse;    ///< [grid entry][fold]
    std::optional<FittedModel> refit;             ///< best spec refit on all rows
};

/// Scores every spec by mean validation MSE over seeded k folds and refits
/// the best (ties go to the earliest entry) on everything. Work is spread
/// over `parallelism` workers; results do not depend on it.
GridSearchResult grid_search(const std::vector<RegressorSpec>& grid, const Matrix& x, std::span<const double> y,
                             std::span<const double> w = {}, std::size_t folds = kDefaultFolds,
                             std::uint64_t seed = 0, std::size_t parallelism = 1);

nlohmann::json to_json(const GridSearchResult& result, const std::vector<RegressorSpec>& grid);

}  // namespace epibench
