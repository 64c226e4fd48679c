#include "epibench/grid_search.hpp"

#include <numeric>

#include "epibench/error.hpp"
#include "epibench/metrics.hpp"
#include "epibench/parallel.hpp"
#include "epibench/rng.hpp"

namespace epibench {

std::vector<std::size_t> kfold_assignments(std::size_t n, std::size_t folds, std::uint64_t seed)
{
    if (folds < 2) {
        throw Error(ErrorCode::ConfigInvalid, "grid search needs at least 2 folds");
    }
    if (folds > n) {
        throw Error(ErrorCode::EmptySplit, std::to_string(folds) + " folds exceed " + std::to_string(n) + " rows");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t k = n; k > 1; --k) {
        std::swap(order[k - 1], order[rng.below(k)]);
    }
    std::vector<std::size_t> fold(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        fold[order[pos]] = pos % folds;
    }
    return fold;
}

GridSearchResult grid_search(const std::vector<RegressorSpec>& grid, const Matrix& x, std::span<const double> y,
                             std::span<const double> w, std::size_t folds, std::uint64_t seed,
                             std::size_t parallelism)
{
    if (grid.empty()) {
        throw Error(ErrorCode::ConfigInvalid, "grid search needs a non-empty grid");
    }
    const auto fold_of = kfold_assignments(x.rows, folds, seed);

    struct FoldData {
        Matrix x_train;
        std::vector<double> y_train;
        std::vector<double> w_train;
        Matrix x_val;
        std::vector<double> y_val;
    };
    std::vector<FoldData> data(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> train;
        std::vector<std::size_t> val;
        for (std::size_t r = 0; r < x.rows; ++r) {
            (fold_of[r] == f ? val : train).push_back(r);
        }
        auto& d = data[f];
        d.x_train = x.select_rows(train);
        d.x_val = x.select_rows(val);
        for (std::size_t r : train) {
            d.y_train.push_back(y[r]);
            if (!w.empty()) {
                d.w_train.push_back(w[r]);
            }
        }
        for (std::size_t r : val) {
            d.y_val.push_back(y[r]);
        }
    }

    GridSearchResult result;
    result.fold_mse.assign(grid.size(), std::vector<double>(folds, 0.0));
    parallel_for(grid.size() * folds, parallelism, [&](std::size_t task) {
        const std::size_t g = task / folds;
        const std::size_t f = task % folds;
        const auto& d = data[f];
        try {
            const FittedModel model = fit(grid[g], d.x_train, d.y_train, d.w_train);
            const auto predicted = model.predict(d.x_val);
            double sse = 0.0;
            for (std::size_t k = 0; k < predicted.size(); ++k) {
                sse += (d.y_val[k] - predicted[k]) * (d.y_val[k] - predicted[k]);
            }
            result.fold_mse[g][f] = sse / static_cast<double>(predicted.size());
        } catch (const Error& e) {
            throw Error(e.code(), "grid entry " + std::to_string(g) + " (" + to_json(grid[g]).dump() + "), fold " +
                                      std::to_string(f) + ": " + e.what());
        }
    });

    result.mean_mse.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        for (double v : result.fold_mse[g]) {
            sum += v;
        }
        result.mean_mse[g] = sum / static_cast<double>(folds);
        if (result.mean_mse[g] < result.mean_mse[result.best_index]) {
            result.best_index = g;
        }
    }
    result.best_spec = grid[result.best_index];
    result.refit.emplace(fit(result.best_spec, x, y, w));
    return result;
}

nlohmann::json to_json(const GridSearchResult& result, const std::vector<RegressorSpec>& grid)
{
    nlohmann::json j;
    j["best_index"] = result.best_index;
    j["best_spec"] = to_json(result.best_spec);
    auto& table = j["cv_table"] = nlohmann::json::array();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        table.push_back({{"spec", to_json(grid[g])},
                         {"mean_mse", result.mean_mse[g]},
                         {"fold_mse", result.fold_mse[g]}});
    }
    return j;
}

}  // namespace epibench
