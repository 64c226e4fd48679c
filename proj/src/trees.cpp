#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "epibench/error.hpp"
#include "epibench/regression.hpp"
#include "epibench/rng.hpp"

namespace epibench {

double RegressionTree::predict(std::span<const double> x) const
{
    std::size_t at = 0;
    while (!nodes[at].leaf) {
        const auto& node = nodes[at];
        at = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes[at].value;
}

std::size_t RegressionTree::depth() const
{
    std::vector<std::size_t> level(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        deepest = std::max(deepest, level[k]);
        if (!nodes[k].leaf) {
            level[nodes[k].left] = level[k] + 1;
            level[nodes[k].right] = level[k] + 1;
        }
    }
    return deepest;
}

std::size_t RegressionTree::leaves() const
{
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

namespace {

struct TreeLimits {
    std::size_t max_depth = 0;  ///< 0: unlimited
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    std::size_t features_per_split = 0;  ///< 0 or >= p: all features
};

/// Greedy CART on weighted squared error. Rows are passed by index so
/// bootstrap resamples can repeat rows. With `bins`, split points are only
/// allowed where the bin index changes.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const double> y, std::span<const double> w, TreeLimits limits,
                const std::vector<std::vector<std::uint16_t>>* bins, Rng* rng)
        : x_(x), y_(y), w_(w), limits_(limits), bins_(bins), rng_(rng)
    {
    }

    RegressionTree build(std::vector<std::size_t> rows)
    {
        tree_.nodes.clear();
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    double weight(std::size_t r) const { return w_.empty() ? 1.0 : w_[r]; }

    bool same_key(std::size_t a, std::size_t b, std::size_t feature) const
    {
        if (bins_ != nullptr) {
            return (*bins_)[feature][a] == (*bins_)[feature][b];
        }
        return x_(a, feature) == x_(b, feature);
    }

    std::vector<std::size_t> candidate_features()
    {
        std::vector<std::size_t> features(x_.cols);
        std::iota(features.begin(), features.end(), 0);
        const std::size_t m = limits_.features_per_split;
        if (m == 0 || m >= x_.cols || rng_ == nullptr) {
            return features;
        }
        for (std::size_t k = 0; k < m; ++k) {
            std::swap(features[k], features[k + rng_->below(x_.cols - k)]);
        }
        features.resize(m);
        std::sort(features.begin(), features.end());
        return features;
    }

    std::size_t grow(std::vector<std::size_t>& rows, std::size_t depth)
    {
        const std::size_t id = tree_.nodes.size();
        tree_.nodes.emplace_back();

        double total_w = 0.0;
        double total_wy = 0.0;
        for (std::size_t r : rows) {
            total_w += weight(r);
            total_wy += weight(r) * y_[r];
        }
        const double mean = total_w > 0.0 ? total_wy / total_w : 0.0;
        tree_.nodes[id].value = mean;
        tree_.nodes[id].samples = rows.size();

        const bool pure = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return y_[r] == y_[rows[0]]; });
        const std::size_t n = rows.size();
        if (pure || (limits_.max_depth > 0 && depth >= limits_.max_depth) || n < limits_.min_samples_split ||
            n < 2 * limits_.min_samples_leaf) {
            return id;
        }

        // Node-centered targets keep the variance sums well conditioned.
        double parent_sse = 0.0;
        for (std::size_t r : rows) {
            const double d = y_[r] - mean;
            parent_sse += weight(r) * d * d;
        }
        const double tie_tolerance = 1e-12 * std::max(parent_sse, std::numeric_limits<double>::min());

        double best_score = std::numeric_limits<double>::infinity();
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;
        std::vector<std::size_t> sorted;

        for (std::size_t f : candidate_features()) {
            sorted = rows;
            std::stable_sort(sorted.begin(), sorted.end(),
                             [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
            double lw = 0.0;
            double lwy = 0.0;
            double lwy2 = 0.0;
            double rw = 0.0;
            double rwy = 0.0;
            double rwy2 = 0.0;
            for (std::size_t r : rows) {
                const double d = y_[r] - mean;
                rw += weight(r);
                rwy += weight(r) * d;
                rwy2 += weight(r) * d * d;
            }
            for (std::size_t k = 0; k + 1 < n; ++k) {
                const std::size_t r = sorted[k];
                const double d = y_[r] - mean;
                const double wr = weight(r);
                lw += wr;
                lwy += wr * d;
                lwy2 += wr * d * d;
                rw -= wr;
                rwy -= wr * d;
                rwy2 -= wr * d * d;
                const std::size_t left_count = k + 1;
                if (left_count < limits_.min_samples_leaf) {
                    continue;
                }
                if (n - left_count < limits_.min_samples_leaf) {
                    break;
                }
                if (same_key(r, sorted[k + 1], f)) {
                    continue;
                }
                const double sse_left = lw > 0.0 ? lwy2 - lwy * lwy / lw : 0.0;
                const double sse_right = rw > 0.0 ? rwy2 - rwy * rwy / rw : 0.0;
                const double score = sse_left + sse_right;
                if (!found || score < best_score - tie_tolerance) {
                    const double lo = x_(r, f);
                    const double hi = x_(sorted[k + 1], f);
                    double threshold = lo + (hi - lo) / 2.0;
                    if (!(threshold < hi)) {
                        threshold = lo;
                    }
                    best_score = score;
                    best_feature = f;
                    best_threshold = threshold;
                    found = true;
                }
            }
        }
        if (!found) {
            return id;
        }

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        for (std::size_t r : rows) {
            (x_(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const std::size_t left = grow(left_rows, depth + 1);
        const std::size_t right = grow(right_rows, depth + 1);
        auto& node = tree_.nodes[id];
        node.leaf = false;
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left;
        node.right = right;
        return id;
    }

    const Matrix& x_;
    std::span<const double> y_;
    std::span<const double> w_;
    TreeLimits limits_;
    const std::vector<std::vector<std::uint16_t>>* bins_;
    Rng* rng_;
    RegressionTree tree_;
};

void require_shapes(const Matrix& x, std::span<const double> y, std::span<const double> w)
{
    if (x.rows != y.size() || (!w.empty() && w.size() != y.size())) {
        throw Error(ErrorCode::FitFailed, "features, target and weights differ in length");
    }
    if (x.rows == 0) {
        throw Error(ErrorCode::FitFailed, "cannot fit on zero rows");
    }
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::FitFailed, "sample weights must be finite and non-negative");
        }
    }
}

TreeLimits limits_for(const Hyperparams& hp, std::size_t default_depth)
{
    TreeLimits limits;
    limits.max_depth = hp.max_depth.value_or(default_depth);
    limits.min_samples_split = hp.min_samples_split;
    limits.min_samples_leaf = hp.min_samples_leaf;
    return limits;
}

std::vector<std::size_t> all_rows(std::size_t n)
{
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

FittedModel fit_tree(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                     std::span<const double> w)
{
    require_valid(spec);
    require_shapes(x, y, w);
    const auto start = std::chrono::steady_clock::now();
    TreeBuilder builder(x, y, w, limits_for(spec.hp, 0), nullptr, nullptr);
    RegressionTree tree = builder.build(all_rows(x.rows));
    return FittedModel(spec, std::move(tree), seconds_since(start));
}

FittedModel fit_forest(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                       std::span<const double> w)
{
    require_valid(spec);
    require_shapes(x, y, w);
    const auto start = std::chrono::steady_clock::now();
    TreeLimits limits = limits_for(spec.hp, 0);
    limits.features_per_split = spec.hp.feature_subsample.value_or(std::max<std::size_t>(1, x.cols / 3));

    ForestModel forest;
    forest.trees.reserve(spec.hp.n_trees);
    const std::size_t n = x.rows;
    for (std::size_t t = 0; t < spec.hp.n_trees; ++t) {
        Rng rng(derive_seed(spec.hp.seed, t));
        std::vector<std::size_t> rows;
        if (spec.hp.bootstrap) {
            rows.resize(n);
            for (auto& r : rows) {
                r = rng.below(n);
            }
            std::sort(rows.begin(), rows.end());
        } else {
            rows = all_rows(n);
        }
        TreeBuilder builder(x, y, w, limits, nullptr, &rng);
        forest.trees.push_back(builder.build(std::move(rows)));
    }
    return FittedModel(spec, std::move(forest), seconds_since(start));
}

std::vector<std::vector<std::uint16_t>> quantile_bins(const Matrix& x, std::size_t max_bins)
{
    std::vector<std::vector<std::uint16_t>> bins(x.cols, std::vector<std::uint16_t>(x.rows, 0));
    std::vector<double> sorted(x.rows);
    for (std::size_t f = 0; f < x.cols; ++f) {
        for (std::size_t r = 0; r < x.rows; ++r) {
            sorted[r] = x(r, f);
        }
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> distinct = sorted;
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

        if (distinct.size() <= max_bins) {
            for (std::size_t r = 0; r < x.rows; ++r) {
                const auto it = std::lower_bound(distinct.begin(), distinct.end(), x(r, f));
                bins[f][r] = static_cast<std::uint16_t>(it - distinct.begin());
            }
            continue;
        }
        // Bin k holds values in [cut[k-1], cut[k]); cuts sit at sample quantiles.
        std::vector<double> cuts;
        for (std::size_t k = 1; k < max_bins; ++k) {
            const double c = sorted[k * sorted.size() / max_bins];
            if (c > sorted.front() && (cuts.empty() || c > cuts.back())) {
                cuts.push_back(c);
            }
        }
        for (std::size_t r = 0; r < x.rows; ++r) {
            const auto it = std::upper_bound(cuts.begin(), cuts.end(), x(r, f));
            bins[f][r] = static_cast<std::uint16_t>(it - cuts.begin());
        }
    }
    return bins;
}

FittedModel fit_gbt(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                    std::span<const double> w)
{
    require_valid(spec);
    require_shapes(x, y, w);
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = x.rows;

    BoostedModel model;
    model.learning_rate = spec.hp.learning_rate;
    double total_w = 0.0;
    double total_wy = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double wr = w.empty() ? 1.0 : w[r];
        total_w += wr;
        total_wy += wr * y[r];
    }
    if (!(total_w > 0.0)) {
        throw Error(ErrorCode::FitFailed, "sample weights must have a positive sum");
    }
    model.base = total_wy / total_w;

    const auto bins = quantile_bins(x, spec.hp.max_bins);
    const TreeLimits limits = limits_for(spec.hp, 3);
    std::vector<double> prediction(n, model.base);
    std::vector<double> residual(n);
    model.stages.reserve(spec.hp.n_rounds);
    for (std::size_t round = 0; round < spec.hp.n_rounds; ++round) {
        for (std::size_t r = 0; r < n; ++r) {
            residual[r] = y[r] - prediction[r];
        }
        TreeBuilder builder(x, residual, w, limits, &bins, nullptr);
        RegressionTree stage = builder.build(all_rows(n));
        for (std::size_t r = 0; r < n; ++r) {
            prediction[r] += model.learning_rate * stage.predict(x.row(r));
        }
        model.stages.push_back(std::move(stage));
    }
    return FittedModel(spec, std::move(model), seconds_since(start));
}

}  // namespace epibench
