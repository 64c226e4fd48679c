#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace epibench {

/// Dense row-major feature matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    Matrix select_rows(std::span<const std::size_t> idx) const;
};

enum class RegressorKind { Ols, Ridge, Lasso, ElasticNet, Knn, Tree, Forest, Gbt };

std::string to_string(RegressorKind kind);
RegressorKind regressor_kind_from_string(const std::string& name);

/// Hyperparameters for every kind; each kind reads only the ones it uses.
struct Hyperparams {
    double alpha = 1.0;
    double l1_ratio = 0.5;  ///< elastic_net only; ridge forces 0, lasso forces 1
    double tol = 1e-6;      ///< coordinate descent: max coefficient change
    std::size_t max_sweeps = 10000;

    std::size_t k = 5;

    /// 0 means unlimited; unset takes the kind default (unlimited for trees
    /// and forests, 3 for boosting).
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;

    std::size_t n_trees = 100;
    bool bootstrap = true;
    std::optional<std::size_t> feature_subsample;  ///< unset: max(1, p/3)

    double learning_rate = 0.1;
    std::size_t n_rounds = 100;
    std::size_t max_bins = 256;

    std::uint64_t seed = 0;

    bool operator==(const Hyperparams&) const = default;
};

struct RegressorSpec {
    RegressorKind kind = RegressorKind::Ols;
    Hyperparams hp;

    bool operator==(const RegressorSpec&) const = default;
};

/// Throws ConfigInvalid when a hyperparameter is out of range for the kind.
void require_valid(const RegressorSpec& spec);

// ---------------------------------------------------------------------------
// Learned parameters

struct LinearModel {
    std::vector<double> coef;
    double intercept = 0.0;
    std::size_t sweeps = 0;  ///< coordinate-descent sweeps; 0 for direct solves
};

struct KnnModel {
    std::size_t k = 1;
    Matrix x;
    std::vector<double> y;
};

struct TreeNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;  ///< x[feature] <= threshold goes left
    std::size_t left = 0;
    std::size_t right = 0;
    double value = 0.0;
    std::size_t samples = 0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    double predict(std::span<const double> x) const;
    std::size_t depth() const;
    std::size_t leaves() const;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
};

struct BoostedModel {
    double base = 0.0;
    double learning_rate = 0.1;
    std::vector<RegressionTree> stages;
};

using ModelParams = std::variant<LinearModel, KnnModel, RegressionTree, ForestModel, BoostedModel>;

class FittedModel {
public:
    FittedModel(RegressorSpec spec, ModelParams params, double training_time_s)
        : spec_(std::move(spec)), params_(std::move(params)), training_time_s_(training_time_s) {}

    const RegressorSpec& spec() const { return spec_; }
    RegressorKind kind() const { return spec_.kind; }
    const ModelParams& params() const { return params_; }
    double training_time_s() const { return training_time_s_; }

    double predict(std::span<const double> x) const;
    std::vector<double> predict(const Matrix& x) const;

private:
    RegressorSpec spec_;
    ModelParams params_;
    double training_time_s_ = 0.0;
};

// ---------------------------------------------------------------------------
// Fitting. Weights are optional; an empty span means unit weights.

/// Shared penalized least squares:
///   (1/(2 sum w)) sum w_i (y_i - b - x_i.beta)^2
///     + alpha * (l1_ratio * |beta|_1 + (1 - l1_ratio)/2 * |beta|^2)
/// with an unpenalized intercept. ols and ridge use direct solves; lasso and
/// elastic_net use cyclic coordinate descent.
FittedModel fit_linear_family(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                              std::span<const double> w = {});

/// Coordinate-descent solve of the shared objective regardless of kind,
/// recording the objective after every sweep.
LinearModel coordinate_descent(const Matrix& x, std::span<const double> y, std::span<const double> w,
                               double alpha, double l1_ratio, double tol, std::size_t max_sweeps,
                               std::vector<double>* objective_trace = nullptr);

/// Closed-form ridge (alpha * (1 - l1_ratio) penalty only); alpha = 0 is OLS.
LinearModel solve_ridge(const Matrix& x, std::span<const double> y, std::span<const double> w, double alpha);

double linear_objective(const LinearModel& m, const Matrix& x, std::span<const double> y,
                        std::span<const double> w, double alpha, double l1_ratio);

double soft_threshold(double z, double gamma);

FittedModel fit_knn(const RegressorSpec& spec, const Matrix& x, std::span<const double> y);

/// Indices of the k nearest training rows by Euclidean distance, ties to the
/// lower row index, nearest first.
std::vector<std::size_t> nearest_rows(const KnnModel& model, std::span<const double> query);

FittedModel fit_tree(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                     std::span<const double> w = {});
FittedModel fit_forest(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                       std::span<const double> w = {});
FittedModel fit_gbt(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                    std::span<const double> w = {});

/// Dispatches on spec.kind.
FittedModel fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                std::span<const double> w = {});

/// Per-feature bin index of every row, as used by the boosting tree builder.
/// Features with at most `max_bins` distinct values get one bin per value.
std::vector<std::vector<std::uint16_t>> quantile_bins(const Matrix& x, std::size_t max_bins);

nlohmann::json to_json(const RegressorSpec& spec);
RegressorSpec regressor_spec_from_json(const nlohmann::json& j);

}  // namespace epibench
