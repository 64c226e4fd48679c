#include "epibench/regression.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "epibench/error.hpp"

namespace epibench {

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const
{
    Matrix out(idx.size(), cols);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(idx[k] * cols), cols,
                    out.data.begin() + static_cast<std::ptrdiff_t>(k * cols));
    }
    return out;
}

namespace {

struct KindName {
    RegressorKind kind;
    const char* name;
};

constexpr KindName kKindNames[] = {
    {RegressorKind::Ols, "ols"},       {RegressorKind::Ridge, "ridge"}, {RegressorKind::Lasso, "lasso"},
    {RegressorKind::ElasticNet, "elastic_net"}, {RegressorKind::Knn, "knn"}, {RegressorKind::Tree, "tree"},
    {RegressorKind::Forest, "forest"}, {RegressorKind::Gbt, "gbt"},
};

void check(bool ok, const std::string& message)
{
    if (!ok) {
        throw Error(ErrorCode::ConfigInvalid, message);
    }
}

}  // namespace

std::string to_string(RegressorKind kind)
{
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

RegressorKind regressor_kind_from_string(const std::string& name)
{
    for (const auto& [k, n] : kKindNames) {
        if (name == n) {
            return k;
        }
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown regressor kind: " + name);
}

void require_valid(const RegressorSpec& spec)
{
    const auto& hp = spec.hp;
    switch (spec.kind) {
    case RegressorKind::Ols:
        break;
    case RegressorKind::Ridge:
    case RegressorKind::Lasso:
    case RegressorKind::ElasticNet:
        check(hp.alpha >= 0.0 && std::isfinite(hp.alpha), "alpha must be finite and >= 0");
        check(hp.l1_ratio >= 0.0 && hp.l1_ratio <= 1.0, "l1_ratio must lie in [0, 1]");
        check(hp.tol > 0.0, "tol must be positive");
        check(hp.max_sweeps >= 1, "max_sweeps must be at least 1");
        break;
    case RegressorKind::Knn:
        check(hp.k >= 1, "k must be at least 1");
        break;
    case RegressorKind::Gbt:
        // learning_rate 0 is accepted as the frozen-ensemble edge case.
        check(hp.learning_rate >= 0.0 && hp.learning_rate <= 1.0, "learning_rate must lie in [0, 1]");
        check(hp.n_rounds >= 1, "n_rounds must be at least 1");
        check(hp.max_bins >= 2 && hp.max_bins <= 65535, "max_bins must lie in [2, 65535]");
        [[fallthrough]];
    case RegressorKind::Tree:
    case RegressorKind::Forest:
        check(hp.min_samples_split >= 1, "min_samples_split must be at least 1");
        check(hp.min_samples_leaf >= 1, "min_samples_leaf must be at least 1");
        check(spec.kind != RegressorKind::Forest || hp.n_trees >= 1, "n_trees must be at least 1");
        check(!hp.feature_subsample || *hp.feature_subsample >= 1, "feature_subsample must be at least 1");
        break;
    }
}

double FittedModel::predict(std::span<const double> x) const
{
    struct Visitor {
        std::span<const double> x;

        double operator()(const LinearModel& m) const
        {
            double out = m.intercept;
            for (std::size_t j = 0; j < m.coef.size(); ++j) {
                out += m.coef[j] * x[j];
            }
            return out;
        }
        double operator()(const KnnModel& m) const
        {
            double sum = 0.0;
            for (std::size_t r : nearest_rows(m, x)) {
                sum += m.y[r];
            }
            return sum / static_cast<double>(m.k);
        }
        double operator()(const RegressionTree& t) const { return t.predict(x); }
        double operator()(const ForestModel& f) const
        {
            double sum = 0.0;
            for (const auto& t : f.trees) {
                sum += t.predict(x);
            }
            return sum / static_cast<double>(f.trees.size());
        }
        double operator()(const BoostedModel& b) const
        {
            double out = b.base;
            for (const auto& t : b.stages) {
                out += b.learning_rate * t.predict(x);
            }
            return out;
        }
    };
    return std::visit(Visitor{x}, params_);
}

std::vector<double> FittedModel::predict(const Matrix& x) const
{
    std::vector<double> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        out[r] = predict(x.row(r));
    }
    return out;
}

std::vector<std::size_t> nearest_rows(const KnnModel& model, std::span<const double> query)
{
    std::vector<std::pair<double, std::size_t>> dist(model.x.rows);
    for (std::size_t r = 0; r < model.x.rows; ++r) {
        double d = 0.0;
        for (std::size_t j = 0; j < model.x.cols; ++j) {
            const double diff = model.x(r, j) - query[j];
            d += diff * diff;
        }
        dist[r] = {d, r};
    }
    const auto kth = dist.begin() + static_cast<std::ptrdiff_t>(model.k);
    std::partial_sort(dist.begin(), kth, dist.end());
    std::vector<std::size_t> out;
    out.reserve(model.k);
    for (auto it = dist.begin(); it != kth; ++it) {
        out.push_back(it->second);
    }
    return out;
}

FittedModel fit_knn(const RegressorSpec& spec, const Matrix& x, std::span<const double> y)
{
    require_valid(spec);
    const auto start = std::chrono::steady_clock::now();
    if (x.rows != y.size()) {
        throw Error(ErrorCode::FitFailed, "feature rows and target length differ");
    }
    if (spec.hp.k > x.rows) {
        throw Error(ErrorCode::KTooLarge,
                    "k=" + std::to_string(spec.hp.k) + " exceeds " + std::to_string(x.rows) + " training rows");
    }
    KnnModel m{spec.hp.k, x, std::vector<double>(y.begin(), y.end())};
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return FittedModel(spec, std::move(m), elapsed.count());
}

FittedModel fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                std::span<const double> w)
{
    switch (spec.kind) {
    case RegressorKind::Ols:
    case RegressorKind::Ridge:
    case RegressorKind::Lasso:
    case RegressorKind::ElasticNet:
        return fit_linear_family(spec, x, y, w);
    case RegressorKind::Knn:
        return fit_knn(spec, x, y);
    case RegressorKind::Tree:
        return fit_tree(spec, x, y, w);
    case RegressorKind::Forest:
        return fit_forest(spec, x, y, w);
    case RegressorKind::Gbt:
        return fit_gbt(spec, x, y, w);
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown regressor kind");
}

nlohmann::json to_json(const RegressorSpec& spec)
{
    const auto& hp = spec.hp;
    nlohmann::json j;
    j["kind"] = to_string(spec.kind);
    switch (spec.kind) {
    case RegressorKind::Ols:
        break;
    case RegressorKind::Ridge:
        j["alpha"] = hp.alpha;
        break;
    case RegressorKind::Lasso:
    case RegressorKind::ElasticNet:
        j["alpha"] = hp.alpha;
        if (spec.kind == RegressorKind::ElasticNet) {
            j["l1_ratio"] = hp.l1_ratio;
        }
        j["tol"] = hp.tol;
        j["max_sweeps"] = hp.max_sweeps;
        break;
    case RegressorKind::Knn:
        j["k"] = hp.k;
        break;
    case RegressorKind::Gbt:
        j["learning_rate"] = hp.learning_rate;
        j["n_rounds"] = hp.n_rounds;
        j["max_bins"] = hp.max_bins;
        [[fallthrough]];
    case RegressorKind::Tree:
    case RegressorKind::Forest:
        j["max_depth"] = hp.max_depth ? nlohmann::json(*hp.max_depth) : nlohmann::json(nullptr);
        j["min_samples_split"] = hp.min_samples_split;
        j["min_samples_leaf"] = hp.min_samples_leaf;
        if (spec.kind == RegressorKind::Forest) {
            j["n_trees"] = hp.n_trees;
            j["bootstrap"] = hp.bootstrap;
            j["feature_subsample"] =
                hp.feature_subsample ? nlohmann::json(*hp.feature_subsample) : nlohmann::json(nullptr);
            j["seed"] = hp.seed;
        }
        break;
    }
    return j;
}

RegressorSpec regressor_spec_from_json(const nlohmann::json& j)
{
    static const char* const kKeys[] = {"kind", "alpha", "l1_ratio", "tol", "max_sweeps", "k",
                                        "max_depth", "min_samples_split", "min_samples_leaf", "n_trees",
                                        "bootstrap", "feature_subsample", "learning_rate", "n_rounds",
                                        "max_bins", "seed"};
    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigInvalid, "regressor spec must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; })) {
            throw Error(ErrorCode::ConfigInvalid, "unknown regressor key: " + key);
        }
    }
    try {
        RegressorSpec spec;
        spec.kind = regressor_kind_from_string(j.at("kind").get<std::string>());
        auto& hp = spec.hp;
        hp.alpha = j.value("alpha", hp.alpha);
        hp.l1_ratio = j.value("l1_ratio", hp.l1_ratio);
        hp.tol = j.value("tol", hp.tol);
        hp.max_sweeps = j.value("max_sweeps", hp.max_sweeps);
        hp.k = j.value("k", hp.k);
        if (j.contains("max_depth") && !j.at("max_depth").is_null()) {
            hp.max_depth = j.at("max_depth").get<std::size_t>();
        }
        hp.min_samples_split = j.value("min_samples_split", hp.min_samples_split);
        hp.min_samples_leaf = j.value("min_samples_leaf", hp.min_samples_leaf);
        hp.n_trees = j.value("n_trees", hp.n_trees);
        hp.bootstrap = j.value("bootstrap", hp.bootstrap);
        if (j.contains("feature_subsample") && !j.at("feature_subsample").is_null()) {
            hp.feature_subsample = j.at("feature_subsample").get<std::size_t>();
        }
        hp.learning_rate = j.value("learning_rate", hp.learning_rate);
        hp.n_rounds = j.value("n_rounds", hp.n_rounds);
        hp.max_bins = j.value("max_bins", hp.max_bins);
        hp.seed = j.value("seed", hp.seed);
        require_valid(spec);
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("malformed regressor spec: ") + e.what());
    }
}

}  // namespace epibench
