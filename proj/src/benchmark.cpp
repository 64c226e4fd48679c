#include "epibench/benchmark.hpp"

#include <algorithm>
#include <chrono>

#include "epibench/error.hpp"
#include "epibench/grid_search.hpp"

namespace epibench {

namespace {

RegressorSpec make(RegressorKind kind) { return RegressorSpec{kind, {}}; }

std::vector<RegressorSpec> alpha_grid(RegressorKind kind, const std::vector<double>& l1_ratios)
{
    std::vector<RegressorSpec> out;
    for (double l1 : l1_ratios) {
        for (double alpha : {0.001, 0.01, 0.1, 1.0}) {
            RegressorSpec s = make(kind);
            s.hp.alpha = alpha;
            s.hp.l1_ratio = l1;
            out.push_back(s);
        }
    }
    return out;
}

MetricBlock metrics_from_json(const nlohmann::json& j)
{
    MetricBlock m;
    m.n = j.at("n").get<std::size_t>();
    if (!j.at("r2").is_null()) {
        m.r2 = j.at("r2").get<double>();
    }
    m.mae = j.at("mae").get<double>();
    m.mse = j.at("mse").get<double>();
    m.rmse = j.at("rmse").get<double>();
    if (!j.at("mape_pct").is_null()) {
        m.mape_pct = j.at("mape_pct").get<double>();
    }
    m.mape_excluded = j.value("mape_excluded_rows", std::size_t{0});
    m.constant_target = j.contains("flags");
    return m;
}

}  // namespace

std::vector<RosterEntry> paper_roster(bool with_grids)
{
    std::vector<RosterEntry> roster;
    roster.push_back({"LiR", {make(RegressorKind::Ols)}});

    auto lasso = alpha_grid(RegressorKind::Lasso, {1.0});
    auto ridge = alpha_grid(RegressorKind::Ridge, {0.0});
    auto enet = alpha_grid(RegressorKind::ElasticNet, {0.2, 0.5, 0.8});
    std::vector<RegressorSpec> knn;
    for (std::size_t k : {3, 5, 7, 9}) {
        RegressorSpec s = make(RegressorKind::Knn);
        s.hp.k = k;
        knn.push_back(s);
    }
    std::vector<RegressorSpec> hgb;
    for (std::size_t depth : {3, 6}) {
        for (double rate : {0.05, 0.1, 0.2}) {
            RegressorSpec s = make(RegressorKind::Gbt);
            s.hp.max_depth = depth;
            s.hp.learning_rate = rate;
            hgb.push_back(s);
        }
    }
    if (!with_grids) {
        lasso = {lasso[2]};  // alpha 0.1
        ridge = {ridge[3]};  // alpha 1.0
        enet = {enet[6]};    // alpha 0.1, l1_ratio 0.5
        knn = {knn[1]};      // k 5
        hgb = {hgb[1]};      // depth 3, rate 0.1
    }
    roster.push_back({"LaR", lasso});
    roster.push_back({"RiR", ridge});
    roster.push_back({"ENR", enet});
    roster.push_back({"KNN", knn});
    roster.push_back({"DT", {make(RegressorKind::Tree)}});

    RegressorSpec forest = make(RegressorKind::Forest);
    forest.hp.n_trees = 100;
    roster.push_back({"RF", {forest}});
    roster.push_back({"HGB", hgb});

    RegressorSpec xgb = make(RegressorKind::Gbt);
    xgb.hp.max_depth = 6;
    xgb.hp.learning_rate = 0.3;
    roster.push_back({"XGBoost", {xgb}});
    return roster;
}

Matrix feature_matrix(const Dataset& d, const std::vector<std::string>& features)
{
    std::vector<std::size_t> cols;
    for (const auto& f : features) {
        cols.push_back(d.column_index(f));
    }
    Matrix x(d.n_rows(), cols.size());
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            x(r, j) = d.at(r, cols[j]);
        }
    }
    return x;
}

BenchmarkResult benchmark(const Dataset& data, const std::string& target, const std::vector<RosterEntry>& roster,
                          const BenchConfig& config)
{
    data.column_index(target);
    for (const auto& entry : roster) {
        if (entry.candidates.empty()) {
            throw Error(ErrorCode::ConfigInvalid, "roster entry " + entry.algorithm + " has no candidates");
        }
        for (const auto& spec : entry.candidates) {
            require_valid(spec);
        }
    }

    BenchmarkResult result;
    result.target = target;
    result.config = config;
    for (const auto& c : data.columns()) {
        const bool identifier =
            std::find(config.identifiers.begin(), config.identifiers.end(), c) != config.identifiers.end();
        if (c != target && !identifier) {
            result.features.push_back(c);
        }
    }
    if (result.features.empty()) {
        throw Error(ErrorCode::SchemaMismatch, "no feature columns remain besides the target");
    }

    auto split = split_and_weight(data, target, config.val_fraction, config.seed, config.weighting);
    if (config.scale_features) {
        const auto scaler = fit_standard_scaler(split.train, result.features);
        split.train = scaler.apply(split.train);
        split.val = scaler.apply(split.val);
    }
    result.n_train = split.train.n_rows();
    result.n_val = split.val.n_rows();

    const Matrix x_train = feature_matrix(split.train, result.features);
    const Matrix x_val = feature_matrix(split.val, result.features);
    const auto y_train = split.train.column(target);
    const auto y_val = split.val.column(target);
    const std::vector<double> no_weights;
    const std::vector<double>& w_train = split.train.has_weights() ? split.train.weights() : no_weights;

    for (const auto& entry : roster) {
        EvalReport report;
        report.algorithm = entry.algorithm;
        const auto start = std::chrono::steady_clock::now();
        std::optional<FittedModel> model;
        try {
            if (entry.candidates.size() == 1) {
                model.emplace(fit(entry.candidates.front(), x_train, y_train, w_train));
            } else {
                auto search = grid_search(entry.candidates, x_train, y_train, w_train, config.folds, config.seed,
                                          config.parallelism);
                report.grid = to_json(search, entry.candidates);
                model.emplace(std::move(*search.refit));
            }
        } catch (const Error& e) {
            throw Error(e.code(), entry.algorithm + ": " + e.what());
        }
        report.training_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report.spec = model->spec();
        report.train = evaluate(*model, x_train, y_train);
        report.val = evaluate(*model, x_val, y_val);
        result.reports.push_back(std::move(report));
    }
    return result;
}

nlohmann::json to_json(const BenchmarkResult& result)
{
    nlohmann::json j;
    j["target"] = result.target;
    j["features"] = result.features;
    j["split"] = {{"val_fraction", result.config.val_fraction},
                  {"train_fraction", 1.0 - result.config.val_fraction},
                  {"seed", result.config.seed},
                  {"weighting", to_string(result.config.weighting)},
                  {"scale_features", result.config.scale_features},
                  {"folds", result.config.folds},
                  {"n_train", result.n_train},
                  {"n_val", result.n_val}};
    j["notes"] = {"MAPE excludes rows whose target is zero; see mape_excluded_rows.",
                  "Training times are written to the timing sidecar."};
    auto& models = j["models"] = nlohmann::json::array();
    for (const auto& r : result.reports) {
        nlohmann::json m;
        m["algorithm"] = r.algorithm;
        m["spec"] = to_json(r.spec);
        m["train"] = to_json(r.train);
        m["val"] = to_json(r.val);
        if (r.grid) {
            m["grid_search"] = *r.grid;
        }
        models.push_back(std::move(m));
    }
    return j;
}

nlohmann::json timing_json(const BenchmarkResult& result)
{
    nlohmann::json j;
    auto& models = j["models"] = nlohmann::json::array();
    for (const auto& r : result.reports) {
        models.push_back({{"algorithm", r.algorithm}, {"training_time_s", r.training_time_s}});
    }
    return j;
}

std::vector<EvalReport> reports_from_json(const nlohmann::json& report, const std::optional<nlohmann::json>& timing)
{
    std::vector<EvalReport> out;
    try {
        for (const auto& m : report.at("models")) {
            EvalReport r;
            r.algorithm = m.at("algorithm").get<std::string>();
            r.spec = regressor_spec_from_json(m.at("spec"));
            r.train = metrics_from_json(m.at("train"));
            r.val = metrics_from_json(m.at("val"));
            if (m.contains("grid_search")) {
                r.grid = m.at("grid_search");
            }
            out.push_back(std::move(r));
        }
        if (timing) {
            const auto& rows = timing->at("models");
            for (std::size_t k = 0; k < rows.size() && k < out.size(); ++k) {
                if (rows[k].at("algorithm").get<std::string>() == out[k].algorithm) {
                    out[k].training_time_s = rows[k].at("training_time_s").get<double>();
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaMismatch, std::string("malformed benchmark report: ") + e.what());
    }
    return out;
}

}  // namespace epibench
