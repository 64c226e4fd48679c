#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "epibench/benchmark.hpp"
#include "epibench/error.hpp"
#include "epibench/grid_search.hpp"
#include "epibench/metrics.hpp"
#include "epibench/rng.hpp"

using namespace epibench;

namespace {

struct Problem {
    Matrix x;
    std::vector<double> y;
};

Problem sparse_problem(std::uint64_t seed, std::size_t n)
{
    Rng rng(seed);
    Problem p{Matrix(n, 6), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            p.x(i, j) = rng.normal(0, 1);
        }
        p.y[i] = 3 * p.x(i, 0) - 2 * p.x(i, 1) + 0.5 * p.x(i, 2) + rng.normal(0, 1.5);
    }
    return p;
}

RegressorSpec lasso(double alpha)
{
    RegressorSpec s;
    s.kind = RegressorKind::Lasso;
    s.hp.alpha = alpha;
    return s;
}

Dataset linear_dataset(std::size_t n)
{
    Dataset d({"run_id", "a", "b", "target"});
    Rng rng(3);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = rng.uniform(0, 10);
        const double b = rng.uniform(-5, 5);
        d.add_row(std::vector<double>{static_cast<double>(i), a, b, 4 + 2 * a - 3 * b});
    }
    return d;
}

}  // namespace

TEST_CASE("metric identities")
{
    const std::vector<double> y = {1, 2, 4, 7};
    const auto perfect = compute_metrics(y, y);
    CHECK(*perfect.r2 == 1.0);
    CHECK(perfect.mae == 0.0);
    CHECK(perfect.mse == 0.0);
    CHECK(*perfect.mape_pct == 0.0);

    const std::vector<double> mean(4, 3.5);
    CHECK(*compute_metrics(y, mean).r2 == 0.0);

    const auto hand = compute_metrics(std::vector<double>{1, 2, 4}, std::vector<double>{1, 3, 3});
    CHECK(std::abs(hand.mae - 2.0 / 3.0) <= 1e-12);
    CHECK(std::abs(hand.mse - 2.0 / 3.0) <= 1e-12);
    CHECK(std::abs(*hand.mape_pct - 25.0) <= 1e-12);
    CHECK(std::abs(hand.rmse * hand.rmse - hand.mse) <= 1e-12 * hand.mse);
    // SStot = 14/3, SSres = 2.
    CHECK(std::abs(*hand.r2 - (1.0 - 2.0 / (14.0 / 3.0))) <= 1e-12);
}

TEST_CASE("degenerate metric inputs")
{
    const auto flat = compute_metrics(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3});
    CHECK(!flat.r2.has_value());
    CHECK(flat.constant_target);
    CHECK(to_json(flat).at("r2").is_null());

    const auto zeros = compute_metrics(std::vector<double>{0, 0, 4, 8}, std::vector<double>{1, 0, 5, 8});
    CHECK(zeros.mape_excluded == 2);
    CHECK(*zeros.mape_pct == doctest::Approx(12.5));

    const auto all_zero = compute_metrics(std::vector<double>{0, 0}, std::vector<double>{1, 0});
    CHECK(!all_zero.mape_pct.has_value());

    try {
        compute_metrics(std::vector<double>{1}, std::vector<double>{1});
        FAIL("expected TooFewRows");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewRows);
    }
}

TEST_CASE("rmse squared equals mse on random data")
{
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> y(30);
        std::vector<double> p(30);
        for (std::size_t i = 0; i < 30; ++i) {
            y[i] = rng.normal(0, 10);
            p[i] = y[i] + rng.normal(0, 3);
        }
        const auto m = compute_metrics(y, p);
        CHECK(std::abs(m.rmse * m.rmse - m.mse) <= 1e-12 * m.mse);
        CHECK(*m.r2 <= 1.0);
    }
}

TEST_CASE("k-fold assignment")
{
    const auto a = kfold_assignments(23, 5, 9);
    std::vector<std::size_t> sizes(5, 0);
    for (auto f : a) {
        ++sizes[f];
    }
    CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
    CHECK(kfold_assignments(23, 5, 9) == a);
    CHECK(kfold_assignments(23, 5, 10) != a);
}

TEST_CASE("grid search with one candidate refits it")
{
    const auto p = sparse_problem(2, 60);
    const auto r = grid_search({lasso(0.1)}, p.x, p.y);
    CHECK(r.best_index == 0);
    CHECK(r.best_spec == lasso(0.1));
    REQUIRE(r.refit.has_value());
    const auto direct = fit(lasso(0.1), p.x, p.y);
    CHECK(std::get<LinearModel>(r.refit->params()).coef == std::get<LinearModel>(direct.params()).coef);
}

TEST_CASE("grid search ties go to the earlier entry")
{
    const auto p = sparse_problem(4, 50);
    auto inert = lasso(0.05);
    inert.hp.max_depth = 7;
    inert.hp.k = 2;
    const auto r = grid_search({lasso(0.5), inert, lasso(0.05)}, p.x, p.y);
    CHECK(r.mean_mse[1] == r.mean_mse[2]);
    CHECK(r.best_index == 1);
}

TEST_CASE("grid search picks the minimum of an independent rescoring")
{
    const auto p = sparse_problem(7, 200);
    const std::vector<RegressorSpec> grid = {lasso(0.001), lasso(0.01), lasso(0.1), lasso(1.0)};
    const auto r = grid_search(grid, p.x, p.y, {}, 5, 123, 3);

    const auto folds = kfold_assignments(p.y.size(), 5, 123);
    std::vector<double> scores;
    for (const auto& spec : grid) {
        double total = 0;
        for (std::size_t f = 0; f < 5; ++f) {
            std::vector<std::size_t> train;
            std::vector<std::size_t> val;
            for (std::size_t i = 0; i < p.y.size(); ++i) {
                (folds[i] == f ? val : train).push_back(i);
            }
            std::vector<double> ytr;
            for (auto i : train) {
                ytr.push_back(p.y[i]);
            }
            const auto model = fit(spec, p.x.select_rows(train), ytr);
            double sse = 0;
            for (auto i : val) {
                const double e = p.y[i] - model.predict(p.x.row(i));
                sse += e * e;
            }
            total += sse / static_cast<double>(val.size());
        }
        scores.push_back(total / 5);
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CHECK(r.mean_mse[g] == doctest::Approx(scores[g]).epsilon(1e-12));
    }
    const auto best = static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
    CHECK(r.best_index == best);

    const auto serial = grid_search(grid, p.x, p.y, {}, 5, 123, 1);
    CHECK(serial.mean_mse == r.mean_mse);
    CHECK(to_json(serial, grid) == to_json(r, grid));
}

TEST_CASE("grid search rejects bad input and names failing fits")
{
    const auto p = sparse_problem(1, 20);
    CHECK_THROWS_AS(grid_search({}, p.x, p.y), Error);
    CHECK_THROWS_AS(grid_search({lasso(0.1)}, p.x, p.y, {}, 1), Error);
    RegressorSpec knn;
    knn.kind = RegressorKind::Knn;
    knn.hp.k = 19;
    try {
        grid_search({lasso(0.1), knn}, p.x, p.y);
        FAIL("expected a fit error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("knn") != std::string::npos);
        CHECK(std::string(e.what()).find("fold") != std::string::npos);
    }
}

TEST_CASE("benchmark on exact linear data")
{
    const auto d = linear_dataset(100);
    RegressorSpec ols;
    const auto result = benchmark(d, "target", {{"LiR", {ols}}}, BenchConfig{});
    REQUIRE(result.reports.size() == 1);
    CHECK(result.features == std::vector<std::string>{"a", "b"});
    CHECK(result.n_train == 80);
    CHECK(result.n_val == 20);
    CHECK(*result.reports[0].train.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*result.reports[0].val.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("benchmark entries are independent of roster order")
{
    const auto d = linear_dataset(120);
    RegressorSpec tree;
    tree.kind = RegressorKind::Tree;
    RegressorSpec knn;
    knn.kind = RegressorKind::Knn;
    knn.hp.k = 3;
    const std::vector<RosterEntry> roster = {{"LaR", {lasso(0.01), lasso(0.1)}}, {"DT", {tree}}, {"KNN", {knn}}};
    const std::vector<RosterEntry> shuffled = {roster[2], roster[0], roster[1]};
    BenchConfig config;
    config.seed = 5;
    const auto a = benchmark(d, "target", roster, config);
    const auto b = benchmark(d, "target", shuffled, config);
    CHECK(b.reports[0].algorithm == "KNN");
    auto same = [](const EvalReport& x, const EvalReport& y) {
        return to_json(x.train) == to_json(y.train) && to_json(x.val) == to_json(y.val) && x.spec == y.spec;
    };
    CHECK(same(a.reports[0], b.reports[1]));
    CHECK(same(a.reports[1], b.reports[2]));
    CHECK(same(a.reports[2], b.reports[0]));
    CHECK(a.reports[0].grid.has_value());

    config.parallelism = 4;
    CHECK(to_json(benchmark(d, "target", roster, config)).dump() == to_json(a).dump());
}

TEST_CASE("benchmark json round trip")
{
    const auto d = linear_dataset(60);
    RegressorSpec ridge;
    ridge.kind = RegressorKind::Ridge;
    ridge.hp.alpha = 0.5;
    BenchConfig config;
    config.weighting = Weighting::InverseFrequencyDeciles;
    const auto result = benchmark(d, "target", {{"RiR", {ridge}}}, config);
    const auto j = to_json(result);
    CHECK(j.dump().find("training_time") == std::string::npos);
    const auto rows = reports_from_json(j, timing_json(result));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].algorithm == "RiR");
    CHECK(rows[0].spec == ridge);
    CHECK(rows[0].training_time_s == result.reports[0].training_time_s);
    CHECK(to_json(rows[0].val) == to_json(result.reports[0].val));

    try {
        benchmark(d, "infected", {{"RiR", {ridge}}}, config);
        FAIL("expected UnknownColumn");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownColumn);
    }
}

TEST_CASE("paper roster layout")
{
    const auto roster = paper_roster();
    std::vector<std::string> names;
    for (const auto& e : roster) {
        names.push_back(e.algorithm);
    }
    CHECK(names == std::vector<std::string>{"LiR", "LaR", "RiR", "ENR", "KNN", "DT", "RF", "HGB", "XGBoost"});
    CHECK(roster[7].candidates.front().kind == RegressorKind::Gbt);
    CHECK(roster[8].candidates.front().kind == RegressorKind::Gbt);
    for (const auto& e : paper_roster(false)) {
        CHECK(e.candidates.size() == 1);
    }
    bool has_all_alphas = false;
    for (const auto& e : roster) {
        if (e.algorithm == "LaR") {
            std::vector<double> alphas;
            for (const auto& c : e.candidates) {
                alphas.push_back(c.hp.alpha);
            }
            has_all_alphas = std::ranges::find(alphas, 0.001) != alphas.end() &&
                             std::ranges::find(alphas, 0.1) != alphas.end() &&
                             std::ranges::find(alphas, 1.0) != alphas.end();
        }
    }
    CHECK(has_all_alphas);
}
