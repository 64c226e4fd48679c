#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "doctest.h"
#include "epibench/dataprep.hpp"
#include "epibench/error.hpp"
#include "epibench/rng.hpp"

using namespace epibench;

namespace {

Dataset table(std::vector<std::string> columns, const std::vector<std::vector<double>>& rows)
{
    Dataset d(std::move(columns));
    for (const auto& r : rows) {
        d.add_row(r);
    }
    return d;
}

Dataset single_column(const std::string& name, const std::vector<double>& values)
{
    Dataset d({name});
    for (double v : values) {
        d.add_row(std::vector<double>{v});
    }
    return d;
}

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::ConfigInvalid;
}

}  // namespace

TEST_CASE("csv round trip and strict parsing")
{
    std::istringstream in("a,b\n1,2.5\n-3,1e-3\n");
    const auto d = read_csv(in);
    CHECK(d.columns() == std::vector<std::string>{"a", "b"});
    CHECK(d.at(1, 1) == 1e-3);
    std::ostringstream out;
    write_csv(out, d);
    std::istringstream again(out.str());
    CHECK(read_csv(again) == d);

    std::istringstream bad("a,b\n1,x\n");
    CHECK(code_of([&] { read_csv(bad); }) == ErrorCode::ParseError);
    std::istringstream ragged("a,b\n1\n");
    CHECK_THROWS_AS(read_csv(ragged), Error);
    std::istringstream dup("a,a\n1,2\n");
    CHECK_THROWS_AS(read_csv(dup), Error);
    CHECK(code_of([] { read_csv_file("/nonexistent/file.csv"); }) == ErrorCode::MissingFile);
}

TEST_CASE("merge and rename")
{
    const auto a = table({"tick", "sick", "immune"}, {{1, 2, 3}, {2, 4, 5}});
    CHECK(merge_and_rename({a}, {}) == a);

    const auto five = table({"x", "y"}, {{1, 1}, {2, 2}, {3, 3}, {4, 4}, {5, 5}});
    const auto other = table({"x", "y"}, {{6, 6}, {7, 7}, {8, 8}, {9, 9}, {10, 10}});
    const auto merged = merge_and_rename({five, other}, {});
    REQUIRE(merged.n_rows() == 10);
    for (std::size_t r = 0; r < 10; ++r) {
        CHECK(merged.at(r, 0) == static_cast<double>(r + 1));
    }

    const auto renamed = merge_and_rename({a}, netlogo_renames());
    CHECK(renamed.columns() == std::vector<std::string>{"tick", "infected", "recovered"});

    const auto b = table({"tick", "sick", "dead"}, {{1, 2, 3}});
    try {
        merge_and_rename({a, b}, netlogo_renames());
        FAIL("expected SchemaMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaMismatch);
        const std::string msg = e.what();
        CHECK(msg.find("dead") != std::string::npos);
        CHECK(msg.find("recovered") != std::string::npos);
    }
}

TEST_CASE("profile statistics and alerts")
{
    CHECK(skewness({-1, 0, 1}) == doctest::Approx(0).epsilon(1e-15));
    // Moment-formula oracle (population moments) for a fixed 6-point sample.
    CHECK(std::abs(skewness({0.5, 1.7, 2.2, 4.1, 8.9, 0.3}) - 1.1569688098498108) <= 1e-10);

    const auto d = table({"a", "dup", "c", "flat"},
                         {{1, 1, 5, 7}, {2, 2, 3, 7}, {4, 4, 4, 7}, {3, 3, 9, 7}, {10, 10, 1, 7}});
    const auto p = profile(d);
    const auto n = d.n_cols();
    REQUIRE(p.correlation.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(p.correlation[i][i] == 1.0);
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(p.correlation[i][j] == p.correlation[j][i]);
            CHECK(std::abs(p.correlation[i][j]) <= 1.0);
            CHECK(std::isfinite(p.correlation[i][j]));
        }
    }
    CHECK(p.correlation[0][1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p.correlation[0][3] == 0.0);
    REQUIRE(p.correlation_alerts.size() == 1);
    CHECK(p.correlation_alerts[0].a == "a");
    CHECK(p.correlation_alerts[0].b == "dup");
    CHECK(p.columns[3].constant);
    CHECK(p.columns[3].std == 0.0);
    CHECK(p.columns[0].mean == 4.0);
    CHECK(p.columns[0].std == doctest::Approx(std::sqrt(10.0)));
    bool noted = false;
    for (const auto& note : p.notes) {
        noted = noted || note.find("flat") != std::string::npos;
    }
    CHECK(noted);
    CHECK(to_json(p).at("correlation").at("matrix").size() == n);

    const auto skewed = single_column("s", {0, 0, 0, 0, 0, 0, 0, 0, 0, 100});
    const auto ps = profile(skewed);
    REQUIRE(ps.skew_alerts.size() == 1);
    CHECK(ps.columns[0].zero_fraction == doctest::Approx(0.9));

    CHECK(code_of([] { profile(single_column("x", {1})); }) == ErrorCode::TooFewRows);
}

TEST_CASE("clean ops")
{
    const auto d = table({"a", "b"}, {{0, 0}, {1, 0}, {0.001, 0}, {3.14159, -2.675}});
    const auto no_zero = clean(d, {DropAllZeroRows{}});
    CHECK(no_zero.n_rows() == 3);
    CHECK(no_zero.at(0, 0) == 1);

    CHECK(round_half_away(3.14159, 2) == 3.14);
    CHECK(round_half_away(2.5, 0) == 3.0);
    CHECK(round_half_away(-2.5, 0) == -3.0);
    CHECK(round_half_away(0.125, 2) == 0.13);
    CHECK(round_half_away(-0.125, 2) == -0.13);

    // Order matters: rounding first turns the 0.001 row into an all-zero row.
    const auto round_then_drop = clean(d, {RoundCells{2}, DropAllZeroRows{}});
    const auto drop_then_round = clean(d, {DropAllZeroRows{}, RoundCells{2}});
    CHECK(round_then_drop.n_rows() == 2);
    CHECK(drop_then_round.n_rows() == 3);
    CHECK(clean(d, {RoundCells{2}, DropAllZeroRows{}}) == round_then_drop);

    const auto seirv = table({"tick", "susceptible", "exposed", "infected", "recovered", "vaccinated"},
                             {{1, 10, 2, 3, 4, 5}});
    const auto sirv = clean(seirv, {DropColumns{{"exposed"}}});
    CHECK(sirv.columns() == std::vector<std::string>{"tick", "susceptible", "infected", "recovered", "vaccinated"});

    const auto where = clean(d, {DropRowsWhere{"b", RowPredicate::IsZero}});
    CHECK(where.n_rows() == 1);

    CHECK(code_of([&] { clean(d, {DropColumns{{"nope"}}}); }) == ErrorCode::UnknownColumn);
    CHECK(code_of([&] { clean(d, {DropColumns{{"a"}}, DropRowsWhere{"a", RowPredicate::IsZero}}); }) ==
          ErrorCode::UnknownColumn);

    const auto op = clean_op_from_json({{"op", "round"}, {"decimals", 1}});
    CHECK(std::get<RoundCells>(op).decimals == 1);
    CHECK_THROWS_AS(clean_op_from_json({{"op", "smote"}}), Error);
}

TEST_CASE("standard scaling")
{
    const auto d = single_column("x", {1, 2, 3});
    const auto s = fit_standard_scaler(d, {"x"});
    const auto z = s.apply(d);
    CHECK(z.at(0, 0) == doctest::Approx(-1.224744871391589).epsilon(1e-15));
    CHECK(z.at(1, 0) == 0.0);
    CHECK(z.at(2, 0) == doctest::Approx(1.224744871391589).epsilon(1e-15));

    const auto again = fit_standard_scaler(z, {"x"});
    CHECK(std::abs(again.mean[0]) <= 1e-12);
    CHECK(std::abs(again.scale[0] - 1.0) <= 1e-12);

    Rng rng(4);
    Dataset r({"x", "k"});
    for (int i = 0; i < 1000; ++i) {
        r.add_row(std::vector<double>{rng.normal(50, 20), 3.0});
    }
    const auto sr = fit_standard_scaler(r, {"x", "k"});
    CHECK(sr.warnings.size() == 1);
    const auto applied = sr.apply(r);
    const auto back = sr.invert(applied);
    double worst = 0;
    for (std::size_t i = 0; i < r.n_rows(); ++i) {
        worst = std::max(worst, std::abs(back.at(i, 0) - r.at(i, 0)));
        CHECK(applied.at(i, 1) == 0.0);
        CHECK(back.at(i, 1) == 3.0);
    }
    CHECK(worst <= 1e-9);
    CHECK(to_json(standard_scaler_from_json(to_json(sr))) == to_json(sr));
}

TEST_CASE("yeo-johnson branches")
{
    for (double x : {-7.5, -1.0, -0.2, 0.0, 0.3, 4.0, 120.0}) {
        CHECK(yeo_johnson(x, 1.0) == doctest::Approx(x).epsilon(1e-14));
    }
    for (double x : {0.0, 0.5, 3.0, 1e3}) {
        CHECK(yeo_johnson(x, 0.0) == doctest::Approx(std::log(x + 1)).epsilon(1e-14));
    }
    CHECK(yeo_johnson(-3.0, 2.0) == doctest::Approx(-std::log(4.0)).epsilon(1e-14));
    CHECK(yeo_johnson(2.0, 0.5) == doctest::Approx((std::sqrt(3.0) - 1) / 0.5).epsilon(1e-14));
    CHECK(yeo_johnson(-2.0, 0.5) == doctest::Approx(-(std::pow(3.0, 1.5) - 1) / 1.5).epsilon(1e-14));

    CHECK(code_of([] { fit_yeo_johnson_lambda({2, 2, 2, 2}); }) == ErrorCode::DegenerateColumn);
    CHECK(code_of([] { fit_yeo_johnson_lambda({1, 2}); }) == ErrorCode::DegenerateColumn);
}

TEST_CASE("yeo-johnson reduces log-normal skew")
{
    Rng rng(2023);
    std::vector<double> values(10000);
    for (auto& v : values) {
        v = std::exp(rng.normal(0, 1));
    }
    CHECK(skewness(values) > 4.0);
    const auto d = single_column("x", values);
    const auto t = fit_yeo_johnson(d, {"x"});
    CHECK(t.lambdas[0] > kLambdaMin);
    CHECK(t.lambdas[0] < kLambdaMax);
    CHECK(std::abs(skewness(t.apply(d).column(0))) < 0.5);

    // The fitted lambda is a local maximum of the likelihood.
    const double best = yeo_johnson_log_likelihood(values, t.lambdas[0]);
    CHECK(best >= yeo_johnson_log_likelihood(values, t.lambdas[0] + 1e-3));
    CHECK(best >= yeo_johnson_log_likelihood(values, t.lambdas[0] - 1e-3));
}

TEST_CASE("yeo-johnson round trip on mixed-sign data")
{
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> values(300);
        const double shift = rng.uniform(-2, 2);
        const double power = rng.uniform(0.5, 3);
        for (auto& v : values) {
            const double z = rng.normal(0, 1);
            v = shift + std::copysign(std::pow(std::abs(z), power), z);
        }
        const auto d = single_column("x", values);
        const auto t = fit_yeo_johnson(d, {"x"});
        const auto back = t.invert(t.apply(d));
        double worst = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            worst = std::max(worst, std::abs(back.at(i, 0) - values[i]));
        }
        INFO("lambda " << t.lambdas[0]);
        CHECK(worst <= 1e-8);
        CHECK(to_json(power_transform_from_json(to_json(t))) == to_json(t));
    }
}

TEST_CASE("z-score filter")
{
    const auto flat = single_column("x", std::vector<double>(8, 5.0));
    CHECK(zscore_filter(flat, {"x"}).n_rows() == 8);

    std::vector<double> values(9, 1.0);
    values.push_back(1000.0);
    const auto d = single_column("x", values);
    // Hand oracle: mean 100.9, population sigma 299.7, z(1000) = 899.1 / 299.7 = 3.
    CHECK(zscore_filter(d, {"x"}, 2.99).n_rows() == 9);
    CHECK(zscore_filter(d, {"x"}, 3.01).n_rows() == 10);
    CHECK(zscore_filter(d, {"x"}, 3.0).n_rows() == 10);
    CHECK(zscore_filter(d, {"x"}, std::numeric_limits<double>::infinity()) == d);

    // One pass: after dropping the outlier the remaining rows are not re-tested.
    const auto two = single_column("x", {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 50});
    const auto filtered = zscore_filter(two, {"x"});
    CHECK(filtered.n_rows() == 19);
}

TEST_CASE("split and weight")
{
    Dataset d({"id", "y"});
    for (int i = 0; i < 100; ++i) {
        d.add_row(std::vector<double>{static_cast<double>(i), static_cast<double>(i)});
    }
    const auto s = split_and_weight(d, "y", 0.2, 5);
    CHECK(s.train.n_rows() == 80);
    CHECK(s.val.n_rows() == 20);
    std::set<double> ids;
    for (const auto* part : {&s.train, &s.val}) {
        for (double v : part->column("id")) {
            CHECK(ids.insert(v).second);
        }
    }
    CHECK(ids.size() == 100);
    CHECK(split_and_weight(d, "y", 0.2, 5).train == s.train);
    CHECK(!(split_and_weight(d, "y", 0.2, 6).train == s.train));

    for (double w : inverse_frequency_decile_weights(d.column("y"))) {
        CHECK(std::abs(w - 1.0) <= 1e-9);
    }

    std::vector<double> bimodal(90, 0.0);
    bimodal.insert(bimodal.end(), 10, 10.0);
    const auto w = inverse_frequency_decile_weights(bimodal);
    CHECK(w.back() / w.front() == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(w.front() == doctest::Approx(100.0 / 900.0));

    const auto weighted = split_and_weight(d, "y", 0.25, 1, Weighting::InverseFrequencyDeciles);
    CHECK(weighted.train.has_weights());
    CHECK(!weighted.val.has_weights());

    CHECK(code_of([] { split_and_weight(single_column("y", {1}), "y", 0.5, 0); }) == ErrorCode::EmptySplit);
    CHECK_THROWS_AS(split_and_weight(d, "y", 1.0, 0), Error);
    CHECK(code_of([&] { split_and_weight(d, "target", 0.2, 0); }) == ErrorCode::UnknownColumn);
    CHECK(weighting_from_string(to_string(Weighting::InverseFrequencyDeciles)) == Weighting::InverseFrequencyDeciles);
}

TEST_CASE("redundant columns are exact affine copies of earlier ones")
{
    const auto d = table({"run_id", "a", "b", "twice_a", "neg_b", "flat", "c"},
                         {{0, 1, 5, 2, -5, 1, 0.5}, {1, 2, 3, 4, -3, 1, 0.1}, {2, 3, 4, 6, -4, 1, 0.9},
                          {3, 4, 1, 8, -1, 1, 0.2}});
    const auto p = profile(d);
    CHECK(redundant_columns(p, {"run_id"}) == std::vector<std::string>{"twice_a", "neg_b"});
    // Without the ignore list, a copies run_id and its copies chain back to run_id.
    CHECK(redundant_columns(p, {}) == std::vector<std::string>{"a", "twice_a", "neg_b"});
}
