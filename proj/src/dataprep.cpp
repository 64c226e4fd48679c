#include "epibench/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "epibench/error.hpp"
#include "epibench/rng.hpp"

namespace epibench {

namespace {

struct Moments {
    double mean = 0.0;
    double m2 = 0.0;  ///< population variance
    double m3 = 0.0;
};

Moments moments(const std::vector<double>& x)
{
    Moments m;
    if (x.empty()) {
        return m;
    }
    const double n = static_cast<double>(x.size());
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (double v : x) {
        const double d = v - m.mean;
        m.m2 += d * d;
        m.m3 += d * d * d;
    }
    m.m2 /= n;
    m.m3 /= n;
    return m;
}

bool is_constant(const std::vector<double>& x)
{
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

}  // namespace

// ---------------------------------------------------------------------------

Dataset merge_and_rename(const std::vector<Dataset>& sheets,
                         const std::map<std::string, std::string>& renames)
{
    if (sheets.empty()) {
        return Dataset();
    }
    auto renamed = [&](const Dataset& d) {
        std::vector<std::string> names = d.columns();
        for (auto& n : names) {
            if (auto it = renames.find(n); it != renames.end()) {
                n = it->second;
            }
        }
        return names;
    };

    const std::vector<std::string> schema = renamed(sheets.front());
    Dataset out(schema);
    const std::set<std::string> expected(schema.begin(), schema.end());

    for (std::size_t s = 0; s < sheets.size(); ++s) {
        const auto names = renamed(sheets[s]);
        const std::set<std::string> got(names.begin(), names.end());
        if (got != expected || names.size() != schema.size()) {
            std::string offending;
            for (const auto& n : got) {
                if (!expected.contains(n)) {
                    offending += " +" + n;
                }
            }
            for (const auto& n : expected) {
                if (!got.contains(n)) {
                    offending += " -" + n;
                }
            }
            throw Error(ErrorCode::SchemaMismatch,
                        "sheet " + std::to_string(s) + " column set differs:" + offending);
        }
        std::vector<std::size_t> order;
        for (const auto& n : schema) {
            order.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin()));
        }
        std::vector<double> row(schema.size());
        const Dataset& sheet = sheets[s];
        for (std::size_t r = 0; r < sheet.n_rows(); ++r) {
            for (std::size_t c = 0; c < order.size(); ++c) {
                row[c] = sheet.at(r, order[c]);
            }
            out.add_row(row);
        }
    }
    return out;
}

const std::map<std::string, std::string>& netlogo_renames()
{
    static const std::map<std::string, std::string> renames = {
        {"sick", "infected"},
        {"immune", "recovered"},
    };
    return renames;
}

// ---------------------------------------------------------------------------

double skewness(const std::vector<double>& values)
{
    const Moments m = moments(values);
    if (m.m2 <= 0.0) {
        return 0.0;
    }
    return m.m3 / std::pow(m.m2, 1.5);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    if (is_constant(a) || is_constant(b)) {
        return 0.0;
    }
    double cov = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        cov += (a[k] - ma.mean) * (b[k] - mb.mean);
    }
    cov /= static_cast<double>(a.size());
    return std::clamp(cov / std::sqrt(ma.m2 * mb.m2), -1.0, 1.0);
}

ProfileReport profile(const Dataset& d, double corr_threshold, double skew_threshold)
{
    if (d.n_rows() < 2) {
        throw Error(ErrorCode::TooFewRows, "profiling needs at least 2 rows");
    }
    ProfileReport report;
    report.corr_threshold = corr_threshold;
    report.skew_threshold = skew_threshold;

    const std::size_t p = d.n_cols();
    std::vector<std::vector<double>> cols(p);
    for (std::size_t c = 0; c < p; ++c) {
        cols[c] = d.column(c);
        const auto& x = cols[c];
        const Moments m = moments(x);
        ColumnProfile cp;
        cp.name = d.columns()[c];
        cp.count = x.size();
        cp.mean = m.mean;
        cp.std = std::sqrt(m.m2);
        cp.skewness = skewness(x);
        cp.zero_fraction = static_cast<double>(std::count(x.begin(), x.end(), 0.0)) / static_cast<double>(x.size());
        cp.missing = static_cast<std::size_t>(
            std::count_if(x.begin(), x.end(), [](double v) { return !std::isfinite(v); }));
        cp.constant = is_constant(x);
        if (cp.constant) {
            report.notes.push_back("ConstantColumn: " + cp.name);
        }
        if (std::abs(cp.skewness) >= skew_threshold) {
            report.skew_alerts.push_back({cp.name, cp.skewness});
        }
        report.columns.push_back(std::move(cp));
    }

    report.correlation.assign(p, std::vector<double>(p, 0.0));
    for (std::size_t a = 0; a < p; ++a) {
        report.correlation[a][a] = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            const double r = pearson(cols[a], cols[b]);
            report.correlation[a][b] = r;
            report.correlation[b][a] = r;
            if (std::abs(r) >= corr_threshold) {
                report.correlation_alerts.push_back({d.columns()[a], d.columns()[b], r});
            }
        }
    }
    return report;
}

std::vector<std::string> redundant_columns(const ProfileReport& report, const std::vector<std::string>& ignore,
                                           double tolerance)
{
    const std::size_t p = report.columns.size();
    auto ignored = [&](std::size_t k) {
        return std::find(ignore.begin(), ignore.end(), report.columns[k].name) != ignore.end();
    };
    std::vector<bool> dropped(p, false);
    std::vector<std::string> out;
    for (std::size_t b = 0; b < p; ++b) {
        if (ignored(b) || report.columns[b].constant) {
            continue;
        }
        for (std::size_t a = 0; a < b; ++a) {
            if (!ignored(a) && !dropped[a] && !report.columns[a].constant &&
                std::abs(report.correlation[a][b]) >= 1.0 - tolerance) {
                dropped[b] = true;
                out.push_back(report.columns[b].name);
                break;
            }
        }
    }
    return out;
}

nlohmann::json to_json(const ProfileReport& report)
{
    nlohmann::json j;
    j["corr_threshold"] = report.corr_threshold;
    j["skew_threshold"] = report.skew_threshold;
    auto& cols = j["columns"] = nlohmann::json::array();
    std::vector<std::string> names;
    for (const auto& c : report.columns) {
        names.push_back(c.name);
        cols.push_back({{"name", c.name},
                        {"count", c.count},
                        {"mean", c.mean},
                        {"std", c.std},
                        {"skewness", c.skewness},
                        {"zero_fraction", c.zero_fraction},
                        {"missing", c.missing},
                        {"constant", c.constant}});
    }
    j["correlation"] = {{"columns", names}, {"matrix", report.correlation}};
    auto& alerts = j["alerts"] = nlohmann::json::array();
    for (const auto& a : report.correlation_alerts) {
        alerts.push_back({{"type", "high_correlation"}, {"columns", {a.a, a.b}}, {"value", a.correlation}});
    }
    for (const auto& a : report.skew_alerts) {
        alerts.push_back({{"type", "high_skewness"}, {"columns", {a.column}}, {"value", a.skewness}});
    }
    j["notes"] = report.notes;
    return j;
}

// ---------------------------------------------------------------------------

double round_half_away(double value, int decimals)
{
    const double scale = std::pow(10.0, decimals);
    return std::round(value * scale) / scale;
}

Dataset clean(const Dataset& d, const std::vector<CleanOp>& ops)
{
    Dataset current = d;
    for (const auto& op : ops) {
        if (const auto* drop = std::get_if<DropColumns>(&op)) {
            std::set<std::string> removed;
            for (const auto& n : drop->names) {
                current.column_index(n);
                removed.insert(n);
            }
            std::vector<std::string> keep;
            for (const auto& n : current.columns()) {
                if (!removed.contains(n)) {
                    keep.push_back(n);
                }
            }
            current = current.select_columns(keep);
        } else if (std::holds_alternative<DropAllZeroRows>(op)) {
            std::vector<std::size_t> keep;
            for (std::size_t r = 0; r < current.n_rows(); ++r) {
                const auto row = current.row(r);
                if (!std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
                    keep.push_back(r);
                }
            }
            current = current.select_rows(keep);
        } else if (const auto* round = std::get_if<RoundCells>(&op)) {
            for (std::size_t r = 0; r < current.n_rows(); ++r) {
                for (std::size_t c = 0; c < current.n_cols(); ++c) {
                    current.at(r, c) = round_half_away(current.at(r, c), round->decimals);
                }
            }
        } else if (const auto* where = std::get_if<DropRowsWhere>(&op)) {
            const std::size_t col = current.column_index(where->column);
            std::vector<std::size_t> keep;
            for (std::size_t r = 0; r < current.n_rows(); ++r) {
                if (current.at(r, col) != 0.0) {
                    keep.push_back(r);
                }
            }
            current = current.select_rows(keep);
        }
    }
    return current;
}

CleanOp clean_op_from_json(const nlohmann::json& j)
{
    try {
        const auto name = j.at("op").get<std::string>();
        if (name == "drop_columns") {
            return DropColumns{j.at("columns").get<std::vector<std::string>>()};
        }
        if (name == "drop_all_zero_rows") {
            return DropAllZeroRows{};
        }
        if (name == "round") {
            return RoundCells{j.value("decimals", 2)};
        }
        if (name == "drop_rows_where") {
            const auto predicate = j.value("predicate", std::string("is_zero"));
            if (predicate != "is_zero") {
                throw Error(ErrorCode::ConfigInvalid, "unsupported row predicate: " + predicate);
            }
            return DropRowsWhere{j.at("column").get<std::string>(), RowPredicate::IsZero};
        }
        throw Error(ErrorCode::ConfigInvalid, "unknown clean op: " + name);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("malformed clean op: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

StandardScaler fit_standard_scaler(const Dataset& d, const std::vector<std::string>& columns)
{
    StandardScaler s;
    s.columns = columns;
    for (const auto& name : columns) {
        const Moments m = moments(d.column(name));
        s.mean.push_back(m.mean);
        const double sigma = std::sqrt(m.m2);
        if (sigma > 0.0) {
            s.scale.push_back(sigma);
        } else {
            s.scale.push_back(0.0);
            s.warnings.push_back("constant column " + name + " scales to 0");
        }
    }
    return s;
}

Dataset StandardScaler::apply(const Dataset& d) const
{
    Dataset out = d;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const std::size_t c = out.column_index(columns[k]);
        for (std::size_t r = 0; r < out.n_rows(); ++r) {
            out.at(r, c) = scale[k] > 0.0 ? (out.at(r, c) - mean[k]) / scale[k] : 0.0;
        }
    }
    return out;
}

Dataset StandardScaler::invert(const Dataset& d) const
{
    Dataset out = d;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const std::size_t c = out.column_index(columns[k]);
        for (std::size_t r = 0; r < out.n_rows(); ++r) {
            out.at(r, c) = out.at(r, c) * scale[k] + mean[k];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kLambdaEps = 1e-12;

}  // namespace

double yeo_johnson(double x, double lambda)
{
    if (x >= 0.0) {
        if (std::abs(lambda) < kLambdaEps) {
            return std::log1p(x);
        }
        return std::expm1(lambda * std::log1p(x)) / lambda;
    }
    if (std::abs(lambda - 2.0) < kLambdaEps) {
        return -std::log1p(-x);
    }
    const double q = 2.0 - lambda;
    return -std::expm1(q * std::log1p(-x)) / q;
}

double yeo_johnson_inverse(double y, double lambda)
{
    if (y >= 0.0) {
        if (std::abs(lambda) < kLambdaEps) {
            return std::expm1(y);
        }
        return std::expm1(std::log1p(lambda * y) / lambda);
    }
    if (std::abs(lambda - 2.0) < kLambdaEps) {
        return -std::expm1(-y);
    }
    const double q = 2.0 - lambda;
    return -std::expm1(std::log1p(-q * y) / q);
}

double yeo_johnson_log_likelihood(const std::vector<double>& values, double lambda)
{
    std::vector<double> transformed(values.size());
    double jacobian = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        transformed[k] = yeo_johnson(values[k], lambda);
        jacobian += std::copysign(std::log1p(std::abs(values[k])), values[k]);
    }
    const double variance = moments(transformed).m2;
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        return -std::numeric_limits<double>::infinity();
    }
    const double n = static_cast<double>(values.size());
    return -0.5 * n * std::log(variance) + (lambda - 1.0) * jacobian;
}

double fit_yeo_johnson_lambda(const std::vector<double>& values)
{
    if (values.size() < 3) {
        throw Error(ErrorCode::DegenerateColumn, "Yeo-Johnson fit needs at least 3 values");
    }
    if (is_constant(values)) {
        throw Error(ErrorCode::DegenerateColumn, "Yeo-Johnson fit on a constant column");
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = kLambdaMin;
    double hi = kLambdaMax;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = yeo_johnson_log_likelihood(values, x1);
    double f2 = yeo_johnson_log_likelihood(values, x2);
    while (hi - lo > kLambdaTolerance) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = yeo_johnson_log_likelihood(values, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = yeo_johnson_log_likelihood(values, x1);
        }
    }
    return 0.5 * (lo + hi);
}

PowerTransform fit_yeo_johnson(const Dataset& d, const std::vector<std::string>& columns)
{
    PowerTransform t;
    t.columns = columns;
    for (const auto& name : columns) {
        try {
            t.lambdas.push_back(fit_yeo_johnson_lambda(d.column(name)));
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " (column " + name + ")");
        }
    }
    return t;
}

Dataset PowerTransform::apply(const Dataset& d) const
{
    Dataset out = d;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const std::size_t c = out.column_index(columns[k]);
        for (std::size_t r = 0; r < out.n_rows(); ++r) {
            out.at(r, c) = yeo_johnson(out.at(r, c), lambdas[k]);
        }
    }
    return out;
}

Dataset PowerTransform::invert(const Dataset& d) const
{
    Dataset out = d;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const std::size_t c = out.column_index(columns[k]);
        for (std::size_t r = 0; r < out.n_rows(); ++r) {
            out.at(r, c) = yeo_johnson_inverse(out.at(r, c), lambdas[k]);
        }
    }
    return out;
}

nlohmann::json to_json(const StandardScaler& s)
{
    return {{"kind", "standard_scale"}, {"columns", s.columns}, {"mean", s.mean}, {"scale", s.scale}};
}

nlohmann::json to_json(const PowerTransform& t)
{
    return {{"kind", "yeo_johnson"}, {"columns", t.columns}, {"lambdas", t.lambdas}};
}

StandardScaler standard_scaler_from_json(const nlohmann::json& j)
{
    try {
        StandardScaler s;
        s.columns = j.at("columns").get<std::vector<std::string>>();
        s.mean = j.at("mean").get<std::vector<double>>();
        s.scale = j.at("scale").get<std::vector<double>>();
        if (s.mean.size() != s.columns.size() || s.scale.size() != s.columns.size()) {
            throw Error(ErrorCode::ConfigInvalid, "scaler arrays differ in length");
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("malformed scaler: ") + e.what());
    }
}

PowerTransform power_transform_from_json(const nlohmann::json& j)
{
    try {
        PowerTransform t;
        t.columns = j.at("columns").get<std::vector<std::string>>();
        t.lambdas = j.at("lambdas").get<std::vector<double>>();
        if (t.lambdas.size() != t.columns.size()) {
            throw Error(ErrorCode::ConfigInvalid, "power transform arrays differ in length");
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("malformed power transform: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

Dataset zscore_filter(const Dataset& d, const std::vector<std::string>& columns, double threshold)
{
    struct Stat {
        std::size_t col;
        double mean;
        double sigma;
    };
    std::vector<Stat> stats;
    for (const auto& name : columns) {
        const std::size_t c = d.column_index(name);
        const Moments m = moments(d.column(c));
        stats.push_back({c, m.mean, std::sqrt(m.m2)});
    }
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
        bool outlier = false;
        for (const auto& s : stats) {
            if (s.sigma > 0.0 && std::abs(d.at(r, s.col) - s.mean) / s.sigma > threshold) {
                outlier = true;
                break;
            }
        }
        if (!outlier) {
            keep.push_back(r);
        }
    }
    return d.select_rows(keep);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double val_fraction,
                                                                            std::uint64_t seed)
{
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "validation fraction must lie strictly between 0 and 1");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t k = n; k > 1; --k) {
        std::swap(order[k - 1], order[rng.below(k)]);
    }
    const auto n_val = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * val_fraction));
    if (n_val == 0 || n_val >= n) {
        throw Error(ErrorCode::EmptySplit, "split of " + std::to_string(n) + " rows leaves an empty side");
    }
    std::vector<std::size_t> train(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> val(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());
    return {std::move(train), std::move(val)};
}

std::vector<double> inverse_frequency_decile_weights(const std::vector<double>& target)
{
    constexpr std::size_t kBins = 10;
    const auto [lo_it, hi_it] = std::minmax_element(target.begin(), target.end());
    const double lo = *lo_it;
    const double width = *hi_it - lo;
    std::vector<std::size_t> bin(target.size(), 0);
    std::vector<std::size_t> occupancy(kBins, 0);
    for (std::size_t k = 0; k < target.size(); ++k) {
        std::size_t b = 0;
        if (width > 0.0) {
            b = std::min(kBins - 1, static_cast<std::size_t>((target[k] - lo) / width * kBins));
        }
        bin[k] = b;
        ++occupancy[b];
    }
    const double n = static_cast<double>(target.size());
    std::vector<double> weights(target.size());
    for (std::size_t k = 0; k < target.size(); ++k) {
        weights[k] = n / (static_cast<double>(kBins) * static_cast<double>(occupancy[bin[k]]));
    }
    return weights;
}

TrainValSplit split_and_weight(const Dataset& d, const std::string& target, double val_fraction,
                               std::uint64_t seed, Weighting weighting)
{
    const std::size_t target_col = d.column_index(target);
    auto [train_idx, val_idx] = split_indices(d.n_rows(), val_fraction, seed);
    Dataset base = d;
    base.clear_weights();
    TrainValSplit split{base.select_rows(train_idx), base.select_rows(val_idx)};
    if (weighting == Weighting::InverseFrequencyDeciles) {
        split.train.set_weights(inverse_frequency_decile_weights(split.train.column(target_col)));
    }
    return split;
}

Weighting weighting_from_string(const std::string& name)
{
    if (name == "none") {
        return Weighting::None;
    }
    if (name == "inverse_frequency_deciles") {
        return Weighting::InverseFrequencyDeciles;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown weighting: " + name);
}

std::string to_string(Weighting w)
{
    return w == Weighting::None ? "none" : "inverse_frequency_deciles";
}

}  // namespace epibench
