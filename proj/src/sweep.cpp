#include "epibench/sweep.hpp"

#include <algorithm>

#include "epibench/error.hpp"
#include "epibench/parallel.hpp"
#include "epibench/rng.hpp"
#include "epibench/version.hpp"

namespace epibench {

std::vector<Factor> published_widget_factors()
{
    return {
        {"infectiousness_pct", {20, 40, 60, 80, 100}},
        {"worm_duration_ticks", {10, 30, 50, 70, 90}},
        {"exposure_duration_ticks", {40, 45, 50, 55, 60}},
        {"n_nodes", {200, 400, 600, 800, 1000}},
        {"chance_recover_pct", {100, 80, 60, 40, 20}},
        {"chance_vaccinate_pct", {90, 70, 50, 30, 10}},
    };
}

std::string to_string(DesignKind kind)
{
    return kind == DesignKind::Factorial ? "factorial" : "aligned";
}

void require_valid(const ExperimentDesign& design)
{
    const bool widget = std::holds_alternative<WidgetConfig>(design.base_config);
    const auto& allowed = widget ? widget_factor_names() : rate_factor_names();
    std::vector<std::string> seen;
    for (const auto& f : design.factors) {
        if (std::find(allowed.begin(), allowed.end(), f.name) == allowed.end()) {
            throw Error(ErrorCode::ConfigInvalid, "factor '" + f.name + "' is not a " +
                                                      (widget ? "widget" : "rate") + "-mode config field");
        }
        if (std::find(seen.begin(), seen.end(), f.name) != seen.end()) {
            throw Error(ErrorCode::ConfigInvalid, "factor '" + f.name + "' listed twice");
        }
        seen.push_back(f.name);
        if (f.levels.empty()) {
            throw Error(ErrorCode::ConfigInvalid, "factor '" + f.name + "' has no levels");
        }
    }
    if (design.kind == DesignKind::Aligned) {
        for (const auto& f : design.factors) {
            if (f.levels.size() != design.factors.front().levels.size()) {
                throw Error(ErrorCode::AlignmentMismatch,
                            "aligned design: factor '" + f.name + "' has " + std::to_string(f.levels.size()) +
                                " levels, '" + design.factors.front().name + "' has " +
                                std::to_string(design.factors.front().levels.size()));
            }
        }
    }
    if (design.ticks < 1) {
        throw Error(ErrorCode::ConfigInvalid, "ticks must be at least 1");
    }
    if (design.replicates < 1) {
        throw Error(ErrorCode::ConfigInvalid, "replicates must be at least 1");
    }
}

std::vector<ConfigPoint> enumerate(const ExperimentDesign& design)
{
    require_valid(design);
    std::vector<std::vector<double>> tuples;
    if (design.factors.empty()) {
        tuples.emplace_back();
    } else if (design.kind == DesignKind::Aligned) {
        for (std::size_t k = 0; k < design.factors.front().levels.size(); ++k) {
            std::vector<double> tuple;
            for (const auto& f : design.factors) {
                tuple.push_back(f.levels[k]);
            }
            tuples.push_back(std::move(tuple));
        }
    } else {
        // Mixed-radix decode of the flat index; the last factor turns fastest.
        std::size_t total = 1;
        for (const auto& f : design.factors) {
            total *= f.levels.size();
        }
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::vector<double> tuple(design.factors.size());
            std::size_t rest = flat;
            for (std::size_t f = design.factors.size(); f-- > 0;) {
                const auto& levels = design.factors[f].levels;
                tuple[f] = levels[rest % levels.size()];
                rest /= levels.size();
            }
            tuples.push_back(std::move(tuple));
        }
    }

    std::vector<ConfigPoint> points;
    points.reserve(tuples.size());
    for (std::size_t k = 0; k < tuples.size(); ++k) {
        ConfigPoint point{k, tuples[k], design.base_config};
        for (std::size_t f = 0; f < design.factors.size(); ++f) {
            set_factor(point.config, design.factors[f].name, tuples[k][f]);
        }
        try {
            std::visit([](const auto& c) { require_valid(c); }, point.config);
        } catch (const Error& e) {
            throw Error(ErrorCode::ConfigInvalid, "design point " + std::to_string(k) + ": " + e.what());
        }
        points.push_back(std::move(point));
    }
    return points;
}

std::vector<RunSpec> expand_runs(const ExperimentDesign& design)
{
    const auto points = enumerate(design);
    std::vector<RunSpec> runs;
    runs.reserve(points.size() * design.replicates);
    for (const auto& point : points) {
        for (std::size_t rep = 0; rep < design.replicates; ++rep) {
            RunSpec run;
            run.run_id = point.run_id * design.replicates + rep;
            run.point = point.run_id;
            run.replicate = rep;
            run.factor_values = point.factor_values;
            run.config = point.config;
            set_seed(run.config, derive_seed(design.master_seed, run.run_id));
            runs.push_back(std::move(run));
        }
    }
    return runs;
}

std::vector<std::string> sweep_columns(const ExperimentDesign& design)
{
    std::vector<std::string> columns = {"run_id", "tick"};
    for (const auto& f : design.factors) {
        columns.push_back(f.name);
    }
    for (const char* c : {"susceptible", "exposed", "infected", "recovered", "vaccinated", "dead"}) {
        columns.emplace_back(c);
    }
    return columns;
}

Dataset run_sweep(const ExperimentDesign& design, std::size_t parallelism)
{
    if (parallelism < 1) {
        throw Error(ErrorCode::ConfigInvalid, "parallelism must be at least 1");
    }
    const auto runs = expand_runs(design);
    auto annotate = [](const RunSpec& run, const Error& e) {
        return Error(ErrorCode::RunFailed, "run_id=" + std::to_string(run.run_id) + " (" +
                                               std::string(to_string(e.code())) + "): " + e.what());
    };
    for (const auto& run : runs) {
        try {
            std::visit([](const auto& c) { require_valid(c); }, run.config);
        } catch (const Error& e) {
            throw annotate(run, e);
        }
    }

    std::vector<AbmTrace> traces(runs.size());
    parallel_for(runs.size(), parallelism, [&](std::size_t k) {
        try {
            traces[k] = run(runs[k].config, design.ticks);
        } catch (const Error& e) {
            throw annotate(runs[k], e);
        }
    });

    Dataset out(sweep_columns(design));
    std::vector<double> row;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        for (const auto& counts : traces[k].rows) {
            row.clear();
            row.push_back(static_cast<double>(runs[k].run_id));
            row.push_back(static_cast<double>(counts.tick));
            row.insert(row.end(), runs[k].factor_values.begin(), runs[k].factor_values.end());
            for (long c : {counts.susceptible, counts.exposed, counts.infected, counts.recovered,
                           counts.vaccinated, counts.dead}) {
                row.push_back(static_cast<double>(c));
            }
            out.add_row(row);
        }
    }
    return out;
}

ExperimentDesign design_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigInvalid, "design must be a JSON object");
    }
    static const char* const kKeys[] = {"mode", "design", "factors", "ticks", "replicates", "master_seed",
                                        "base_config"};
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; })) {
            throw Error(ErrorCode::ConfigInvalid, "unknown design key: " + key);
        }
    }
    try {
        ExperimentDesign d;
        const auto mode = j.value("mode", std::string("widget"));
        const auto base = j.value("base_config", nlohmann::json::object());
        if (mode == "widget") {
            d.base_config = widget_config_from_json(base);
        } else if (mode == "rate") {
            d.base_config = rate_config_from_json(base);
        } else {
            throw Error(ErrorCode::ConfigInvalid, "mode must be widget or rate, got " + mode);
        }
        const auto kind = j.value("design", std::string("aligned"));
        if (kind == "aligned") {
            d.kind = DesignKind::Aligned;
        } else if (kind == "factorial") {
            d.kind = DesignKind::Factorial;
        } else {
            throw Error(ErrorCode::ConfigInvalid, "design must be aligned or factorial, got " + kind);
        }
        for (const auto& f : j.value("factors", nlohmann::json::array())) {
            d.factors.push_back({f.at("name").get<std::string>(), f.at("levels").get<std::vector<double>>()});
        }
        const auto ticks = j.value("ticks", static_cast<long long>(kDefaultTicks));
        const auto replicates = j.value("replicates", 1LL);
        if (ticks < 1 || replicates < 1) {
            throw Error(ErrorCode::ConfigInvalid, "ticks and replicates must be at least 1");
        }
        d.ticks = static_cast<std::size_t>(ticks);
        d.replicates = static_cast<std::size_t>(replicates);
        d.master_seed = j.value("master_seed", std::uint64_t{0});
        require_valid(d);
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("malformed design: ") + e.what());
    }
}

nlohmann::json to_json(const ExperimentDesign& d)
{
    nlohmann::json j;
    const bool widget = std::holds_alternative<WidgetConfig>(d.base_config);
    j["mode"] = widget ? "widget" : "rate";
    j["design"] = to_string(d.kind);
    auto& factors = j["factors"] = nlohmann::json::array();
    for (const auto& f : d.factors) {
        factors.push_back({{"name", f.name}, {"levels", f.levels}});
    }
    j["ticks"] = d.ticks;
    j["replicates"] = d.replicates;
    j["master_seed"] = d.master_seed;
    j["base_config"] = std::visit([](const auto& c) { return to_json(c); }, d.base_config);
    return j;
}

nlohmann::json sweep_manifest(const ExperimentDesign& design)
{
    nlohmann::json m;
    m["software"] = "epibench";
    m["version"] = kVersion;
    m["design"] = to_json(design);
    m["seed_derivation"] = "seed = splitmix64(splitmix64(master_seed) ^ splitmix64(run_id + 0x632be59bd9b4e019))";
    auto& runs = m["runs"] = nlohmann::json::array();
    for (const auto& run : expand_runs(design)) {
        nlohmann::json factors = nlohmann::json::object();
        for (std::size_t f = 0; f < design.factors.size(); ++f) {
            factors[design.factors[f].name] = run.factor_values[f];
        }
        runs.push_back({{"run_id", run.run_id},
                        {"point", run.point},
                        {"replicate", run.replicate},
                        {"seed", std::visit([](const auto& c) { return c.seed; }, run.config)},
                        {"factors", factors}});
    }
    return m;
}

}  // namespace epibench
