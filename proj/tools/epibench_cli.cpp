#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "epibench/abm_engine.hpp"
#include "epibench/benchmark.hpp"
#include "epibench/dataprep.hpp"
#include "epibench/error.hpp"
#include "epibench/ode_engine.hpp"
#include "epibench/report.hpp"
#include "epibench/sweep.hpp"
#include "epibench/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace epibench;

namespace {

// Exit codes. Every failure also prints one `error: code=... exit=... message=...` line.
constexpr int kExitRuntime = 1;
constexpr int kExitUnknownFlag = 2;
constexpr int kExitMissingFile = 3;
constexpr int kExitSchemaMismatch = 4;
constexpr int kExitUsage = 5;

int fail(std::string_view code, int exit_code, std::string message)
{
    std::replace(message.begin(), message.end(), '\n', ' ');
    std::cerr << "error: code=" << code << " exit=" << exit_code << " message=" << json(message).dump() << '\n';
    return exit_code;
}

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::MissingFile:
        return kExitMissingFile;
    case ErrorCode::SchemaMismatch:
    case ErrorCode::UnknownColumn:
        return kExitSchemaMismatch;
    default:
        return kExitRuntime;
    }
}

json read_json_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::MissingFile, "cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
    }
    out << text;
}

/// `out.csv` -> `out.<suffix>`.
fs::path sidecar(const fs::path& out, const std::string& suffix)
{
    fs::path p = out;
    p.replace_extension(suffix);
    return p;
}

std::string csv_of(const auto& table)
{
    std::ostringstream s;
    write_csv(s, table);
    return s.str();
}

// ---------------------------------------------------------------------------

struct OdeArgs {
    std::string config;
    std::string out;
};

void run_ode(const OdeArgs& a)
{
    const OdeRun run = ode_run_from_json(read_json_file(a.config));
    write_text(a.out, csv_of(integrate_rk4(run)));
}

struct AbmArgs {
    std::string config;
    std::string mode = "widget";
    std::size_t ticks = kDefaultTicks;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void run_abm(const AbmArgs& a)
{
    const json j = a.config.empty() ? json::object() : read_json_file(a.config);
    AgentConfig config;
    if (a.mode == "widget") {
        config = widget_config_from_json(j);
    } else {
        config = rate_config_from_json(j);
    }
    if (a.seed) {
        set_seed(config, *a.seed);
    }
    const auto trace = std::visit([&](const auto& c) { return run(c, a.ticks); }, config);
    write_text(a.out, csv_of(trace));
}

struct SweepArgs {
    std::string design;
    std::optional<std::size_t> ticks;
    std::optional<std::uint64_t> seed;
    std::size_t parallel = 1;
    std::string out;
};

void run_sweep_command(const SweepArgs& a)
{
    ExperimentDesign design = design_from_json(read_json_file(a.design));
    if (a.ticks) {
        design.ticks = *a.ticks;
    }
    if (a.seed) {
        design.master_seed = *a.seed;
    }
    require_valid(design);
    const auto data = run_sweep(design, a.parallel);
    write_text(a.out, csv_of(data));
    write_text(sidecar(a.out, ".manifest.json"), sweep_manifest(design).dump(2) + "\n");
}

struct PrepArgs {
    std::vector<std::string> in;
    std::string config;
    std::string out;
};

/// Prep config keys, all optional:
///   renames: {old: new}            (default: sick->infected, immune->recovered)
///   ops: [clean op, ...]           applied in order after merging
///   drop_redundant: bool           drop exact affine copies found by profiling
///   identifiers: [name, ...]       ignored by drop_redundant (default ["run_id"])
///   corr_threshold, skew_threshold profiling alert levels
///   yeo_johnson: [column, ...]     fit and apply a power transform
///   zscore: {columns: [...], threshold: 3}
///   transforms_from: path          apply a previously fitted transforms file instead of fitting
void run_prep(const PrepArgs& a)
{
    const json cfg = a.config.empty() ? json::object() : read_json_file(a.config);
    static const char* const kKeys[] = {"renames", "ops", "drop_redundant", "identifiers", "corr_threshold",
                                        "skew_threshold", "yeo_johnson", "zscore", "transforms_from"};
    for (const auto& [key, value] : cfg.items()) {
        if (std::none_of(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; })) {
            throw Error(ErrorCode::ConfigInvalid, "unknown prep key: " + key);
        }
    }

    std::vector<Dataset> sheets;
    for (const auto& path : a.in) {
        sheets.push_back(read_csv_file(path));
    }
    std::map<std::string, std::string> renames = netlogo_renames();
    if (cfg.contains("renames")) {
        renames = cfg.at("renames").get<std::map<std::string, std::string>>();
    }
    Dataset data = merge_and_rename(sheets, renames);

    std::vector<CleanOp> ops;
    for (const auto& op : cfg.value("ops", json::array())) {
        ops.push_back(clean_op_from_json(op));
    }
    data = clean(data, ops);

    const auto report = profile(data, cfg.value("corr_threshold", kDefaultCorrThreshold),
                                cfg.value("skew_threshold", kDefaultSkewThreshold));
    json profile_json = to_json(report);
    if (cfg.value("drop_redundant", false)) {
        const auto identifiers = cfg.value("identifiers", std::vector<std::string>{"run_id"});
        const auto redundant = redundant_columns(report, identifiers);
        profile_json["dropped_redundant"] = redundant;
        data = clean(data, {DropColumns{redundant}});
    }

    json transforms = json::object();
    if (cfg.contains("transforms_from")) {
        transforms = read_json_file(cfg.at("transforms_from").get<std::string>());
        if (transforms.contains("yeo_johnson")) {
            data = power_transform_from_json(transforms.at("yeo_johnson")).apply(data);
        }
    } else if (cfg.contains("yeo_johnson")) {
        const auto t = fit_yeo_johnson(data, cfg.at("yeo_johnson").get<std::vector<std::string>>());
        transforms["yeo_johnson"] = to_json(t);
        data = t.apply(data);
    }
    if (cfg.contains("zscore")) {
        const auto& z = cfg.at("zscore");
        data = zscore_filter(data, z.at("columns").get<std::vector<std::string>>(),
                             z.value("threshold", kDefaultZThreshold));
    }

    write_text(a.out, csv_of(data));
    write_text(sidecar(a.out, ".profile.json"), profile_json.dump(2) + "\n");
    write_text(sidecar(a.out, ".transforms.json"), transforms.dump(2) + "\n");
}

struct BenchArgs {
    std::string in;
    std::string target;
    std::string config;
    std::vector<std::string> models;
    bool grid = false;
    double split = 0.2;
    std::uint64_t seed = 0;
    std::size_t parallel = 1;
    std::string out;
};

/// Bench config keys, all optional: weighting ("none" |
/// "inverse_frequency_deciles"), identifiers, folds, scale_features.
void run_bench(const BenchArgs& a)
{
    const json cfg = a.config.empty() ? json::object() : read_json_file(a.config);
    static const char* const kKeys[] = {"weighting", "identifiers", "folds", "scale_features"};
    for (const auto& [key, value] : cfg.items()) {
        if (std::none_of(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; })) {
            throw Error(ErrorCode::ConfigInvalid, "unknown bench key: " + key);
        }
    }
    BenchConfig config;
    config.val_fraction = a.split;
    config.seed = a.seed;
    config.parallelism = a.parallel;
    config.weighting = weighting_from_string(cfg.value("weighting", std::string("none")));
    config.identifiers = cfg.value("identifiers", config.identifiers);
    config.folds = cfg.value("folds", config.folds);
    config.scale_features = cfg.value("scale_features", config.scale_features);

    auto roster = paper_roster(a.grid);
    if (!a.models.empty()) {
        std::vector<RosterEntry> chosen;
        for (const auto& name : a.models) {
            const auto it = std::find_if(roster.begin(), roster.end(),
                                         [&](const RosterEntry& e) { return e.algorithm == name; });
            if (it == roster.end()) {
                std::string known;
                for (const auto& e : roster) {
                    known += (known.empty() ? "" : ",") + e.algorithm;
                }
                throw Error(ErrorCode::ConfigInvalid, "unknown model " + name + " (known: " + known + ")");
            }
            chosen.push_back(*it);
        }
        roster = chosen;
    }

    const Dataset data = read_csv_file(a.in);
    const auto result = benchmark(data, a.target, roster, config);
    write_text(a.out, to_json(result).dump(2) + "\n");
    write_text(sidecar(a.out, ".timing.json"), timing_json(result).dump(2) + "\n");
}

struct ReportArgs {
    std::string in;
    std::string format = "md";
    std::string out;
};

void run_report(const ReportArgs& a)
{
    const json report = read_json_file(a.in);
    std::optional<json> timing;
    const fs::path timing_path = sidecar(a.in, ".timing.json");
    if (fs::exists(timing_path)) {
        timing = read_json_file(timing_path);
    }
    const auto reports = reports_from_json(report, timing);
    const ReportFormat format = report_format_from_string(a.format);
    fs::path prefix = a.out;
    if ((format == ReportFormat::Markdown && prefix.extension() == ".md") ||
        (format == ReportFormat::Csv && prefix.extension() == ".csv") ||
        (format == ReportFormat::Svg && prefix.extension() == ".svg")) {
        prefix.replace_extension();
    }
    for (const auto& path : render_report(reports, format, prefix)) {
        std::cout << path.string() << '\n';
    }
}

/// First `--name` token that the chosen subcommand does not define.
std::optional<std::string> unknown_flag(CLI::App& app, int argc, char** argv)
{
    if (argc < 2) {
        return std::nullopt;
    }
    CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(argv[1]);
    } catch (const CLI::OptionNotFound&) {
        return std::nullopt;
    }
    for (int k = 2; k < argc; ++k) {
        std::string token = argv[k];
        if (token.rfind("--", 0) != 0 || token == "--") {
            continue;
        }
        token = token.substr(0, token.find('='));
        if (sub->get_option_no_throw(token) == nullptr) {
            return token;
        }
    }
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Epidemic simulation, sweep, preparation and regression benchmark pipeline", "epibench"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    OdeArgs ode;
    auto* ode_cmd = app.add_subcommand("ode", "Integrate the SEIRV equations with RK4 and write the trace CSV");
    ode_cmd->add_option("--config", ode.config, "ODE run JSON: params, init, dt, steps")->required()->check(
        CLI::ExistingFile);
    ode_cmd->add_option("--out", ode.out, "Trace CSV path")->required();

    AbmArgs abm;
    auto* abm_cmd = app.add_subcommand("abm", "Run one agent-based simulation and write the per-tick CSV");
    abm_cmd->add_option("--config", abm.config, "Agent config JSON (defaults when omitted)")->check(
        CLI::ExistingFile);
    abm_cmd->add_option("--mode", abm.mode, "Agent rules")->check(CLI::IsMember({"widget", "rate"}))
        ->capture_default_str();
    abm_cmd->add_option("--ticks", abm.ticks, "Ticks to simulate")->check(CLI::PositiveNumber)
        ->capture_default_str();
    abm_cmd->add_option("--seed", abm.seed, "Overrides the config seed");
    abm_cmd->add_option("--out", abm.out, "Trace CSV path")->required();

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment design and write the dataset CSV plus manifest");
    sweep_cmd->add_option("--design", sweep.design, "Experiment design JSON")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--ticks", sweep.ticks, "Overrides the design tick count")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", sweep.seed, "Overrides the design master seed");
    sweep_cmd->add_option("--parallel", sweep.parallel, "Worker threads")->check(CLI::PositiveNumber)
        ->capture_default_str();
    sweep_cmd->add_option("--out", sweep.out, "Dataset CSV path; the manifest goes next to it")->required();

    PrepArgs prep;
    auto* prep_cmd = app.add_subcommand("prep", "Merge, clean, profile and transform sweep datasets");
    prep_cmd->add_option("--in", prep.in, "Input CSV; repeat to merge sheets in order")->required()->check(
        CLI::ExistingFile);
    prep_cmd->add_option("--config", prep.config, "Prep config JSON")->check(CLI::ExistingFile);
    prep_cmd->add_option("--out", prep.out, "Prepared CSV; profile and transforms JSON go next to it")->required();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Fit and score the regression roster on a dataset");
    bench_cmd->add_option("--in", bench.in, "Dataset CSV")->required()->check(CLI::ExistingFile);
    bench_cmd->add_option("--target", bench.target, "Target column, e.g. infected or recovered")->required();
    bench_cmd->add_option("--config", bench.config, "Bench config JSON")->check(CLI::ExistingFile);
    bench_cmd->add_option("--models", bench.models, "Comma-separated roster subset (LiR,LaR,RiR,ENR,KNN,DT,RF,HGB,XGBoost)")
        ->delimiter(',');
    bench_cmd->add_flag("--grid", bench.grid, "Grid-search LaR, RiR, ENR, KNN and HGB on the training split");
    bench_cmd->add_option("--split", bench.split, "Validation fraction")->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed, "Split, fold and forest seed")->capture_default_str();
    bench_cmd->add_option("--parallel", bench.parallel, "Worker threads")->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "Report JSON; timings go to <stem>.timing.json")->required();

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "Render a bench report as a table or bar charts");
    report_cmd->add_option("--in", report.in, "Report JSON from bench")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("--format", report.format, "Output format")->check(CLI::IsMember({"md", "csv", "svg"}))
        ->capture_default_str();
    report_cmd->add_option("--out", report.out, "Output path prefix")->required();

    if (const auto flag = unknown_flag(app, argc, argv)) {
        return fail("unknown_flag", kExitUnknownFlag, "unknown flag " + *flag + " for " + argv[1]);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ExtrasError& e) {
        return fail("unknown_flag", kExitUnknownFlag, e.what());
    } catch (const CLI::ValidationError& e) {
        const std::string what = e.what();
        if (what.find("not exist") != std::string::npos || what.find("File does not") != std::string::npos) {
            return fail("missing_file", kExitMissingFile, what);
        }
        return fail("usage", kExitUsage, what);
    } catch (const CLI::ParseError& e) {
        return fail("usage", kExitUsage, e.what());
    }

    try {
        if (*ode_cmd) {
            run_ode(ode);
        } else if (*abm_cmd) {
            run_abm(abm);
        } else if (*sweep_cmd) {
            run_sweep_command(sweep);
        } else if (*prep_cmd) {
            run_prep(prep);
        } else if (*bench_cmd) {
            run_bench(bench);
        } else if (*report_cmd) {
            run_report(report);
        }
    } catch (const Error& e) {
        return fail(to_string(e.code()), exit_code_for(e.code()), e.what());
    } catch (const json::exception& e) {
        return fail(to_string(ErrorCode::ConfigInvalid), kExitRuntime, e.what());
    } catch (const std::exception& e) {
        return fail("internal", kExitRuntime, e.what());
    }
    return 0;
}
