#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epibench/abm_engine.hpp"
#include "epibench/dataset.hpp"

namespace epibench {

enum class DesignKind {
    Factorial,  ///< Cartesian product, first factor varies slowest
    Aligned,    ///< i-th level of every factor together
};

struct Factor {
    std::string name;
    std::vector<double> levels;
};

inline constexpr std::size_t kDefaultTicks = 100;

struct ExperimentDesign {
    DesignKind kind = DesignKind::Aligned;
    std::vector<Factor> factors;
    std::size_t ticks = kDefaultTicks;
    std::size_t replicates = 1;
    AgentConfig base_config = WidgetConfig{};
    std::uint64_t master_seed = 0;
};

/// One point of the design space. `run_id` is its position in enumeration order.
struct ConfigPoint {
    std::size_t run_id = 0;
    std::vector<double> factor_values;
    AgentConfig config;
};

/// One executable run: a design point, a replicate index and its seed.
/// run_id = point * replicates + replicate; seed = derive_seed(master, run_id).
struct RunSpec {
    std::size_t run_id = 0;
    std::size_t point = 0;
    std::size_t replicate = 0;
    std::vector<double> factor_values;
    AgentConfig config;
};

/// The six widget factors at the five levels each used for the first model's
/// NetLogo datasets.
std::vector<Factor> published_widget_factors();

/// Checks factor names against the mode, level lists, ticks and replicates.
void require_valid(const ExperimentDesign& design);

std::vector<ConfigPoint> enumerate(const ExperimentDesign& design);
std::vector<RunSpec> expand_runs(const ExperimentDesign& design);

/// Column layout of the sweep dataset:
/// run_id,tick,<factors in design order>,susceptible,exposed,infected,recovered,vaccinated,dead.
std::vector<std::string> sweep_columns(const ExperimentDesign& design);

/// Runs every replicate of every design point on `parallelism` workers and
/// concatenates per-tick rows ordered by (run_id, tick). Identical for any
/// parallelism. A failing run aborts the sweep with RunFailed naming it.
Dataset run_sweep(const ExperimentDesign& design, std::size_t parallelism = 1);

ExperimentDesign design_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentDesign& design);

/// Sidecar record of the design, per-run seeds and software version.
nlohmann::json sweep_manifest(const ExperimentDesign& design);

std::string to_string(DesignKind kind);

}  // namespace epibench
