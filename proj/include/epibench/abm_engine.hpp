#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "epibench/core_model.hpp"
#include "epibench/rng.hpp"
#include "epibench/spatial_index.hpp"

namespace epibench {

/// Inclusive patch-coordinate extent of the world.
struct GridBounds {
    int x_min = -13;
    int x_max = 13;
    int y_min = -12;
    int y_max = 12;

    bool operator==(const GridBounds&) const = default;
};

/// First (widget-driven) agent model: transmission and progression are set
/// by percentage and duration controls, rates are implied.
struct WidgetConfig {
    double infectiousness_pct = 20.0;
    int worm_duration_ticks = 10;
    int exposure_duration_ticks = 40;
    int n_nodes = 200;
    double chance_recover_pct = 100.0;
    double chance_vaccinate_pct = 90.0;
    GridBounds bounds;
    double transmission_radius = 3.0;
    int initial_infected = 10;
    bool mobility = false;
    std::optional<int> immunity_duration_ticks;  ///< R -> S waning; disabled when empty
    std::uint64_t seed = 0;

    bool operator==(const WidgetConfig&) const = default;
};

/// Second agent model: every flow of the SEIRV equations is an explicit rate.
struct RateConfig {
    EpidemicParams params;
    int n_nodes = 200;
    int initial_infected = 10;
    GridBounds bounds;
    std::uint64_t seed = 0;

    bool operator==(const RateConfig&) const = default;
};

using AgentConfig = std::variant<WidgetConfig, RateConfig>;

enum class Compartment : std::uint8_t { Susceptible, Exposed, Infected, Recovered, Vaccinated, Dead };

struct NodeAgent {
    std::size_t id = 0;
    Point position;
    Compartment compartment = Compartment::Susceptible;
    int timer = 0;            ///< ticks left in the current compartment (widget mode)
    long entered_tick = 0;    ///< tick at which the current compartment was entered
};

struct TickCounts {
    long tick = 0;
    long susceptible = 0;
    long exposed = 0;
    long infected = 0;
    long recovered = 0;
    long vaccinated = 0;
    long dead = 0;      ///< cumulative
    long recruits = 0;  ///< cumulative

    long live() const { return susceptible + exposed + infected + recovered + vaccinated; }

    bool operator==(const TickCounts&) const = default;
};

struct World {
    AgentConfig config;
    std::vector<NodeAgent> agents;
    long tick = 0;
    long initial_nodes = 0;
    long cumulative_recruits = 0;
    Rng rng{0};
};

void require_valid(const WidgetConfig& config);
void require_valid(const RateConfig& config);

/// Places n_nodes agents uniformly in the bounds and seeds the infection.
/// The first `initial_infected` agents start infected. In widget mode the rest
/// are vaccinated with probability chance_vaccinate_pct/100; in rate mode they
/// start susceptible.
World setup(const WidgetConfig& config);
World setup(const RateConfig& config);
World setup(const AgentConfig& config);

/// World with caller-chosen agents (ids are reassigned to positions in the
/// vector). Used for hand-built scenarios.
World make_world(const AgentConfig& config, std::vector<NodeAgent> agents);

/// One widget-mode tick: movement, infection, progression, resolution,
/// waning, in that order.
void step(World& world);

/// One rate-mode tick: competing-hazard exits for every live agent, then
/// Poisson(lambda) recruits.
void step_rate(World& world);

/// Dispatches on the world's mode.
void advance(World& world);

TickCounts counts(const World& world);

struct AbmTrace {
    std::vector<TickCounts> rows;  ///< one per tick, ticks 1..n
};

/// Setup plus `ticks` steps; deterministic in (config, seed).
AbmTrace run(const AgentConfig& config, std::size_t ticks);

/// CSV with header tick,susceptible,exposed,infected,recovered,vaccinated,dead.
void write_csv(std::ostream& out, const AbmTrace& trace);

WidgetConfig widget_config_from_json(const nlohmann::json& j);
RateConfig rate_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WidgetConfig& config);
nlohmann::json to_json(const RateConfig& config);

/// Names accepted by set_factor for each mode.
const std::vector<std::string>& widget_factor_names();
const std::vector<std::string>& rate_factor_names();

/// Assigns a scalar config field by name; throws ConfigInvalid on an unknown
/// name or a non-integral value for an integer field.
void set_factor(WidgetConfig& config, const std::string& name, double value);
void set_factor(RateConfig& config, const std::string& name, double value);
void set_factor(AgentConfig& config, const std::string& name, double value);

void set_seed(AgentConfig& config, std::uint64_t seed);

}  // namespace epibench
