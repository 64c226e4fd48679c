#include "epibench/abm_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "epibench/error.hpp"

namespace epibench {

namespace {

void require_bounds(const GridBounds& b)
{
    if (!(b.x_min < b.x_max) || !(b.y_min < b.y_max)) {
        throw Error(ErrorCode::ConfigInvalid, "bounds: require x_min < x_max and y_min < y_max");
    }
}

void require_pct(double value, const char* name)
{
    if (!(value >= 0.0 && value <= 100.0)) {
        throw Error(ErrorCode::ConfigInvalid, std::string(name) + " must be within [0, 100]");
    }
}

void require_at_least(long value, long minimum, const char* name)
{
    if (value < minimum) {
        throw Error(ErrorCode::ConfigInvalid,
                    std::string(name) + " must be at least " + std::to_string(minimum));
    }
}

Point random_position(Rng& rng, const GridBounds& b)
{
    const double x = rng.uniform(b.x_min, b.x_max);
    const double y = rng.uniform(b.y_min, b.y_max);
    return {x, y};
}

bool is_live(const NodeAgent& a) { return a.compartment != Compartment::Dead; }

void enter(NodeAgent& agent, Compartment c, int timer, long tick)
{
    agent.compartment = c;
    agent.timer = timer;
    agent.entered_tick = tick;
}

double reflect(double value, double lo, double hi)
{
    if (value < lo) {
        value = 2.0 * lo - value;
    } else if (value > hi) {
        value = 2.0 * hi - value;
    }
    return std::clamp(value, lo, hi);
}

std::vector<NodeAgent> place_agents(Rng& rng, int n_nodes, const GridBounds& bounds)
{
    std::vector<NodeAgent> agents(static_cast<std::size_t>(n_nodes));
    for (std::size_t idx = 0; idx < agents.size(); ++idx) {
        agents[idx].id = idx;
        agents[idx].position = random_position(rng, bounds);
    }
    return agents;
}

}  // namespace

void require_valid(const WidgetConfig& c)
{
    require_pct(c.infectiousness_pct, "infectiousness_pct");
    require_pct(c.chance_recover_pct, "chance_recover_pct");
    require_pct(c.chance_vaccinate_pct, "chance_vaccinate_pct");
    require_at_least(c.worm_duration_ticks, 1, "worm_duration_ticks");
    require_at_least(c.exposure_duration_ticks, 1, "exposure_duration_ticks");
    require_at_least(c.n_nodes, 1, "n_nodes");
    require_at_least(c.initial_infected, 1, "initial_infected");
    if (c.initial_infected > c.n_nodes) {
        throw Error(ErrorCode::ConfigInvalid, "initial_infected must not exceed n_nodes");
    }
    if (!(c.transmission_radius > 0.0) || !std::isfinite(c.transmission_radius)) {
        throw Error(ErrorCode::ConfigInvalid, "transmission_radius must be positive and finite");
    }
    if (c.immunity_duration_ticks) {
        require_at_least(*c.immunity_duration_ticks, 1, "immunity_duration_ticks");
    }
    require_bounds(c.bounds);
}

void require_valid(const RateConfig& c)
{
    require_valid(c.params);
    require_at_least(c.n_nodes, 1, "n_nodes");
    require_at_least(c.initial_infected, 1, "initial_infected");
    if (c.initial_infected > c.n_nodes) {
        throw Error(ErrorCode::ConfigInvalid, "initial_infected must not exceed n_nodes");
    }
    require_bounds(c.bounds);
}

World setup(const WidgetConfig& config)
{
    require_valid(config);
    World world;
    world.config = config;
    world.rng = Rng(config.seed);
    world.agents = place_agents(world.rng, config.n_nodes, config.bounds);
    const double p_vaccinate = config.chance_vaccinate_pct / 100.0;
    for (auto& agent : world.agents) {
        if (agent.id < static_cast<std::size_t>(config.initial_infected)) {
            enter(agent, Compartment::Infected, config.worm_duration_ticks, 0);
        } else if (world.rng.bernoulli(p_vaccinate)) {
            enter(agent, Compartment::Vaccinated, 0, 0);
        } else {
            enter(agent, Compartment::Susceptible, 0, 0);
        }
    }
    world.initial_nodes = config.n_nodes;
    return world;
}

World setup(const RateConfig& config)
{
    require_valid(config);
    World world;
    world.config = config;
    world.rng = Rng(config.seed);
    world.agents = place_agents(world.rng, config.n_nodes, config.bounds);
    for (auto& agent : world.agents) {
        const bool infected = agent.id < static_cast<std::size_t>(config.initial_infected);
        enter(agent, infected ? Compartment::Infected : Compartment::Susceptible, 0, 0);
    }
    world.initial_nodes = config.n_nodes;
    return world;
}

World setup(const AgentConfig& config)
{
    return std::visit([](const auto& c) { return setup(c); }, config);
}

World make_world(const AgentConfig& config, std::vector<NodeAgent> agents)
{
    std::visit([](const auto& c) { require_valid(c); }, config);
    const auto seed = std::visit([](const auto& c) { return c.seed; }, config);
    World world;
    world.config = config;
    world.rng = Rng(seed);
    for (std::size_t idx = 0; idx < agents.size(); ++idx) {
        agents[idx].id = idx;
    }
    world.agents = std::move(agents);
    world.initial_nodes = static_cast<long>(world.agents.size());
    return world;
}

void step(World& world)
{
    const auto* config_ptr = std::get_if<WidgetConfig>(&world.config);
    if (config_ptr == nullptr) {
        throw Error(ErrorCode::ConfigInvalid, "step requires a widget-mode world");
    }
    const WidgetConfig& config = *config_ptr;
    auto& rng = world.rng;
    const long now = ++world.tick;

    if (config.mobility) {
        const auto& b = config.bounds;
        for (auto& agent : world.agents) {
            if (!is_live(agent)) {
                continue;
            }
            const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
            agent.position.x = reflect(agent.position.x + std::cos(heading), b.x_min, b.x_max);
            agent.position.y = reflect(agent.position.y + std::sin(heading), b.y_min, b.y_max);
        }
    }

    // Infection: one independent trial per infected neighbor.
    std::vector<Point> infected_positions;
    for (const auto& agent : world.agents) {
        if (agent.compartment == Compartment::Infected) {
            infected_positions.push_back(agent.position);
        }
    }
    if (!infected_positions.empty()) {
        const SpatialGrid grid(infected_positions, config.transmission_radius);
        const double p_transmit = config.infectiousness_pct / 100.0;
        for (auto& agent : world.agents) {
            if (agent.compartment != Compartment::Susceptible) {
                continue;
            }
            const auto contacts = grid.query(agent.position).size();
            for (std::size_t trial = 0; trial < contacts; ++trial) {
                if (rng.bernoulli(p_transmit)) {
                    enter(agent, Compartment::Exposed, config.exposure_duration_ticks, now);
                    break;
                }
            }
        }
    }

    // Progression, resolution and waning only touch agents that entered
    // their compartment on an earlier tick.
    for (auto& agent : world.agents) {
        if (agent.compartment == Compartment::Exposed && agent.entered_tick < now && --agent.timer <= 0) {
            enter(agent, Compartment::Infected, config.worm_duration_ticks, now);
        }
    }

    const double p_recover = config.chance_recover_pct / 100.0;
    const int immunity = config.immunity_duration_ticks.value_or(0);
    for (auto& agent : world.agents) {
        if (agent.compartment == Compartment::Infected && agent.entered_tick < now && --agent.timer <= 0) {
            if (rng.bernoulli(p_recover)) {
                enter(agent, Compartment::Recovered, immunity, now);
            } else {
                enter(agent, Compartment::Dead, 0, now);
            }
        }
    }

    if (config.immunity_duration_ticks) {
        for (auto& agent : world.agents) {
            if (agent.compartment == Compartment::Recovered && agent.entered_tick < now &&
                --agent.timer <= 0) {
                enter(agent, Compartment::Susceptible, 0, now);
            }
        }
    }
}

void step_rate(World& world)
{
    const auto* config_ptr = std::get_if<RateConfig>(&world.config);
    if (config_ptr == nullptr) {
        throw Error(ErrorCode::ConfigInvalid, "step_rate requires a rate-mode world");
    }
    const RateConfig& config = *config_ptr;
    const EpidemicParams& p = config.params;
    auto& rng = world.rng;
    const long now = ++world.tick;

    long infected_now = 0;
    for (const auto& agent : world.agents) {
        infected_now += agent.compartment == Compartment::Infected ? 1 : 0;
    }
    const double force = effective_contact_rate(p) * static_cast<double>(infected_now);

    struct Exit {
        double rate;
        Compartment to;
    };
    auto resolve = [&](NodeAgent& agent, std::initializer_list<Exit> exits) {
        double hazard = 0.0;
        for (const auto& e : exits) {
            hazard += e.rate;
        }
        if (hazard <= 0.0) {
            return;
        }
        if (!(rng.uniform01() < -std::expm1(-hazard))) {
            return;
        }
        double pick = rng.uniform01() * hazard;
        Compartment destination = Compartment::Dead;
        for (const auto& e : exits) {
            if (e.rate <= 0.0) {
                continue;
            }
            destination = e.to;
            if (pick < e.rate) {
                break;
            }
            pick -= e.rate;
        }
        enter(agent, destination, 0, now);
    };

    for (auto& agent : world.agents) {
        switch (agent.compartment) {
        case Compartment::Susceptible:
            resolve(agent, {{force, Compartment::Exposed},
                            {p.tau_fail, Compartment::Dead},
                            {p.rho_vaccinate, Compartment::Vaccinated}});
            break;
        case Compartment::Exposed:
            resolve(agent, {{p.tau_fail, Compartment::Dead}, {p.theta_incubate, Compartment::Infected}});
            break;
        case Compartment::Infected:
            resolve(agent, {{p.tau_fail, Compartment::Dead},
                            {p.omega_kill, Compartment::Dead},
                            {p.nu_recover, Compartment::Recovered}});
            break;
        case Compartment::Recovered:
            resolve(agent, {{p.tau_fail, Compartment::Dead}, {p.phi_wane, Compartment::Susceptible}});
            break;
        case Compartment::Vaccinated:
            resolve(agent, {{p.tau_fail, Compartment::Dead}, {p.xi_vax_wane, Compartment::Susceptible}});
            break;
        case Compartment::Dead:
            break;
        }
    }

    const auto recruits = rng.poisson(p.lambda_recruit);
    for (std::uint64_t k = 0; k < recruits; ++k) {
        NodeAgent agent;
        agent.id = world.agents.size();
        agent.position = random_position(rng, config.bounds);
        enter(agent, Compartment::Susceptible, 0, now);
        world.agents.push_back(agent);
    }
    world.cumulative_recruits += static_cast<long>(recruits);
}

void advance(World& world)
{
    if (std::holds_alternative<WidgetConfig>(world.config)) {
        step(world);
    } else {
        step_rate(world);
    }
}

TickCounts counts(const World& world)
{
    TickCounts c;
    c.tick = world.tick;
    c.recruits = world.cumulative_recruits;
    for (const auto& agent : world.agents) {
        switch (agent.compartment) {
        case Compartment::Susceptible: ++c.susceptible; break;
        case Compartment::Exposed: ++c.exposed; break;
        case Compartment::Infected: ++c.infected; break;
        case Compartment::Recovered: ++c.recovered; break;
        case Compartment::Vaccinated: ++c.vaccinated; break;
        case Compartment::Dead: ++c.dead; break;
        }
    }
    return c;
}

AbmTrace run(const AgentConfig& config, std::size_t ticks)
{
    if (ticks < 1) {
        throw Error(ErrorCode::ConfigInvalid, "ticks must be at least 1");
    }
    World world = setup(config);
    AbmTrace trace;
    trace.rows.reserve(ticks);
    for (std::size_t t = 0; t < ticks; ++t) {
        advance(world);
        trace.rows.push_back(counts(world));
    }
    return trace;
}

void write_csv(std::ostream& out, const AbmTrace& trace)
{
    out << "tick,susceptible,exposed,infected,recovered,vaccinated,dead\n";
    for (const auto& r : trace.rows) {
        out << r.tick << ',' << r.susceptible << ',' << r.exposed << ',' << r.infected << ','
            << r.recovered << ',' << r.vaccinated << ',' << r.dead << '\n';
    }
}

// ---------------------------------------------------------------------------
// JSON and factor plumbing

namespace {

template <typename T>
T read(const nlohmann::json& j, const char* key, T fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::ConfigInvalid, std::string("bad value for ") + key);
    }
}

int read_int(const nlohmann::json& j, const char* key, int fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer()) {
        throw Error(ErrorCode::ConfigInvalid, std::string(key) + " must be an integer");
    }
    return v.get<int>();
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const char* what)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigInvalid, std::string(what) + " must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : keys) {
            known = known || key == k;
        }
        if (!known) {
            throw Error(ErrorCode::ConfigInvalid, std::string("unknown ") + what + " key: " + key);
        }
    }
}

GridBounds bounds_from_json(const nlohmann::json& j)
{
    reject_unknown(j, {"x_min", "x_max", "y_min", "y_max"}, "bounds");
    GridBounds b;
    b.x_min = read_int(j, "x_min", b.x_min);
    b.x_max = read_int(j, "x_max", b.x_max);
    b.y_min = read_int(j, "y_min", b.y_min);
    b.y_max = read_int(j, "y_max", b.y_max);
    return b;
}

nlohmann::json bounds_to_json(const GridBounds& b)
{
    return {{"x_min", b.x_min}, {"x_max", b.x_max}, {"y_min", b.y_min}, {"y_max", b.y_max}};
}

int integral_factor(const std::string& name, double value)
{
    if (value != std::floor(value) || std::abs(value) > 2e9) {
        throw Error(ErrorCode::ConfigInvalid, "factor " + name + " needs an integer level");
    }
    return static_cast<int>(value);
}

}  // namespace

WidgetConfig widget_config_from_json(const nlohmann::json& j)
{
    reject_unknown(j,
                   {"infectiousness_pct", "worm_duration_ticks", "exposure_duration_ticks", "n_nodes",
                    "chance_recover_pct", "chance_vaccinate_pct", "bounds", "transmission_radius",
                    "initial_infected", "mobility", "immunity_duration_ticks", "seed"},
                   "widget config");
    WidgetConfig c;
    c.infectiousness_pct = read(j, "infectiousness_pct", c.infectiousness_pct);
    c.worm_duration_ticks = read_int(j, "worm_duration_ticks", c.worm_duration_ticks);
    c.exposure_duration_ticks = read_int(j, "exposure_duration_ticks", c.exposure_duration_ticks);
    c.n_nodes = read_int(j, "n_nodes", c.n_nodes);
    c.chance_recover_pct = read(j, "chance_recover_pct", c.chance_recover_pct);
    c.chance_vaccinate_pct = read(j, "chance_vaccinate_pct", c.chance_vaccinate_pct);
    if (j.contains("bounds")) {
        c.bounds = bounds_from_json(j.at("bounds"));
    }
    c.transmission_radius = read(j, "transmission_radius", c.transmission_radius);
    c.initial_infected = read_int(j, "initial_infected", c.initial_infected);
    c.mobility = read(j, "mobility", c.mobility);
    if (j.contains("immunity_duration_ticks") && !j.at("immunity_duration_ticks").is_null()) {
        c.immunity_duration_ticks = read_int(j, "immunity_duration_ticks", 0);
    }
    c.seed = read<std::uint64_t>(j, "seed", c.seed);
    require_valid(c);
    return c;
}

RateConfig rate_config_from_json(const nlohmann::json& j)
{
    reject_unknown(j, {"params", "n_nodes", "initial_infected", "bounds", "seed"}, "rate config");
    if (!j.contains("params")) {
        throw Error(ErrorCode::ConfigInvalid, "rate config needs params");
    }
    RateConfig c;
    c.params = params_from_json(j.at("params"));
    c.n_nodes = read_int(j, "n_nodes", c.n_nodes);
    c.initial_infected = read_int(j, "initial_infected", c.initial_infected);
    if (j.contains("bounds")) {
        c.bounds = bounds_from_json(j.at("bounds"));
    }
    c.seed = read<std::uint64_t>(j, "seed", c.seed);
    require_valid(c);
    return c;
}

nlohmann::json to_json(const WidgetConfig& c)
{
    nlohmann::json j;
    j["infectiousness_pct"] = c.infectiousness_pct;
    j["worm_duration_ticks"] = c.worm_duration_ticks;
    j["exposure_duration_ticks"] = c.exposure_duration_ticks;
    j["n_nodes"] = c.n_nodes;
    j["chance_recover_pct"] = c.chance_recover_pct;
    j["chance_vaccinate_pct"] = c.chance_vaccinate_pct;
    j["bounds"] = bounds_to_json(c.bounds);
    j["transmission_radius"] = c.transmission_radius;
    j["initial_infected"] = c.initial_infected;
    j["mobility"] = c.mobility;
    j["immunity_duration_ticks"] =
        c.immunity_duration_ticks ? nlohmann::json(*c.immunity_duration_ticks) : nlohmann::json(nullptr);
    j["seed"] = c.seed;
    return j;
}

nlohmann::json to_json(const RateConfig& c)
{
    return {{"params", params_to_json(c.params)},
            {"n_nodes", c.n_nodes},
            {"initial_infected", c.initial_infected},
            {"bounds", bounds_to_json(c.bounds)},
            {"seed", c.seed}};
}

const std::vector<std::string>& widget_factor_names()
{
    static const std::vector<std::string> names = {
        "infectiousness_pct", "worm_duration_ticks", "exposure_duration_ticks",
        "n_nodes", "chance_recover_pct", "chance_vaccinate_pct",
        "transmission_radius", "initial_infected", "immunity_duration_ticks",
    };
    return names;
}

const std::vector<std::string>& rate_factor_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out = param_names();
        out.emplace_back("n_nodes");
        out.emplace_back("initial_infected");
        return out;
    }();
    return names;
}

void set_factor(WidgetConfig& c, const std::string& name, double value)
{
    if (name == "infectiousness_pct") {
        c.infectiousness_pct = value;
    } else if (name == "worm_duration_ticks") {
        c.worm_duration_ticks = integral_factor(name, value);
    } else if (name == "exposure_duration_ticks") {
        c.exposure_duration_ticks = integral_factor(name, value);
    } else if (name == "n_nodes") {
        c.n_nodes = integral_factor(name, value);
    } else if (name == "chance_recover_pct") {
        c.chance_recover_pct = value;
    } else if (name == "chance_vaccinate_pct") {
        c.chance_vaccinate_pct = value;
    } else if (name == "transmission_radius") {
        c.transmission_radius = value;
    } else if (name == "initial_infected") {
        c.initial_infected = integral_factor(name, value);
    } else if (name == "immunity_duration_ticks") {
        c.immunity_duration_ticks = integral_factor(name, value);
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown widget factor: " + name);
    }
}

void set_factor(RateConfig& c, const std::string& name, double value)
{
    if (auto member = param_field(name)) {
        c.params.*member = value;
    } else if (name == "n_nodes") {
        c.n_nodes = integral_factor(name, value);
    } else if (name == "initial_infected") {
        c.initial_infected = integral_factor(name, value);
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown rate factor: " + name);
    }
}

void set_factor(AgentConfig& config, const std::string& name, double value)
{
    std::visit([&](auto& c) { set_factor(c, name, value); }, config);
}

void set_seed(AgentConfig& config, std::uint64_t seed)
{
    std::visit([&](auto& c) { c.seed = seed; }, config);
}

}  // namespace epibench
