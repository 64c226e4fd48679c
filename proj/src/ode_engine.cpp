#include "epibench/ode_engine.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "epibench/csv.hpp"
#include "epibench/error.hpp"

namespace epibench {

Derivatives derivatives(const CompartmentState& x, const EpidemicParams& p)
{
    const double infection = effective_contact_rate(p) * x.s * x.i;
    Derivatives d;
    d.ds = p.lambda_recruit - infection - p.tau_fail * x.s - p.rho_vaccinate * x.s +
           p.phi_wane * x.r + p.xi_vax_wane * x.v;
    d.de = infection - (p.tau_fail + p.theta_incubate) * x.e;
    d.di = p.theta_incubate * x.e - (p.tau_fail + p.omega_kill + p.nu_recover) * x.i;
    d.dr = p.nu_recover * x.i - (p.tau_fail + p.phi_wane) * x.r;
    d.dv = p.rho_vaccinate * x.s - (p.tau_fail + p.xi_vax_wane) * x.v;
    return d;
}

void require_valid(const OdeRun& run)
{
    require_valid(run.params);
    if (!(run.dt > 0.0) || !std::isfinite(run.dt)) {
        throw Error(ErrorCode::ConfigInvalid, "dt must be positive and finite");
    }
    if (run.steps < 1) {
        throw Error(ErrorCode::ConfigInvalid, "steps must be at least 1");
    }
    if (!std::isfinite(run.dt * static_cast<double>(run.steps))) {
        throw Error(ErrorCode::ConfigInvalid, "dt*steps must be finite");
    }
    const auto& x = run.init;
    for (double value : {x.s, x.e, x.i, x.r, x.v, x.t}) {
        if (!std::isfinite(value)) {
            throw Error(ErrorCode::ConfigInvalid, "initial state must be finite");
        }
    }
    for (double value : {x.s, x.e, x.i, x.r, x.v}) {
        if (value < 0.0) {
            throw Error(ErrorCode::ConfigInvalid, "initial state must be non-negative");
        }
    }
}

namespace {

CompartmentState advance(const CompartmentState& x, const Derivatives& d, double h)
{
    CompartmentState out = x;
    out.s += h * d.ds;
    out.e += h * d.de;
    out.i += h * d.di;
    out.r += h * d.dr;
    out.v += h * d.dv;
    return out;
}

void clamp_undershoot(double& value, const char* name, double t)
{
    if (value >= 0.0) {
        return;
    }
    if (value < -kUndershootTolerance) {
        throw Error(ErrorCode::StepTooLarge,
                    std::string("compartment ") + name + " fell to " + csv::format_number(value) +
                        " at t=" + csv::format_number(t) + "; reduce dt");
    }
    value = 0.0;
}

}  // namespace

OdeTrace integrate_rk4(const OdeRun& run)
{
    require_valid(run);
    const auto& p = run.params;
    const double h = run.dt;

    OdeTrace trace;
    trace.rows.reserve(run.steps + 1);
    trace.rows.push_back(run.init);

    CompartmentState x = run.init;
    for (std::size_t step = 1; step <= run.steps; ++step) {
        const Derivatives k1 = derivatives(x, p);
        const Derivatives k2 = derivatives(advance(x, k1, h / 2), p);
        const Derivatives k3 = derivatives(advance(x, k2, h / 2), p);
        const Derivatives k4 = derivatives(advance(x, k3, h), p);

        x.s += h / 6 * (k1.ds + 2 * k2.ds + 2 * k3.ds + k4.ds);
        x.e += h / 6 * (k1.de + 2 * k2.de + 2 * k3.de + k4.de);
        x.i += h / 6 * (k1.di + 2 * k2.di + 2 * k3.di + k4.di);
        x.r += h / 6 * (k1.dr + 2 * k2.dr + 2 * k3.dr + k4.dr);
        x.v += h / 6 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
        x.t = run.init.t + h * static_cast<double>(step);

        clamp_undershoot(x.s, "susceptible", x.t);
        clamp_undershoot(x.e, "exposed", x.t);
        clamp_undershoot(x.i, "infected", x.t);
        clamp_undershoot(x.r, "recovered", x.t);
        clamp_undershoot(x.v, "vaccinated", x.t);

        trace.rows.push_back(x);
    }
    return trace;
}

void write_csv(std::ostream& out, const OdeTrace& trace)
{
    using csv::format_number;
    out << "t,susceptible,exposed,infected,recovered,vaccinated,total\n";
    for (const auto& x : trace.rows) {
        out << format_number(x.t) << ',' << format_number(x.s) << ',' << format_number(x.e) << ','
            << format_number(x.i) << ',' << format_number(x.r) << ',' << format_number(x.v) << ','
            << format_number(x.total()) << '\n';
    }
}

OdeRun ode_run_from_json(const nlohmann::json& j)
{
    static const char* const kKeys[] = {"params", "init", "dt", "steps"};
    static const char* const kInitKeys[] = {"s", "e", "i", "r", "v", "t"};
    auto known = [](const std::string& key, const auto& list) {
        for (const char* k : list) {
            if (key == k) {
                return true;
            }
        }
        return false;
    };

    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigInvalid, "ODE run config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!known(key, kKeys)) {
            throw Error(ErrorCode::ConfigInvalid, "unknown ODE run key: " + key);
        }
    }
    if (!j.contains("params") || !j.contains("init") || !j.contains("steps")) {
        throw Error(ErrorCode::ConfigInvalid, "ODE run needs params, init and steps");
    }

    OdeRun run;
    run.params = params_from_json(j.at("params"));
    const auto& init = j.at("init");
    if (!init.is_object()) {
        throw Error(ErrorCode::ConfigInvalid, "init must be an object");
    }
    for (const auto& [key, value] : init.items()) {
        if (!known(key, kInitKeys)) {
            throw Error(ErrorCode::ConfigInvalid, "unknown init key: " + key);
        }
    }
    try {
        run.init.s = init.value("s", 0.0);
        run.init.e = init.value("e", 0.0);
        run.init.i = init.value("i", 0.0);
        run.init.r = init.value("r", 0.0);
        run.init.v = init.value("v", 0.0);
        run.init.t = init.value("t", 0.0);
        run.dt = j.value("dt", kDefaultDt);
        const auto steps = j.at("steps").get<long long>();
        if (steps < 1) {
            throw Error(ErrorCode::ConfigInvalid, "steps must be at least 1");
        }
        run.steps = static_cast<std::size_t>(steps);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("bad ODE run value: ") + e.what());
    }
    require_valid(run);
    return run;
}

}  // namespace epibench
