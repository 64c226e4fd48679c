#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "epibench/core_model.hpp"

namespace epibench {

struct Derivatives {
    double ds = 0.0;
    double de = 0.0;
    double di = 0.0;
    double dr = 0.0;
    double dv = 0.0;
};

/// Right-hand side of the SEIRV system:
///   dS = lambda - k*S*I - tau*S - rho*S + phi*R + xi*V
///   dE = k*S*I - (tau + theta)*E
///   dI = theta*E - (tau + omega + nu)*I
///   dR = nu*I - (tau + phi)*R
///   dV = rho*S - (tau + xi)*V
/// with k = effective_contact_rate(p).
Derivatives derivatives(const CompartmentState& state, const EpidemicParams& p);

inline constexpr double kDefaultDt = 0.01;
inline constexpr double kUndershootTolerance = 1e-9;

struct OdeRun {
    EpidemicParams params;
    CompartmentState init;
    double dt = kDefaultDt;
    std::size_t steps = 1;
};

void require_valid(const OdeRun& run);

/// Time evolution of the compartments; one row per emitted time point.
struct OdeTrace {
    std::vector<CompartmentState> rows;
};

/// Fixed-step classic RK4. Emits the initial state plus one row per step.
/// Compartments that undershoot zero by at most kUndershootTolerance are
/// clamped to 0; anything further below throws StepTooLarge.
OdeTrace integrate_rk4(const OdeRun& run);

/// CSV with header t,susceptible,exposed,infected,recovered,vaccinated,total.
void write_csv(std::ostream& out, const OdeTrace& trace);

/// {"params": {...}, "init": {"s","e","i","r","v","t"}, "dt": 0.01, "steps": n}.
/// `dt` and `init.t` are optional.
OdeRun ode_run_from_json(const nlohmann::json& j);

}  // namespace epibench
