#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace epibench {

/// The eleven rates and geometric constants of the SEIRV worm model.
///
/// Rates are per tick. `rho_vaccinate` moves S to V and `xi_vax_wane` moves V
/// back to S, following the direction of the flows in the equations.
struct EpidemicParams {
    double lambda_recruit = 0.0;  ///< nodes added per tick
    double beta_contact = 0.0;    ///< infection contact rate, 1/(node*tick)
    double tau_fail = 0.0;        ///< hardware/software failure (death) rate
    double omega_kill = 0.0;      ///< worm-induced crash rate of infected nodes
    double theta_incubate = 0.0;  ///< E -> I
    double nu_recover = 0.0;      ///< I -> R
    double phi_wane = 0.0;        ///< R -> S
    double rho_vaccinate = 0.0;   ///< S -> V
    double xi_vax_wane = 0.0;     ///< V -> S
    double sigma_density = 0.0;   ///< nodes per unit area
    double r0_range = 0.0;        ///< transmission range in patch lengths

    bool operator==(const EpidemicParams&) const = default;
};

/// Names of the EpidemicParams fields, in declaration order.
const std::vector<std::string>& param_names();

/// Compartment occupancy at time t. Real-valued so the same type serves the
/// ODE engine; the agent engine stores integral counts in it.
struct CompartmentState {
    double s = 0.0;
    double e = 0.0;
    double i = 0.0;
    double r = 0.0;
    double v = 0.0;
    double t = 0.0;

    double total() const { return s + e + i + r + v; }

    bool operator==(const CompartmentState&) const = default;
};

/// beta * sigma * pi * r0^2, the per-(S,I)-pair infection rate.
double effective_contact_rate(const EpidemicParams& p);

/// Every field that is negative, NaN, or infinite. Empty means valid.
std::vector<std::string> validate(const EpidemicParams& p);

/// Throws ConfigInvalid listing every violation.
void require_valid(const EpidemicParams& p);

/// Reads exactly the eleven field names; missing or unknown keys throw
/// ConfigInvalid.
EpidemicParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const EpidemicParams& p);

/// Pointer-to-member lookup by field name, or nullptr.
double EpidemicParams::* param_field(const std::string& name);

}  // namespace epibench
