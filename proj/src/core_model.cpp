#include "epibench/core_model.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "epibench/error.hpp"

namespace epibench {

namespace {

using Field = std::pair<const char*, double EpidemicParams::*>;

constexpr Field kFields[] = {
    {"lambda_recruit", &EpidemicParams::lambda_recruit},
    {"beta_contact", &EpidemicParams::beta_contact},
    {"tau_fail", &EpidemicParams::tau_fail},
    {"omega_kill", &EpidemicParams::omega_kill},
    {"theta_incubate", &EpidemicParams::theta_incubate},
    {"nu_recover", &EpidemicParams::nu_recover},
    {"phi_wane", &EpidemicParams::phi_wane},
    {"rho_vaccinate", &EpidemicParams::rho_vaccinate},
    {"xi_vax_wane", &EpidemicParams::xi_vax_wane},
    {"sigma_density", &EpidemicParams::sigma_density},
    {"r0_range", &EpidemicParams::r0_range},
};

}  // namespace

const std::vector<std::string>& param_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, member] : kFields) {
            out.emplace_back(name);
        }
        return out;
    }();
    return names;
}

double EpidemicParams::* param_field(const std::string& name)
{
    for (const auto& [field_name, member] : kFields) {
        if (name == field_name) {
            return member;
        }
    }
    return nullptr;
}

double effective_contact_rate(const EpidemicParams& p)
{
    return p.beta_contact * p.sigma_density * std::numbers::pi * p.r0_range * p.r0_range;
}

std::vector<std::string> validate(const EpidemicParams& p)
{
    std::vector<std::string> violations;
    for (const auto& [name, member] : kFields) {
        const double value = p.*member;
        if (!std::isfinite(value) || value < 0.0) {
            violations.emplace_back(name);
        }
    }
    if (violations.empty() && !std::isfinite(effective_contact_rate(p))) {
        violations.emplace_back("effective_contact_rate");
    }
    return violations;
}

void require_valid(const EpidemicParams& p)
{
    const auto violations = validate(p);
    if (violations.empty()) {
        return;
    }
    std::string message = "invalid epidemic parameters:";
    for (const auto& v : violations) {
        message += ' ';
        message += v;
    }
    throw Error(ErrorCode::ConfigInvalid, message);
}

EpidemicParams params_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::ConfigInvalid, "epidemic parameters must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (param_field(key) == nullptr) {
            throw Error(ErrorCode::ConfigInvalid, "unknown parameter key: " + key);
        }
        if (!value.is_number()) {
            throw Error(ErrorCode::ConfigInvalid, "parameter " + key + " must be numeric");
        }
    }
    EpidemicParams p;
    for (const auto& [name, member] : kFields) {
        if (!j.contains(name)) {
            throw Error(ErrorCode::ConfigInvalid, std::string("missing parameter key: ") + name);
        }
        p.*member = j.at(name).get<double>();
    }
    return p;
}

nlohmann::json params_to_json(const EpidemicParams& p)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, member] : kFields) {
        j[name] = p.*member;
    }
    return j;
}

}  // namespace epibench
