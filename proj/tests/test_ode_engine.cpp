#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "epibench/error.hpp"
#include "epibench/ode_engine.hpp"

using namespace epibench;

namespace {

// Flow-list formulation of the SEIRV system: every term is one transfer
// between compartments (index 5 is the outside world).
std::array<double, 5> flow_oracle(const std::array<double, 5>& x, const EpidemicParams& p)
{
    enum { S, E, I, R, V, Out };
    const double pi = 3.14159265358979323846;
    struct Flow {
        int from;
        int to;
        double amount;
    };
    const Flow flows[] = {
        {Out, S, p.lambda_recruit},
        {S, E, p.beta_contact * p.sigma_density * pi * p.r0_range * p.r0_range * x[S] * x[I]},
        {S, Out, p.tau_fail * x[S]},
        {S, V, p.rho_vaccinate * x[S]},
        {R, S, p.phi_wane * x[R]},
        {V, S, p.xi_vax_wane * x[V]},
        {E, Out, p.tau_fail * x[E]},
        {E, I, p.theta_incubate * x[E]},
        {I, Out, p.tau_fail * x[I]},
        {I, Out, p.omega_kill * x[I]},
        {I, R, p.nu_recover * x[I]},
        {R, Out, p.tau_fail * x[R]},
        {V, Out, p.tau_fail * x[V]},
    };
    std::array<double, 6> d{};
    for (const auto& f : flows) {
        d[static_cast<std::size_t>(f.from)] -= f.amount;
        d[static_cast<std::size_t>(f.to)] += f.amount;
    }
    return {d[0], d[1], d[2], d[3], d[4]};
}

EpidemicParams generic_params()
{
    EpidemicParams p;
    p.lambda_recruit = 2.0;
    p.beta_contact = 0.0004;
    p.tau_fail = 0.01;
    p.omega_kill = 0.03;
    p.theta_incubate = 0.2;
    p.nu_recover = 0.1;
    p.phi_wane = 0.05;
    p.rho_vaccinate = 0.02;
    p.xi_vax_wane = 0.04;
    p.sigma_density = 0.5;
    p.r0_range = 2.0;
    return p;
}

double rel_close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST_CASE("derivatives: zero fixed point")
{
    const auto d = derivatives(CompartmentState{}, EpidemicParams{});
    CHECK(d.ds == 0.0);
    CHECK(d.de == 0.0);
    CHECK(d.di == 0.0);
    CHECK(d.dr == 0.0);
    CHECK(d.dv == 0.0);
}

TEST_CASE("derivatives: susceptible-only substitution")
{
    EpidemicParams p;
    p.tau_fail = 0.01;
    p.rho_vaccinate = 0.02;
    CompartmentState x;
    x.s = 100;
    const auto d = derivatives(x, p);
    CHECK(d.ds == doctest::Approx(-3.0).epsilon(1e-14));
    CHECK(d.dv == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(d.de == 0.0);
    CHECK(d.di == 0.0);
    CHECK(d.dr == 0.0);
}

TEST_CASE("derivatives match the flow-list oracle and sum identity")
{
    const EpidemicParams p = generic_params();
    const CompartmentState states[] = {
        {180, 12, 5, 30, 20, 0}, {1, 0, 1, 0, 0, 0}, {500, 200, 150, 3, 77, 0}, {0.5, 0.25, 0.125, 2, 9, 0}};
    for (const auto& x : states) {
        const auto d = derivatives(x, p);
        const auto o = flow_oracle({x.s, x.e, x.i, x.r, x.v}, p);
        CHECK(rel_close(d.ds, o[0]));
        CHECK(rel_close(d.de, o[1]));
        CHECK(rel_close(d.di, o[2]));
        CHECK(rel_close(d.dr, o[3]));
        CHECK(rel_close(d.dv, o[4]));

        const double sum = d.ds + d.de + d.di + d.dr + d.dv;
        const double identity = p.lambda_recruit - p.tau_fail * x.total() - p.omega_kill * x.i;
        CHECK(std::abs(sum - identity) <= 1e-12 * std::max({1.0, std::abs(identity), x.total()}));
    }
}

TEST_CASE("rk4 with zero rates is constant")
{
    OdeRun run;
    run.init = {50, 3, 2, 1, 4, 0};
    run.dt = 0.1;
    run.steps = 100;
    const auto trace = integrate_rk4(run);
    REQUIRE(trace.rows.size() == 101);
    for (const auto& row : trace.rows) {
        CHECK(row.s == 50);
        CHECK(row.e == 3);
        CHECK(row.i == 2);
        CHECK(row.r == 1);
        CHECK(row.v == 4);
    }
    CHECK(trace.rows.back().t == doctest::Approx(10.0));
}

TEST_CASE("rk4 conserves N when lambda = tau = omega = 0")
{
    OdeRun run;
    run.params = generic_params();
    run.params.lambda_recruit = 0;
    run.params.tau_fail = 0;
    run.params.omega_kill = 0;
    run.init = {990, 0, 10, 0, 0, 0};
    run.steps = 10000;
    const auto trace = integrate_rk4(run);
    const double n0 = run.init.total();
    for (const auto& row : trace.rows) {
        CHECK(std::abs(row.total() - n0) <= 1e-8 * n0);
    }
}

TEST_CASE("rk4 is fourth order")
{
    OdeRun coarse;
    coarse.params = generic_params();
    coarse.init = {180, 10, 10, 0, 0, 0};
    coarse.dt = 0.2;
    coarse.steps = 100;

    OdeRun half = coarse;
    half.dt = coarse.dt / 2;
    half.steps = coarse.steps * 2;

    OdeRun reference = coarse;
    reference.dt = coarse.dt / 100;
    reference.steps = coarse.steps * 100;

    const auto tc = integrate_rk4(coarse);
    const auto th = integrate_rk4(half);
    const auto tr = integrate_rk4(reference);

    auto max_error = [&](const OdeTrace& t, std::size_t stride) {
        double worst = 0.0;
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
            const auto& a = t.rows[k];
            const auto& b = tr.rows[k * stride];
            worst = std::max({worst, std::abs(a.s - b.s), std::abs(a.e - b.e), std::abs(a.i - b.i),
                              std::abs(a.r - b.r), std::abs(a.v - b.v)});
        }
        return worst;
    };
    const double ratio = max_error(tc, 100) / max_error(th, 50);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("rk4 flags a step that is too coarse")
{
    OdeRun run;
    run.params.rho_vaccinate = 50.0;
    run.init = {100, 0, 0, 0, 0, 0};
    run.dt = 1.0;
    run.steps = 3;
    try {
        integrate_rk4(run);
        FAIL("expected StepTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StepTooLarge);
    }
}

TEST_CASE("rk4 keeps compartments non-negative and is deterministic")
{
    OdeRun run;
    run.params = generic_params();
    run.init = {200, 0, 5, 0, 0, 0};
    run.steps = 2000;
    const auto a = integrate_rk4(run);
    const auto b = integrate_rk4(run);
    CHECK(a.rows == b.rows);
    for (const auto& row : a.rows) {
        CHECK(row.s >= 0);
        CHECK(row.e >= 0);
        CHECK(row.i >= 0);
        CHECK(row.r >= 0);
        CHECK(row.v >= 0);
    }
    for (std::size_t k = 1; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].t > a.rows[k - 1].t);
    }
}

TEST_CASE("invalid runs are rejected")
{
    OdeRun run;
    run.dt = 0.0;
    CHECK_THROWS_AS(integrate_rk4(run), Error);
    run.dt = 0.1;
    run.steps = 0;
    CHECK_THROWS_AS(integrate_rk4(run), Error);
    run.steps = 1;
    run.init.s = -1;
    CHECK_THROWS_AS(integrate_rk4(run), Error);
}

TEST_CASE("trace csv and run json")
{
    const auto j = nlohmann::json::parse(R"({
        "params": {"lambda_recruit": 0, "beta_contact": 0, "tau_fail": 0, "omega_kill": 0,
                   "theta_incubate": 0, "nu_recover": 0, "phi_wane": 0, "rho_vaccinate": 0,
                   "xi_vax_wane": 0, "sigma_density": 0, "r0_range": 0},
        "init": {"s": 9, "i": 1},
        "steps": 2, "dt": 0.5})");
    const auto run = ode_run_from_json(j);
    CHECK(run.dt == 0.5);
    std::ostringstream out;
    write_csv(out, integrate_rk4(run));
    CHECK(out.str() ==
          "t,susceptible,exposed,infected,recovered,vaccinated,total\n"
          "0,9,0,1,0,0,10\n"
          "0.5,9,0,1,0,0,10\n"
          "1,9,0,1,0,0,10\n");

    auto bad = j;
    bad["stepz"] = 3;
    CHECK_THROWS_AS(ode_run_from_json(bad), Error);
}
