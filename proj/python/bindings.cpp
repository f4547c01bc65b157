#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "commands.hpp"
#include "lastlook/equilibrium.hpp"
#include "lastlook/mc_oracle.hpp"
#include "lastlook/verification.hpp"

namespace py = pybind11;
using namespace lastlook;

namespace {

DeltaRule make_rule(const std::string& rule, double value) {
    if (rule == "proportional") return proportional_delta(value);
    if (rule == "constant") return constant_delta(value);
    if (rule == "zero") return zero_delta();
    throw std::domain_error("delta rule must be proportional, constant or zero");
}

LastLookPolicy make_policy(std::optional<double> xi, const std::string& rule, double value) {
    if (!xi) return LastLookPolicy::none();
    return LastLookPolicy(*xi, make_rule(rule, value));
}

py::dict quote_dict(const VenueQuote& q) {
    py::dict d;
    d["spread"] = q.spread;
    d["omega_st"] = q.omega_st;
    d["omega_la"] = q.omega_la;
    d["omega_st_effective"] = q.omega_st_effective;
    d["psi_st"] = q.psi_st;
    d["psi_la"] = q.psi_la;
    d["upsilon"] = q.upsilon;
    return d;
}

py::dict row_dict(const equilibrium::FlowRow& r) {
    py::dict d;
    d["t"] = r.t;
    d["n_la"] = py::make_tuple(r.n_la_1, r.n_la_2);
    d["n_st"] = py::make_tuple(r.n_st_1, r.n_st_2);
    d["spread"] = py::make_tuple(r.spread_1, r.spread_2);
    d["omega_st_effective"] = py::make_tuple(r.omega_st_effective_1, r.omega_st_effective_2);
    d["omega_la"] = py::make_tuple(r.omega_la_1, r.omega_la_2);
    return d;
}

EvaluationMode parse_mode(const std::string& m) {
    if (m == "exact") return EvaluationMode::exact;
    if (m == "asymptotic") return EvaluationMode::asymptotic;
    throw std::domain_error("mode must be exact or asymptotic");
}

std::vector<Venue> two_venues(std::optional<double> xi1, std::optional<double> xi2) {
    return {{"venue_1", make_policy(xi1, "proportional", 0.5)}, {"venue_2", make_policy(xi2, "proportional", 0.5)}};
}

int run_command(const std::string& name, const std::string& scenario_json, const std::string& out_dir) {
    const auto s = cli::parse_scenario(nlohmann::json::parse(scenario_json));
    const cli::RunContext ctx{out_dir, nullptr};
    if (name == "spread") return cli::cmd_spread(s, ctx);
    if (name == "optimal-xi") return cli::cmd_optimal_xi(s, ctx);
    if (name == "region") return cli::cmd_region(s, ctx);
    if (name == "flow") return cli::cmd_flow(s, ctx);
    if (name == "verify") return cli::cmd_verify(s, ctx);
    throw std::domain_error("unknown command " + name);
}

}  // namespace

PYBIND11_MODULE(_lastlook, m) {
    m.doc() = "Last Look venue model";

    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<cli::ValidationError>(m, "ValidationError", PyExc_ValueError);

    m.def("norm_cdf", &std_normal_cdf, py::arg("x"));
    m.def("bvn_cdf", [](double x, double y, double rho) { return bivariate_normal_cdf(x, y, Correlation(rho)); },
          py::arg("x"), py::arg("y"), py::arg("rho"));

    m.def(
        "quote_at",
        [](double spread, double alpha, double rho, double beta, double sigma, std::optional<double> xi,
           const std::string& delta_rule, double delta_value) {
            const MarketParams p(sigma, Correlation(rho), alpha, beta);
            return quote_dict(model::quote_at(spread, p, make_policy(xi, delta_rule, delta_value)));
        },
        py::arg("spread"), py::arg("alpha") = 0.1, py::arg("rho") = 0.0, py::arg("beta") = 1.0,
        py::arg("sigma") = 1.0, py::arg("xi") = py::none(), py::arg("delta_rule") = "proportional",
        py::arg("delta_value") = 0.5);

    m.def(
        "solve_spread",
        [](double alpha, double rho, double beta, double sigma, std::optional<double> xi,
           const std::string& delta_rule, double delta_value) {
            const MarketParams p(sigma, Correlation(rho), alpha, beta);
            const auto sol = solver::solve_spread_lastlook(p, make_policy(xi, delta_rule, delta_value));
            py::dict d;
            d["spread"] = sol.spread;
            d["status"] = solver::to_string(sol.status);
            d["residual"] = sol.residual;
            return d;
        },
        py::arg("alpha"), py::arg("rho") = 0.0, py::arg("beta") = 1.0, py::arg("sigma") = 1.0,
        py::arg("xi") = py::none(), py::arg("delta_rule") = "proportional", py::arg("delta_value") = 0.5);

    m.def(
        "asymptotic_coefficients",
        [](double rho, double beta, double sigma, std::optional<double> xi, const std::string& delta_rule,
           double delta_value) {
            const MarketParams p(sigma, Correlation(rho), 0.0, beta);
            const auto c = asymptotics::coefficients(p, make_policy(xi, delta_rule, delta_value));
            py::dict d;
            d["delta0"] = c.delta0;
            d["delta1"] = c.delta1;
            d["eta0"] = c.eta0;
            d["eta1"] = c.eta1;
            d["gamma0"] = c.gamma0;
            d["gamma1"] = c.gamma1;
            return d;
        },
        py::arg("rho") = 0.0, py::arg("beta") = 1.0, py::arg("sigma") = 1.0, py::arg("xi") = py::none(),
        py::arg("delta_rule") = "proportional", py::arg("delta_value") = 0.5);

    m.def(
        "optimal_threshold",
        [](double alpha, double rho, double beta, double sigma, const std::string& delta_rule, double delta_value,
           double xi_lo, double xi_hi) {
            const MarketParams p(sigma, Correlation(rho), alpha, beta);
            solver::ThresholdSearch search;
            search.xi_lo = xi_lo;
            search.xi_hi = xi_hi;
            const auto r = solver::optimal_rejection_threshold(p, make_rule(delta_rule, delta_value), search);
            py::dict d;
            d["xi"] = r.xi;
            d["spread"] = r.spread;
            d["cost"] = r.cost;
            d["location"] = solver::to_string(r.location);
            return d;
        },
        py::arg("alpha"), py::arg("rho") = 0.0, py::arg("beta") = 1.0, py::arg("sigma") = 1.0,
        py::arg("delta_rule") = "proportional", py::arg("delta_value") = 0.5, py::arg("xi_lo") = -6.0,
        py::arg("xi_hi") = -1.0);

    m.def(
        "is_equilibrium",
        [](std::vector<double> n_la, std::vector<double> n_st, double cost, std::optional<double> xi1,
           std::optional<double> xi2, double rho, double beta, double sigma, const std::string& mode) {
            const Environment env{sigma, Correlation(rho), beta};
            EquilibriumOptions opt;
            opt.mode = parse_mode(mode);
            const auto r = equilibrium::is_equilibrium(MarketState{std::move(n_la), std::move(n_st), cost}, env,
                                                       two_venues(xi1, xi2), opt);
            return r.in_equilibrium && !r.vacuous;
        },
        py::arg("n_la"), py::arg("n_st"), py::arg("cost"), py::arg("xi1"), py::arg("xi2") = py::none(),
        py::arg("rho") = 0.5, py::arg("beta") = 0.8, py::arg("sigma") = 1.0, py::arg("mode") = "exact");

    m.def(
        "sequential_migration",
        [](std::vector<double> n_la, std::vector<double> n_st, double cost, std::optional<double> xi1,
           std::optional<double> xi2, double rho, double beta, double sigma, const std::string& mode) {
            const Environment env{sigma, Correlation(rho), beta};
            EquilibriumOptions opt;
            opt.mode = parse_mode(mode);
            const auto traj = equilibrium::sequential_migration(
                MarketState{std::move(n_la), std::move(n_st), cost}, env, two_venues(xi1, xi2), {}, opt);
            py::dict d;
            d["status"] = equilibrium::to_string(traj.status);
            d["steps"] = traj.rows.size() - 1;
            d["initial"] = row_dict(traj.rows.front());
            d["final"] = row_dict(traj.terminal());
            return d;
        },
        py::arg("n_la"), py::arg("n_st"), py::arg("cost"), py::arg("xi1"), py::arg("xi2") = py::none(),
        py::arg("rho") = 0.5, py::arg("beta") = 0.8, py::arg("sigma") = 1.0, py::arg("mode") = "exact");

    m.def(
        "region_counts",
        [](double n_la, double n_st, double cost, std::optional<double> xi1, std::optional<double> xi2,
           int resolution, double rho, double beta, double sigma, const std::string& mode) {
            const Environment env{sigma, Correlation(rho), beta};
            EquilibriumOptions opt;
            opt.mode = parse_mode(mode);
            const auto reg =
                equilibrium::equilibrium_region(env, two_venues(xi1, xi2), {n_la, n_st}, cost, resolution, opt);
            py::dict d;
            d["defined"] = reg.count(reg.defined);
            d["st_band"] = reg.count(reg.st_band);
            d["la_band"] = reg.count(reg.la_band);
            d["equilibrium"] = reg.count(reg.equilibrium);
            return d;
        },
        py::arg("n_la"), py::arg("n_st"), py::arg("cost"), py::arg("xi1"), py::arg("xi2") = py::none(),
        py::arg("resolution") = 200, py::arg("rho") = 0.5, py::arg("beta") = 0.8, py::arg("sigma") = 1.0,
        py::arg("mode") = "asymptotic");

    m.def(
        "simulate",
        [](double spread, double alpha, double rho, double beta, double sigma, std::optional<double> xi,
           std::uint64_t n_samples, std::uint64_t seed, bool antithetic) {
            const MarketParams p(sigma, Correlation(rho), alpha, beta);
            const auto e = mc::simulate(p, make_policy(xi, "proportional", 0.5), spread, {n_samples, seed, antithetic});
            auto est = [](const Estimate& x) { return py::make_tuple(x.mean, x.se); };
            py::dict d;
            d["omega_st"] = est(e.omega_st);
            d["omega_la"] = est(e.omega_la);
            d["psi_st"] = est(e.psi_st);
            d["psi_la"] = est(e.psi_la);
            d["upsilon"] = e.upsilon ? py::object(est(*e.upsilon)) : py::object(py::none());
            return d;
        },
        py::arg("spread"), py::arg("alpha") = 0.1, py::arg("rho") = 0.0, py::arg("beta") = 1.0,
        py::arg("sigma") = 1.0, py::arg("xi") = py::none(), py::arg("n_samples") = 1'000'000,
        py::arg("seed") = 2018, py::arg("antithetic") = false);

    m.def("limit_checks", [] {
        py::list out;
        for (const auto& c : verification::run_limit_suite()) {
            py::dict d;
            d["name"] = c.name;
            d["error"] = c.error();
            d["tolerance"] = c.tolerance;
            d["passed"] = c.passed();
            out.append(d);
        }
        return out;
    });

    m.def(
        "canonical_scenario",
        [](const std::string& scenario_json) {
            return cli::to_json(cli::parse_scenario(nlohmann::json::parse(scenario_json))).dump();
        },
        py::arg("scenario_json") = "{}");
    m.def("run_command", &run_command, py::arg("name"), py::arg("scenario_json"), py::arg("out_dir"),
          "Runs a CLI subcommand on a scenario given as JSON text; returns its exit code.");
}
