#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include "lastlook/asymptotics.hpp"

namespace lastlook::cli {

using nlohmann::ordered_json;

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

class Csv {
public:
    Csv(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path);
        row_strings(header);
    }
    void row(const std::vector<double>& cells) {
        std::vector<std::string> s;
        s.reserve(cells.size());
        for (double c : cells) s.push_back(format_number(c));
        row_strings(s);
    }
    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::string path_in(const RunContext& ctx, const std::string& name) {
    std::filesystem::create_directories(ctx.out_dir);
    return (std::filesystem::path(ctx.out_dir) / name).string();
}

// JSON has no infinities; they are written as strings.
ordered_json num(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

std::ostream* log_of(const RunContext& ctx) { return ctx.log; }

}  // namespace

int cmd_spread(const Scenario& s, const RunContext& ctx) {
    const std::string file = path_in(ctx, "spread.csv");
    Csv csv(file, {"alpha", "rho", "xi_over_sigma", "spread_over_sigma_exact", "spread_over_sigma_asymptotic",
                   "status"});
    std::vector<double> series = s.sweep.series_values;
    const bool has_series = !s.sweep.series_variable.empty();
    if (!has_series) series = {0.0};
    const double base_xi = s.venues.front().xi ? *s.venues.front().xi / s.sigma : -kInf;
    std::size_t rows = 0;
    for (double sv : series) {
        for (double v : s.sweep.values) {
            double alpha = s.alpha, rho = s.rho, xi = base_xi;
            auto assign = [&](const std::string& var, double val) {
                if (var == "alpha") alpha = val;
                if (var == "rho") rho = val;
                if (var == "xi_over_sigma") xi = val;
            };
            if (has_series) assign(s.sweep.series_variable, sv);
            assign(s.sweep.variable, v);
            MarketParams p;
            LastLookPolicy policy;
            try {
                p = MarketParams(s.sigma, Correlation(rho), alpha, s.beta);
                p.validate();
                if (std::isfinite(xi)) policy = LastLookPolicy(xi * s.sigma, s.delta_rule(0));
            } catch (const std::domain_error& e) {
                throw ValidationError("$.sweep.values", e.what());
            }
            const SpreadSolution sol = solver::solve_spread_lastlook(p, policy, s.solver);
            const auto coef = asymptotics::spread_coefficients(p, policy);
            const double asym = std::max(0.0, coef.delta0 + coef.delta1 * alpha);
            csv.row_strings({format_number(alpha), format_number(rho), format_number(xi),
                             format_number(sol.spread / s.sigma), format_number(asym), solver::to_string(sol.status)});
            ++rows;
        }
    }
    if (auto* log = log_of(ctx)) *log << "spread: " << rows << " rows -> " << file << '\n';
    return ok;
}

int cmd_optimal_xi(const Scenario& s, const RunContext& ctx) {
    const MarketParams p = s.params();
    const DeltaRule rule = s.delta_rule(0);
    const auto& search = s.threshold.search;
    const solver::OptimalThreshold best = solver::optimal_rejection_threshold(p, rule, search, s.solver);

    const std::string file = path_in(ctx, "optimal_xi_curve.csv");
    Csv csv(file, {"xi_over_sigma", "spread_over_sigma", "effective_cost_over_sigma", "omega_st_over_sigma", "psi_st"});
    const int n = s.threshold.curve_points;
    for (int k = 0; k < n; ++k) {
        const double xi = n == 1 ? search.xi_lo : search.xi_lo + (search.xi_hi - search.xi_lo) * k / (n - 1);
        const LastLookPolicy policy(xi, rule);
        const double spread = solver::solve_spread_lastlook(p, policy, s.solver).spread;
        const double cost = solver::effective_cost_at_threshold(xi, p, rule, s.solver);
        csv.row({xi / s.sigma, spread / s.sigma, cost / s.sigma, model::omega_st_lastlook(spread, p, policy) / s.sigma,
                 model::psi_st(p, policy)});
    }
    ordered_json j;
    j["xi_star_over_sigma"] = best.xi / s.sigma;
    j["spread_over_sigma"] = best.spread / s.sigma;
    j["effective_cost_over_sigma"] = best.cost / s.sigma;
    j["location"] = solver::to_string(best.location);
    j["at_boundary"] = best.at_boundary();
    j["search"] = {{"xi_lo_over_sigma", search.xi_lo / s.sigma}, {"xi_hi_over_sigma", search.xi_hi / s.sigma}};
    j["market"] = {{"sigma", s.sigma}, {"rho", s.rho}, {"beta", s.beta}, {"alpha", s.alpha}};
    write_json(path_in(ctx, "optimal_xi.json"), j);
    if (auto* log = log_of(ctx)) {
        *log << "optimal xi/sigma = " << format_number(best.xi / s.sigma) << ", spread/sigma = "
             << format_number(best.spread / s.sigma) << ", effective cost/sigma = "
             << format_number(best.cost / s.sigma) << " (" << solver::to_string(best.location) << ")\n";
    }
    return ok;
}

namespace {

equilibrium::Totals totals_of(const Scenario& s) {
    if (s.n_la.empty()) throw ValidationError("$.populations", "required by this command");
    equilibrium::Totals t;
    for (double v : s.n_la) t.n_la += v;
    for (double v : s.n_st) t.n_st += v;
    return t;
}

void require_two_venues(const Scenario& s) {
    if (s.venues.size() != 2) throw ValidationError("$.venues", "this command needs exactly two venues");
}

ordered_json conic_json(const equilibrium::ConicSection& c) {
    return {{"a", c.a},         {"b", c.b},         {"c", c.c},
            {"d", c.d},         {"e", c.e},         {"zeta", c.zeta},
            {"omega", c.omega}, {"kind", equilibrium::to_string(c.kind)}};
}

ordered_json band_json(const equilibrium::ConicPair& p) {
    return {{"h0", p.h0},
            {"slope_1", p.slope_1},
            {"slope_2", p.slope_2},
            {"zeta_plus", conic_json(p.plus)},
            {"zeta_minus", conic_json(p.minus)}};
}

}  // namespace

int cmd_region(const Scenario& s, const RunContext& ctx) {
    require_two_venues(s);
    const auto totals = totals_of(s);
    const auto venues = s.venue_list();
    const auto env = s.environment();
    const auto reg =
        equilibrium::equilibrium_region(env, venues, totals, s.migration.cost, s.region_resolution, s.options());

    const std::string file = path_in(ctx, "region.csv");
    Csv csv(file, {"n_la_1", "n_st_1", "defined", "st_band", "la_band", "equilibrium"});
    const auto r = static_cast<std::size_t>(reg.resolution);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            const std::size_t k = reg.index(i, j);
            csv.row({reg.n_la_axis[i], reg.n_st_axis[j], double(reg.defined[k]), double(reg.st_band[k]),
                     double(reg.la_band[k]), double(reg.equilibrium[k])});
        }
    }
    ordered_json j;
    j["resolution"] = reg.resolution;
    j["mode"] = s.mode;
    j["migration_cost"] = s.migration.cost;
    j["totals"] = {{"n_la", totals.n_la}, {"n_st", totals.n_st}};
    j["cells"] = {{"total", r * r},
                  {"defined", reg.count(reg.defined)},
                  {"st_band", reg.count(reg.st_band)},
                  {"la_band", reg.count(reg.la_band)},
                  {"equilibrium", reg.count(reg.equilibrium)}};
    j["equilibrium_empty"] = reg.empty();
    j["conics"] = {
        {"st_band", band_json(equilibrium::conic_boundaries(env, venues, totals, s.migration.cost,
                                                            equilibrium::Band::slow_traders))},
        {"la_band", band_json(equilibrium::conic_boundaries(env, venues, totals, s.migration.cost,
                                                            equilibrium::Band::latency_arbitrageurs))}};
    write_json(path_in(ctx, "region.json"), j);
    if (auto* log = log_of(ctx)) {
        *log << "region: " << reg.count(reg.equilibrium) << " of " << reg.count(reg.defined)
             << " defined cells in equilibrium (ST band " << reg.count(reg.st_band) << ", LA band "
             << reg.count(reg.la_band) << ") -> " << file << '\n';
    }
    return ok;
}

namespace {

ordered_json venue_row(const equilibrium::FlowRow& r, int venue, double sigma) {
    const double la = venue == 1 ? r.n_la_1 : r.n_la_2;
    const double st = venue == 1 ? r.n_st_1 : r.n_st_2;
    const double spread = venue == 1 ? r.spread_1 : r.spread_2;
    const double oh = venue == 1 ? r.omega_st_effective_1 : r.omega_st_effective_2;
    const double ola = venue == 1 ? r.omega_la_1 : r.omega_la_2;
    const double n = la + st;
    return {{"alpha", num(n > 0 ? la / n : NAN)},
            {"n", n},
            {"n_la", la},
            {"n_st", st},
            {"spread_over_sigma", num(spread / sigma)},
            {"omega_st_effective_over_sigma", num(oh / sigma)},
            {"omega_la_over_sigma", num(ola / sigma)}};
}

void print_table(std::ostream& os, const equilibrium::FlowRow& a, const equilibrium::FlowRow& b, double sigma) {
    auto line = [&](const char* name, auto f) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-12s %9s %9s   %9s %9s\n", name, f(a, 1).c_str(), f(a, 2).c_str(),
                      f(b, 1).c_str(), f(b, 2).c_str());
        os << buf;
    };
    auto fixed = [](double v, int d) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.*f", d, v);
        return std::string(buf);
    };
    os << "             initial               final\n";
    line("alpha", [&](const equilibrium::FlowRow& r, int v) {
        const double la = v == 1 ? r.n_la_1 : r.n_la_2, st = v == 1 ? r.n_st_1 : r.n_st_2;
        return la + st > 0 ? fixed(100.0 * la / (la + st), 1) + "%" : std::string("-");
    });
    line("N", [&](const auto& r, int v) { return fixed(v == 1 ? r.n_la_1 + r.n_st_1 : r.n_la_2 + r.n_st_2, 0); });
    line("N_LA", [&](const auto& r, int v) { return fixed(v == 1 ? r.n_la_1 : r.n_la_2, 0); });
    line("N_ST", [&](const auto& r, int v) { return fixed(v == 1 ? r.n_st_1 : r.n_st_2, 0); });
    line("spread", [&](const auto& r, int v) { return fixed((v == 1 ? r.spread_1 : r.spread_2) / sigma, 2); });
    line("omega_hat", [&](const auto& r, int v) {
        return fixed((v == 1 ? r.omega_st_effective_1 : r.omega_st_effective_2) / sigma, 2);
    });
    line("omega_la", [&](const auto& r, int v) { return fixed((v == 1 ? r.omega_la_1 : r.omega_la_2) / sigma, 2); });
}

}  // namespace

int cmd_flow(const Scenario& s, const RunContext& ctx) {
    require_two_venues(s);
    (void)totals_of(s);
    const auto venues = s.venue_list();
    const auto env = s.environment();
    const MarketState initial = s.state();
    const bool ode = s.migration.dynamics == "ode";
    auto opts = s.options();

    equilibrium::FlowTrajectory traj;
    if (ode) {
        try {
            traj = equilibrium::ode_flow(initial, env, venues, s.ode_config(), opts);
        } catch (const equilibrium::StepSizeError& e) {
            throw SolverError(e.what());
        }
    } else {
        try {
            equilibrium::SequentialConfig cfg;
            cfg.max_steps = s.migration.max_steps;
            cfg.order = s.migration.order == "la_first" ? equilibrium::MigrationOrder::la_first
                                                        : equilibrium::MigrationOrder::simultaneous;
            traj = equilibrium::sequential_migration(initial, env, venues, cfg, opts);
        } catch (const std::domain_error& e) {
            throw ValidationError("$.populations", e.what());
        }
    }

    const double sigma = s.sigma;
    const std::string file = path_in(ctx, "flow.csv");
    Csv csv(file, {ode ? "time" : "step", "n_la_1", "n_st_1", "n_la_2", "n_st_2", "spread_over_sigma_1",
                   "spread_over_sigma_2", "omega_st_effective_over_sigma_1", "omega_st_effective_over_sigma_2",
                   "omega_la_over_sigma_1", "omega_la_over_sigma_2"});
    for (const auto& r : traj.rows) {
        csv.row({r.t, r.n_la_1, r.n_st_1, r.n_la_2, r.n_st_2, r.spread_1 / sigma, r.spread_2 / sigma,
                 r.omega_st_effective_1 / sigma, r.omega_st_effective_2 / sigma, r.omega_la_1 / sigma,
                 r.omega_la_2 / sigma});
    }
    const auto& first = traj.rows.front();
    const auto& last = traj.terminal();
    if (ode) opts.tolerance = s.ode_config().gap_tol;
    MarketState final_state{{last.n_la_1, last.n_la_2}, {last.n_st_1, last.n_st_2}, s.migration.cost};
    if (ode) final_state.migration_cost = std::max(s.ode_config().cost_la, s.ode_config().cost_st);
    const auto report = equilibrium::is_equilibrium(final_state, env, venues, opts);

    ordered_json j;
    j["dynamics"] = s.migration.dynamics;
    j["mode"] = s.mode;
    j["status"] = equilibrium::to_string(traj.status);
    j["rows"] = traj.rows.size();
    j[ode ? "time" : "steps"] = last.t;
    j["final_is_equilibrium"] = report.in_equilibrium && !report.vacuous;
    j["final_vacuous"] = report.vacuous;
    j["initial"] = {venue_row(first, 1, sigma), venue_row(first, 2, sigma)};
    j["final"] = {venue_row(last, 1, sigma), venue_row(last, 2, sigma)};
    write_json(path_in(ctx, "flow.json"), j);
    if (auto* log = log_of(ctx)) {
        print_table(*log, first, last, sigma);
        *log << "status: " << equilibrium::to_string(traj.status) << " after "
             << (ode ? format_number(last.t) : std::to_string(static_cast<long long>(last.t)))
             << (ode ? " time units" : " steps") << " -> " << file << '\n';
    }
    return ok;
}

int cmd_verify(const Scenario& s, const RunContext& ctx) {
    const SimConfig sim{s.simulation.n_samples, s.seed, s.simulation.antithetic};
    const auto oracle = verification::run_oracle_suite(s.simulation.grid, sim);
    const auto limits = verification::run_limit_suite();

    ordered_json j;
    j["seed"] = s.seed;
    j["n_samples"] = s.simulation.n_samples;
    j["antithetic"] = s.simulation.antithetic;
    ordered_json comps = ordered_json::array();
    for (const auto& c : oracle.comparisons) {
        comps.push_back({{"quantity", c.quantity},
                         {"rho", c.rho},
                         {"beta", c.beta},
                         {"xi_over_sigma", c.xi_over_sigma},
                         {"spread_over_sigma", c.spread_over_sigma},
                         {"closed_form", c.closed_form},
                         {"mc_mean", c.mc_mean},
                         {"se", c.se},
                         {"z", num(c.z)}});
    }
    j["oracle"] = {{"comparisons", comps},
                   {"count", oracle.comparisons.size()},
                   {"outside_2se", oracle.outside_2se},
                   {"outside_3se", oracle.outside_3se},
                   {"skipped_upsilon", oracle.skipped_upsilon},
                   {"passed", oracle.passed()}};
    ordered_json lim = ordered_json::array();
    std::size_t limit_failures = 0;
    for (const auto& l : limits) {
        if (!l.passed()) ++limit_failures;
        lim.push_back({{"name", l.name},
                       {"value", l.value},
                       {"reference", l.reference},
                       {"error", l.error()},
                       {"tolerance", l.tolerance},
                       {"passed", l.passed()}});
    }
    j["limits"] = {{"checks", lim}, {"failures", limit_failures}, {"passed", limit_failures == 0}};
    const bool passed = oracle.passed() && limit_failures == 0;
    j["passed"] = passed;
    const std::string file = path_in(ctx, "verify.json");
    write_json(file, j);
    if (auto* log = log_of(ctx)) {
        *log << "oracle: " << oracle.comparisons.size() << " comparisons, " << oracle.outside_2se
             << " beyond 2 s.e., " << oracle.outside_3se << " beyond 3 s.e. -> "
             << (oracle.passed() ? "pass" : "FAIL") << '\n'
             << "limits: " << limits.size() - limit_failures << "/" << limits.size() << " within tolerance\n"
             << "report -> " << file << '\n';
    }
    return passed ? ok : verification_failure;
}

}  // namespace lastlook::cli
