#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace lastlook::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Cursor over a JSON object that records which keys were consumed.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_, "expected an object");
    }

    [[nodiscard]] std::string at(const std::string& key) const { return path_ + "." + key; }
    [[nodiscard]] bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }
    [[nodiscard]] const json& get(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void number(const std::string& key, double& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ValidationError(at(key), "expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw ValidationError(at(key), "must be finite");
    }
    void optional_number(const std::string& key, std::optional<double>& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (v.is_null()) {
            out.reset();
            return;
        }
        double d = 0.0;
        number(key, d);
        out = d;
    }
    void integer(const std::string& key, int& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ValidationError(at(key), "expected an integer");
        out = v.get<int>();
    }
    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ValidationError(at(key), "expected a non-negative integer");
        out = v.get<std::uint64_t>();
    }
    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ValidationError(at(key), "expected a boolean");
        out = v.get<bool>();
    }
    void string(const std::string& key, std::string& out, const std::set<std::string>& allowed = {}) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ValidationError(at(key), "expected a string");
        out = v.get<std::string>();
        if (!allowed.empty() && !allowed.count(out)) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
            throw ValidationError(at(key), "expected one of " + opts);
        }
    }
    void numbers(const std::string& key, std::vector<double>& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_array()) throw ValidationError(at(key), "expected an array of numbers");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ValidationError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            out.push_back(v[i].get<double>());
            if (!std::isfinite(out.back()))
                throw ValidationError(at(key) + "[" + std::to_string(i) + "]", "must be finite");
        }
    }

    // Fails on the first key that was never consumed.
    void finish() const {
        for (const auto& [k, _] : j_.items()) {
            if (!seen_.count(k)) throw ValidationError(at(k), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
void guard(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(path, e.what());
    }
}

void parse_delta(Obj o, DeltaSpec& d) {
    o.string("rule", d.rule, {"proportional", "constant", "zero"});
    o.number("value", d.value);
    o.finish();
    if (d.rule != "zero" && d.value < 0.0) throw ValidationError(o.at("value"), "must be non-negative");
}

VenueSpec parse_venue(Obj o) {
    VenueSpec v;
    o.string("label", v.label);
    o.optional_number("xi", v.xi);
    if (o.has("delta")) parse_delta(Obj(o.get("delta"), o.at("delta")), v.delta);
    o.finish();
    if (v.xi && !(*v.xi < 0.0)) throw ValidationError(o.at("xi"), "threshold must be negative (null for no Last Look)");
    return v;
}

}  // namespace

MarketParams Scenario::params() const { return MarketParams(sigma, Correlation(rho), alpha, beta); }

Environment Scenario::environment() const { return {sigma, Correlation(rho), beta}; }

DeltaRule Scenario::delta_rule(std::size_t venue) const {
    const DeltaSpec& d = venues.at(venue).delta;
    if (d.rule == "constant") return constant_delta(d.value);
    if (d.rule == "zero") return zero_delta();
    return proportional_delta(d.value);
}

LastLookPolicy Scenario::policy(std::size_t venue) const {
    const VenueSpec& v = venues.at(venue);
    if (!v.xi) return LastLookPolicy::none();
    return LastLookPolicy(*v.xi, delta_rule(venue));
}

std::vector<Venue> Scenario::venue_list() const {
    std::vector<Venue> out;
    for (std::size_t i = 0; i < venues.size(); ++i) out.push_back({venues[i].label, policy(i)});
    return out;
}

EvaluationMode Scenario::evaluation_mode() const {
    return mode == "asymptotic" ? EvaluationMode::asymptotic : EvaluationMode::exact;
}

EquilibriumOptions Scenario::options() const {
    EquilibriumOptions o;
    o.mode = evaluation_mode();
    o.solver = solver;
    o.trade_multiplier = migration.trade_multiplier;
    return o;
}

MarketState Scenario::state() const { return {n_la, n_st, migration.cost}; }

equilibrium::OdeConfig Scenario::ode_config() const {
    equilibrium::OdeConfig c = ode;
    c.cost_la = migration.cost_la.value_or(migration.cost);
    c.cost_st = migration.cost_st.value_or(migration.cost);
    return c;
}

Scenario parse_scenario(const json& doc) {
    Scenario s;
    Obj root(doc, "$");
    if (root.has("market")) {
        Obj m(root.get("market"), "$.market");
        m.number("sigma", s.sigma);
        m.number("rho", s.rho);
        m.number("beta", s.beta);
        m.number("alpha", s.alpha);
        m.finish();
        if (!(s.sigma > 0.0) || !std::isfinite(s.sigma)) throw ValidationError("$.market.sigma", "must be positive");
        if (!(s.rho > -1.0 && s.rho < 1.0)) throw ValidationError("$.market.rho", "must lie in (-1, 1)");
        if (!(s.beta >= 0.0 && s.beta <= 1.0)) throw ValidationError("$.market.beta", "must lie in [0, 1]");
        if (!(s.alpha >= 0.0 && s.alpha <= 1.0)) throw ValidationError("$.market.alpha", "must lie in [0, 1]");
        guard("$.market", [&] { s.params().validate(); });
    }
    root.string("mode", s.mode, {"exact", "asymptotic"});
    root.unsigned64("seed", s.seed);
    if (root.has("venues")) {
        const json& v = root.get("venues");
        if (!v.is_array() || v.empty()) throw ValidationError("$.venues", "expected a non-empty array");
        s.venues.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string p = "$.venues[" + std::to_string(i) + "]";
            s.venues.push_back(parse_venue(Obj(v[i], p)));
            guard(p, [&] { (void)s.policy(i).rejection_cost(); });
        }
    }
    if (root.has("populations")) {
        Obj p(root.get("populations"), "$.populations");
        p.numbers("n_la", s.n_la);
        p.numbers("n_st", s.n_st);
        p.finish();
        if (s.n_la.size() != s.venues.size() || s.n_st.size() != s.venues.size())
            throw ValidationError("$.populations", "need one n_la and one n_st entry per venue");
    }
    if (root.has("migration")) {
        Obj m(root.get("migration"), "$.migration");
        m.string("dynamics", s.migration.dynamics, {"sequential", "ode"});
        m.number("cost", s.migration.cost);
        m.optional_number("cost_la", s.migration.cost_la);
        m.optional_number("cost_st", s.migration.cost_st);
        m.string("order", s.migration.order, {"simultaneous", "la_first"});
        m.integer("max_steps", s.migration.max_steps);
        m.number("trade_multiplier", s.migration.trade_multiplier);
        m.finish();
        if (s.migration.cost < 0.0) throw ValidationError("$.migration.cost", "must be non-negative");
        if (s.migration.max_steps < 0) throw ValidationError("$.migration.max_steps", "must be non-negative");
        if (!(s.migration.trade_multiplier > 0.0))
            throw ValidationError("$.migration.trade_multiplier", "must be positive");
    }
    if (!s.n_la.empty()) guard("$.populations", [&] { s.state().validate(); });
    if (root.has("ode")) {
        Obj o(root.get("ode"), "$.ode");
        o.number("kappa_la", s.ode.kappa_la);
        o.number("kappa_st", s.ode.kappa_st);
        o.number("dt", s.ode.dt);
        o.number("t_max", s.ode.t_max);
        o.number("gap_tol", s.ode.gap_tol);
        o.number("empty_threshold", s.ode.empty_threshold);
        o.number("overshoot_tol", s.ode.overshoot_tol);
        o.integer("record_every", s.ode.record_every);
        o.finish();
    }
    {
        const auto c = s.ode_config();
        auto pos = [](double v) { return v > 0.0; };
        if (!pos(c.kappa_la) || !pos(c.kappa_st)) throw ValidationError("$.ode", "kappas must be positive");
        if (!pos(c.dt) || !pos(c.t_max)) throw ValidationError("$.ode", "dt and t_max must be positive");
        if (c.cost_la < 0.0 || c.cost_st < 0.0) throw ValidationError("$.migration", "costs must be non-negative");
        if (c.record_every < 1) throw ValidationError("$.ode.record_every", "must be at least 1");
        if (c.gap_tol < 0.0 || c.empty_threshold < 0.0 || !pos(c.overshoot_tol))
            throw ValidationError("$.ode", "tolerances must be non-negative");
    }
    if (root.has("solver")) {
        Obj o(root.get("solver"), "$.solver");
        o.number("abs_tol", s.solver.abs_tol);
        o.integer("max_iter", s.solver.max_iter);
        o.number("bracket_hi", s.solver.bracket_hi);
        o.finish();
        guard("$.solver", [&] { s.solver.validate(); });
    }
    if (root.has("sweep")) {
        Obj o(root.get("sweep"), "$.sweep");
        o.string("variable", s.sweep.variable, {"alpha", "xi_over_sigma", "rho"});
        o.numbers("values", s.sweep.values);
        if (o.has("series")) {
            Obj se(o.get("series"), "$.sweep.series");
            se.string("variable", s.sweep.series_variable, {"alpha", "xi_over_sigma", "rho"});
            se.numbers("values", s.sweep.series_values);
            se.finish();
            if (s.sweep.series_variable == s.sweep.variable)
                throw ValidationError("$.sweep.series.variable", "must differ from the sweep variable");
        }
        o.finish();
    }
    if (root.has("threshold_search")) {
        Obj o(root.get("threshold_search"), "$.threshold_search");
        o.number("xi_lo", s.threshold.search.xi_lo);
        o.number("xi_hi", s.threshold.search.xi_hi);
        o.integer("grid_points", s.threshold.search.grid_points);
        o.number("xi_tol", s.threshold.search.xi_tol);
        o.integer("curve_points", s.threshold.curve_points);
        o.finish();
        const auto& t = s.threshold.search;
        if (!(t.xi_lo < t.xi_hi) || !(t.xi_hi < 0.0))
            throw ValidationError("$.threshold_search", "need xi_lo < xi_hi < 0");
        if (t.grid_points < 3) throw ValidationError("$.threshold_search.grid_points", "must be at least 3");
        if (!(t.xi_tol > 0.0)) throw ValidationError("$.threshold_search.xi_tol", "must be positive");
        if (s.threshold.curve_points < 0)
            throw ValidationError("$.threshold_search.curve_points", "must be non-negative");
    }
    if (root.has("region")) {
        Obj o(root.get("region"), "$.region");
        o.integer("resolution", s.region_resolution);
        o.finish();
        if (s.region_resolution < 2) throw ValidationError("$.region.resolution", "must be at least 2");
    }
    if (root.has("simulation")) {
        Obj o(root.get("simulation"), "$.simulation");
        o.unsigned64("n_samples", s.simulation.n_samples);
        o.boolean("antithetic", s.simulation.antithetic);
        if (o.has("grid")) {
            Obj g(o.get("grid"), "$.simulation.grid");
            auto& gr = s.simulation.grid;
            g.numbers("rho", gr.rho);
            g.numbers("beta", gr.beta);
            g.numbers("xi_over_sigma", gr.xi_over_sigma);
            g.numbers("spread_over_sigma", gr.spread_over_sigma);
            g.number("alpha", gr.alpha);
            g.number("min_expected_rejections", gr.min_expected_rejections);
            g.finish();
            for (std::size_t i = 0; i < gr.rho.size(); ++i)
                guard("$.simulation.grid.rho[" + std::to_string(i) + "]", [&] { (void)Correlation(gr.rho[i]); });
            for (std::size_t i = 0; i < gr.beta.size(); ++i)
                if (!(gr.beta[i] >= 0.0 && gr.beta[i] <= 1.0))
                    throw ValidationError("$.simulation.grid.beta[" + std::to_string(i) + "]", "must lie in [0, 1]");
            for (std::size_t i = 0; i < gr.xi_over_sigma.size(); ++i)
                if (!(gr.xi_over_sigma[i] < 0.0))
                    throw ValidationError("$.simulation.grid.xi_over_sigma[" + std::to_string(i) + "]",
                                          "must be negative");
            for (std::size_t i = 0; i < gr.spread_over_sigma.size(); ++i)
                if (!(gr.spread_over_sigma[i] >= 0.0))
                    throw ValidationError("$.simulation.grid.spread_over_sigma[" + std::to_string(i) + "]",
                                          "must be non-negative");
            if (!(gr.alpha >= 0.0 && gr.alpha <= 1.0))
                throw ValidationError("$.simulation.grid.alpha", "must lie in [0, 1]");
        }
        o.finish();
        if (s.simulation.n_samples < 1) throw ValidationError("$.simulation.n_samples", "must be at least 1");
    }
    root.finish();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("$", "cannot open scenario file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("$", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

namespace {

ordered_json opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

ordered_json to_json(const Scenario& s) {
    ordered_json j;
    j["market"] = {{"sigma", s.sigma}, {"rho", s.rho}, {"beta", s.beta}, {"alpha", s.alpha}};
    j["mode"] = s.mode;
    j["seed"] = s.seed;
    j["venues"] = ordered_json::array();
    for (const auto& v : s.venues) {
        j["venues"].push_back({{"label", v.label},
                               {"xi", opt(v.xi)},
                               {"delta", {{"rule", v.delta.rule}, {"value", v.delta.value}}}});
    }
    if (!s.n_la.empty() || !s.n_st.empty()) j["populations"] = {{"n_la", s.n_la}, {"n_st", s.n_st}};
    const auto& m = s.migration;
    j["migration"] = {{"dynamics", m.dynamics},       {"cost", m.cost},           {"cost_la", opt(m.cost_la)},
                      {"cost_st", opt(m.cost_st)},   {"order", m.order},         {"max_steps", m.max_steps},
                      {"trade_multiplier", m.trade_multiplier}};
    const auto& o = s.ode;
    j["ode"] = {{"kappa_la", o.kappa_la},   {"kappa_st", o.kappa_st},
                {"dt", o.dt},               {"t_max", o.t_max},
                {"gap_tol", o.gap_tol},     {"empty_threshold", o.empty_threshold},
                {"overshoot_tol", o.overshoot_tol}, {"record_every", o.record_every}};
    j["solver"] = {{"abs_tol", s.solver.abs_tol}, {"max_iter", s.solver.max_iter}, {"bracket_hi", s.solver.bracket_hi}};
    ordered_json sweep = {{"variable", s.sweep.variable}, {"values", s.sweep.values}};
    if (!s.sweep.series_variable.empty())
        sweep["series"] = {{"variable", s.sweep.series_variable}, {"values", s.sweep.series_values}};
    j["sweep"] = sweep;
    const auto& t = s.threshold.search;
    j["threshold_search"] = {{"xi_lo", t.xi_lo},     {"xi_hi", t.xi_hi},
                             {"grid_points", t.grid_points}, {"xi_tol", t.xi_tol},
                             {"curve_points", s.threshold.curve_points}};
    j["region"] = {{"resolution", s.region_resolution}};
    const auto& g = s.simulation.grid;
    j["simulation"] = {{"n_samples", s.simulation.n_samples},
                       {"antithetic", s.simulation.antithetic},
                       {"grid",
                        {{"rho", g.rho},
                         {"beta", g.beta},
                         {"xi_over_sigma", g.xi_over_sigma},
                         {"spread_over_sigma", g.spread_over_sigma},
                         {"alpha", g.alpha},
                         {"min_expected_rejections", g.min_expected_rejections}}}};
    return j;
}

}  // namespace lastlook::cli
