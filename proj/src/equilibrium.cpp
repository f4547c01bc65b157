#include "lastlook/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "lastlook/parallel.hpp"

namespace lastlook {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

double MarketState::total_la() const { return sum(n_la); }
double MarketState::total_st() const { return sum(n_st); }

double MarketState::alpha(std::size_t i) const {
    const double pop = population(i);
    return pop > 0.0 ? n_la.at(i) / pop : kNaN;
}

void MarketState::validate() const {
    if (n_la.size() != n_st.size()) throw std::domain_error("MarketState: population vectors differ in length");
    if (n_la.size() < 2) throw std::domain_error("MarketState: at least two venues required");
    for (std::size_t i = 0; i < n_la.size(); ++i) {
        if (!(n_la[i] >= 0.0) || !(n_st[i] >= 0.0) || !std::isfinite(n_la[i]) || !std::isfinite(n_st[i]))
            throw std::domain_error("MarketState: populations must be finite and non-negative");
    }
    if (!(migration_cost >= 0.0) || !std::isfinite(migration_cost))
        throw std::domain_error("MarketState: migration cost must be finite and non-negative");
}

VenueModel::VenueModel(const Environment& env, Venue venue, EvaluationMode mode, SolverConfig cfg)
    : env_(env), venue_(std::move(venue)), mode_(mode), cfg_(cfg) {
    env_.params(0.0).validate();
    cfg_.validate();
    coef_ = asymptotics::coefficients(env_.params(0.0), venue_.policy);
}

namespace {

VenueQuote la_only_quote() {
    VenueQuote q;
    q.spread = kInf;
    q.omega_st = kInf;
    q.omega_st_effective = kInf;
    q.omega_la = 0.0;
    q.psi_st = 1.0;
    q.psi_la = 0.0;
    q.upsilon = kNaN;
    return q;
}

void check_alpha(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::domain_error("VenueModel: alpha must lie in [0, 1]");
}

}  // namespace

VenueQuote VenueModel::quote(double alpha) const {
    check_alpha(alpha);
    if (alpha >= 1.0) return la_only_quote();
    const MarketParams p = env_.params(alpha);
    if (mode_ == EvaluationMode::asymptotic) return asymptotics::first_order_quote(coef_, p, venue_.policy);
    const SpreadSolution sol = solver::solve_spread_lastlook(p, venue_.policy, cfg_);
    return model::quote_at(sol.spread, p, venue_.policy);
}

Payoffs VenueModel::payoffs(double alpha) const {
    check_alpha(alpha);
    if (alpha >= 1.0) return {kInf, kInf, 0.0};
    const double sigma = env_.sigma;
    if (mode_ == EvaluationMode::asymptotic) {
        return {sigma * std::max(0.0, coef_.delta0 + coef_.delta1 * alpha), sigma * (coef_.eta0 + coef_.eta1 * alpha),
                sigma * (coef_.gamma0 + coef_.gamma1 * alpha)};
    }
    const MarketParams p = env_.params(alpha);
    const double spread = solver::solve_spread_lastlook(p, venue_.policy, cfg_).spread;
    return {spread, model::effective_cost_st(spread, p, venue_.policy),
            model::omega_la_lastlook(spread, p, venue_.policy)};
}

namespace equilibrium {

VenueQuote venue_quantities(const Venue& venue, const Environment& env, double alpha, EvaluationMode mode,
                            const SolverConfig& cfg) {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::domain_error("venue_quantities: alpha must lie in [0, 1)");
    return VenueModel(env, venue, mode, cfg).quote(alpha);
}

namespace {

std::vector<VenueModel> build_models(const Environment& env, const std::vector<Venue>& venues,
                                     const EquilibriumOptions& opt) {
    std::vector<VenueModel> models;
    models.reserve(venues.size());
    for (const auto& v : venues) models.emplace_back(env, v, opt.mode, opt.solver);
    return models;
}

bool within(double gap, double bound) { return std::abs(gap) <= bound; }

// Guards against rounding in totals minus venue counts.
double fraction(double la, double pop) { return std::clamp(la / pop, 0.0, 1.0); }

EquilibriumReport check(const MarketState& state, const std::vector<VenueModel>& models,
                        const EquilibriumOptions& opt) {
    EquilibriumReport rep;
    const std::size_t n = state.venues();
    rep.quotes.resize(n);
    rep.balance_residuals.assign(n, kNaN);
    std::size_t populated = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (state.empty(i)) continue;
        ++populated;
        const double a = state.alpha(i);
        const VenueQuote q = models[i].quote(a);
        rep.quotes[i] = q;
        if (a < 1.0) rep.balance_residuals[i] = (1.0 - a) * q.omega_st - a * q.omega_la;
    }
    rep.vacuous = populated < 2;
    const double bound = state.migration_cost + opt.tolerance;
    bool all = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!rep.quotes[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!rep.quotes[j]) continue;
            PairCheck pc;
            pc.i = i;
            pc.j = j;
            pc.st_gap = opt.trade_multiplier * (rep.quotes[i]->omega_st_effective - rep.quotes[j]->omega_st_effective);
            pc.la_gap = opt.trade_multiplier * (rep.quotes[i]->omega_la - rep.quotes[j]->omega_la);
            pc.st_ok = within(pc.st_gap, bound);
            pc.la_ok = within(pc.la_gap, bound);
            all = all && pc.st_ok && pc.la_ok;
            rep.pairs.push_back(pc);
        }
    }
    rep.in_equilibrium = all;
    return rep;
}

}  // namespace

EquilibriumReport is_equilibrium(const MarketState& state, const Environment& env, const std::vector<Venue>& venues,
                                 const EquilibriumOptions& opt) {
    state.validate();
    if (venues.size() != state.venues()) throw std::domain_error("is_equilibrium: venue count mismatch");
    return check(state, build_models(env, venues, opt), opt);
}

std::size_t EquilibriumRegion::count(const std::vector<std::uint8_t>& mask) const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

namespace {

std::size_t nearest(const std::vector<double>& axis, double v) {
    if (axis.size() < 2) return 0;
    const double step = axis[1] - axis[0];
    const double k = std::round((v - axis.front()) / step);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(axis.size() - 1)));
}

}  // namespace

bool EquilibriumRegion::contains(double n_la_1, double n_st_1, int cell_slack) const {
    const auto i0 = static_cast<long>(nearest(n_la_axis, n_la_1));
    const auto j0 = static_cast<long>(nearest(n_st_axis, n_st_1));
    const long r = resolution;
    for (long di = -cell_slack; di <= cell_slack; ++di) {
        for (long dj = -cell_slack; dj <= cell_slack; ++dj) {
            const long i = i0 + di;
            const long j = j0 + dj;
            if (i < 0 || j < 0 || i >= r || j >= r) continue;
            if (equilibrium[index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))]) return true;
        }
    }
    return false;
}

namespace {

std::vector<double> linspace(double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = hi * k / (n - 1);
    v.back() = hi;
    return v;
}

void require_two(const std::vector<Venue>& venues, const char* what) {
    if (venues.size() != 2) throw std::domain_error(std::string(what) + ": exactly two venues required");
}

void check_totals(const Totals& t) {
    if (!(t.n_la >= 0.0) || !(t.n_st >= 0.0) || !(t.total() > 0.0) || !std::isfinite(t.total()))
        throw std::domain_error("totals must be finite, non-negative and not both zero");
}

}  // namespace

EquilibriumRegion equilibrium_region(const Environment& env, const std::vector<Venue>& venues, const Totals& totals,
                                     double migration_cost, int resolution, const EquilibriumOptions& opt) {
    require_two(venues, "equilibrium_region");
    check_totals(totals);
    if (resolution < 2) throw std::domain_error("equilibrium_region: resolution must be at least 2");
    if (!(migration_cost >= 0.0)) throw std::domain_error("equilibrium_region: migration cost must be non-negative");
    const auto models = build_models(env, venues, opt);

    EquilibriumRegion r;
    r.resolution = resolution;
    r.totals = totals;
    r.migration_cost = migration_cost;
    r.n_la_axis = linspace(totals.n_la, resolution);
    r.n_st_axis = linspace(totals.n_st, resolution);
    const std::size_t cells = static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
    r.defined.assign(cells, 0);
    r.st_band.assign(cells, 0);
    r.la_band.assign(cells, 0);
    r.equilibrium.assign(cells, 0);
    const double bound = migration_cost + opt.tolerance;
    const auto res = static_cast<std::size_t>(resolution);

    parallel_for(cells, [&](std::size_t k) {
        const double x = r.n_la_axis[k / res];
        const double y = r.n_st_axis[k % res];
        const double pop1 = x + y;
        const double pop2 = totals.total() - pop1;
        if (!(pop1 > 0.0) || !(pop2 > 0.0)) return;
        const Payoffs p1 = models[0].payoffs(fraction(x, pop1));
        const Payoffs p2 = models[1].payoffs(fraction(totals.n_la - x, pop2));
        const bool st = within(opt.trade_multiplier * (p1.omega_st_effective - p2.omega_st_effective), bound);
        const bool la = within(opt.trade_multiplier * (p1.omega_la - p2.omega_la), bound);
        r.defined[k] = 1;
        r.st_band[k] = st ? 1 : 0;
        r.la_band[k] = la ? 1 : 0;
        r.equilibrium[k] = (st && la) ? 1 : 0;
    });
    return r;
}

ConicSection make_conic(double slope_1, double slope_2, double zeta, const Totals& totals) {
    const double m = totals.n_la;
    const double n = totals.total();
    const double diff = slope_2 - slope_1;
    ConicSection cs;
    cs.a = diff - zeta;
    cs.b = diff - 2.0 * zeta;
    cs.c = -zeta;
    cs.d = (zeta + slope_1) * n - slope_2 * m;
    cs.e = zeta * n - slope_2 * m;
    cs.zeta = zeta;
    cs.omega = cs.b * cs.b - 4.0 * cs.a * cs.c;
    const double scale = cs.b * cs.b + std::abs(4.0 * cs.a * cs.c);
    if (std::abs(cs.omega) <= 1e-12 * scale)
        cs.kind = ConicKind::parabola;
    else
        cs.kind = cs.omega > 0.0 ? ConicKind::hyperbola : ConicKind::ellipse;
    return cs;
}

ConicPair conic_boundaries(const Environment& env, const std::vector<Venue>& venues, const Totals& totals,
                           double migration_cost, Band band) {
    require_two(venues, "conic_boundaries");
    check_totals(totals);
    const MarketParams p = env.params(0.0);
    p.validate();
    const auto c1 = asymptotics::coefficients(p, venues[0].policy);
    const auto c2 = asymptotics::coefficients(p, venues[1].policy);
    ConicPair out;
    if (band == Band::slow_traders) {
        out.h0 = c1.eta0 - c2.eta0;
        out.slope_1 = c1.eta1;
        out.slope_2 = c2.eta1;
    } else {
        out.h0 = c1.gamma0 - c2.gamma0;
        out.slope_1 = c1.gamma1;
        out.slope_2 = c2.gamma1;
    }
    const double c = migration_cost / env.sigma;
    out.plus = make_conic(out.slope_1, out.slope_2, out.h0 - c, totals);
    out.minus = make_conic(out.slope_1, out.slope_2, out.h0 + c, totals);
    return out;
}

namespace {

enum class Trader { la, st };

// Two-venue quote evaluation with the prospective-migrant rule for empty venues.
class TwoVenues {
public:
    TwoVenues(const std::vector<VenueModel>& models, double total_la, double total_st)
        : models_(models), total_la_(total_la), total_st_(total_st) {}

    struct Snapshot {
        std::array<double, 2> la{}, st{};
        std::array<bool, 2> empty{};
        std::array<Payoffs, 2> pay{};
    };

    Snapshot at(double la1, double st1) const {
        Snapshot s;
        s.la = {la1, total_la_ - la1};
        s.st = {st1, total_st_ - st1};
        for (std::size_t i = 0; i < 2; ++i) {
            const double pop = s.la[i] + s.st[i];
            s.empty[i] = !(pop > 0.0);
            s.pay[i] = s.empty[i] ? Payoffs{kNaN, kNaN, kNaN} : models_[i].payoffs(fraction(s.la[i], pop));
        }
        return s;
    }

    // Quote venue `dest` would offer to an arriving trader of type t.
    Payoffs destination(const Snapshot& s, std::size_t dest, Trader t) const {
        if (!s.empty[dest]) return s.pay[dest];
        return models_[dest].payoffs(t == Trader::la ? 1.0 : 0.0);
    }

    // Gain per migration from `from` to the other venue, before the migration cost.
    double gain(const Snapshot& s, std::size_t from, Trader t) const {
        const std::size_t to = 1 - from;
        const Payoffs d = destination(s, to, t);
        if (t == Trader::la) return d.omega_la - s.pay[from].omega_la;
        return s.pay[from].omega_st_effective - d.omega_st_effective;
    }

private:
    const std::vector<VenueModel>& models_;
    double total_la_;
    double total_st_;
};

FlowRow make_row(double t, const TwoVenues::Snapshot& s) {
    FlowRow r;
    r.t = t;
    r.n_la_1 = s.la[0];
    r.n_st_1 = s.st[0];
    r.n_la_2 = s.la[1];
    r.n_st_2 = s.st[1];
    r.spread_1 = s.pay[0].spread;
    r.spread_2 = s.pay[1].spread;
    r.omega_st_effective_1 = s.pay[0].omega_st_effective;
    r.omega_st_effective_2 = s.pay[1].omega_st_effective;
    r.omega_la_1 = s.pay[0].omega_la;
    r.omega_la_2 = s.pay[1].omega_la;
    return r;
}

// +1: one trader moves into venue 1, -1: out of venue 1, 0: stays.
int decide(const TwoVenues& tv, const TwoVenues::Snapshot& s, Trader t, double mult, double cost) {
    const auto& pop = (t == Trader::la) ? s.la : s.st;
    double net_out = -kInf;
    double net_in = -kInf;
    if (pop[0] >= 1.0) net_out = mult * tv.gain(s, 0, t) - cost;
    if (pop[1] >= 1.0) net_in = mult * tv.gain(s, 1, t) - cost;
    const double best = std::max(net_out, net_in);
    if (!(best > 0.0) || net_out == net_in) return 0;
    return net_in > net_out ? 1 : -1;
}

void check_integral(const MarketState& st) {
    for (std::size_t i = 0; i < st.venues(); ++i) {
        if (st.n_la[i] != std::floor(st.n_la[i]) || st.n_st[i] != std::floor(st.n_st[i]))
            throw std::domain_error("sequential_migration: populations must be integers");
    }
}

}  // namespace

FlowTrajectory sequential_migration(const MarketState& initial, const Environment& env,
                                    const std::vector<Venue>& venues, const SequentialConfig& cfg,
                                    const EquilibriumOptions& opt) {
    initial.validate();
    require_two(venues, "sequential_migration");
    if (initial.venues() != 2) throw std::domain_error("sequential_migration: state must have two venues");
    check_integral(initial);
    if (cfg.max_steps < 0) throw std::domain_error("sequential_migration: max_steps must be non-negative");

    const auto models = build_models(env, venues, opt);
    const TwoVenues tv(models, initial.total_la(), initial.total_st());
    const double cost = initial.migration_cost + opt.tolerance;
    const double mult = opt.trade_multiplier;

    double la1 = initial.n_la[0];
    double st1 = initial.n_st[0];
    std::set<std::pair<double, double>> seen{{la1, st1}};
    FlowTrajectory traj;
    auto snap = tv.at(la1, st1);
    traj.rows.push_back(make_row(0.0, snap));

    for (int step = 1; step <= cfg.max_steps; ++step) {
        const int la_move = decide(tv, snap, Trader::la, mult, cost);
        int st_move = 0;
        if (cfg.order == MigrationOrder::la_first && la_move != 0) {
            st_move = decide(tv, tv.at(la1 + la_move, st1), Trader::st, mult, cost);
        } else {
            st_move = decide(tv, snap, Trader::st, mult, cost);
        }
        if (la_move == 0 && st_move == 0) {
            traj.status = FlowStatus::equilibrium;
            return traj;
        }
        la1 += la_move;
        st1 += st_move;
        snap = tv.at(la1, st1);
        traj.rows.push_back(make_row(step, snap));
        if (!seen.insert({la1, st1}).second) {
            traj.status = FlowStatus::oscillation;
            return traj;
        }
    }
    traj.status = FlowStatus::max_steps;
    return traj;
}

namespace {

struct Rates {
    double d_la = 0.0;
    double d_st = 0.0;
    std::array<double, 4> net{};  // la in, la out, st in, st out (venue 1)
    unsigned pattern = 0;         // bit k: flow k active
};

Rates rates(const TwoVenues& tv, double la1, double st1, double total_la, double total_st, const OdeConfig& cfg,
            double mult, double sigma) {
    const auto s = tv.at(la1, st1);
    Rates r;
    const std::array<bool, 4> gate{la1 < total_la, la1 > 0.0, st1 < total_st, st1 > 0.0};
    r.net[0] = s.la[1] > 0.0 ? mult * tv.gain(s, 1, Trader::la) - cfg.cost_la : -kInf;
    r.net[1] = s.la[0] > 0.0 ? mult * tv.gain(s, 0, Trader::la) - cfg.cost_la : -kInf;
    r.net[2] = s.st[1] > 0.0 ? mult * tv.gain(s, 1, Trader::st) - cfg.cost_st : -kInf;
    r.net[3] = s.st[0] > 0.0 ? mult * tv.gain(s, 0, Trader::st) - cfg.cost_st : -kInf;
    std::array<double, 4> flow{};
    for (std::size_t k = 0; k < 4; ++k) {
        // Infinite gains (LA-only limit) saturate at a large finite rate.
        const double v = std::min(std::max(r.net[k], 0.0), 1e6);
        flow[k] = gate[k] ? v : 0.0;
        if (flow[k] > 0.0) r.pattern |= 1u << k;
    }
    r.d_la = cfg.kappa_la / sigma * (flow[0] - flow[1]);
    r.d_st = cfg.kappa_st / sigma * (flow[2] - flow[3]);
    return r;
}

void validate(const OdeConfig& c) {
    auto pos = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!pos(c.kappa_la) || !pos(c.kappa_st)) throw std::domain_error("ode_flow: kappas must be positive");
    if (!(c.cost_la >= 0.0) || !(c.cost_st >= 0.0)) throw std::domain_error("ode_flow: costs must be non-negative");
    if (!pos(c.dt) || !pos(c.t_max)) throw std::domain_error("ode_flow: dt and t_max must be positive");
    if (!(c.gap_tol >= 0.0) || !(c.empty_threshold >= 0.0) || !pos(c.overshoot_tol))
        throw std::domain_error("ode_flow: tolerances must be non-negative");
    if (c.record_every < 1) throw std::domain_error("ode_flow: record_every must be at least 1");
}

}  // namespace

FlowTrajectory ode_flow(const MarketState& initial, const Environment& env, const std::vector<Venue>& venues,
                        const OdeConfig& cfg, const EquilibriumOptions& opt) {
    initial.validate();
    validate(cfg);
    require_two(venues, "ode_flow");
    if (initial.venues() != 2) throw std::domain_error("ode_flow: state must have two venues");

    const auto models = build_models(env, venues, opt);
    const double total_la = initial.total_la();
    const double total_st = initial.total_st();
    const TwoVenues tv(models, total_la, total_st);
    const double sigma = env.sigma;
    const double mult = opt.trade_multiplier;
    const double dt_min = cfg.dt / 1024.0;
    const double rate_tol_la = cfg.kappa_la / sigma * cfg.gap_tol;
    const double rate_tol_st = cfg.kappa_st / sigma * cfg.gap_tol;

    auto f = [&](double la, double st) { return rates(tv, la, st, total_la, total_st, cfg, mult, sigma); };
    auto clamp_la = [&](double v) { return std::clamp(v, 0.0, total_la); };
    auto clamp_st = [&](double v) { return std::clamp(v, 0.0, total_st); };

    double la = initial.n_la[0];
    double st = initial.n_st[0];
    double t = 0.0;
    FlowTrajectory traj;
    traj.rows.push_back(make_row(t, tv.at(la, st)));
    long accepted = 0;

    auto record = [&] { traj.rows.push_back(make_row(t, tv.at(la, st))); };

    while (true) {
        if (la + st <= cfg.empty_threshold || (total_la - la) + (total_st - st) <= cfg.empty_threshold) {
            traj.status = FlowStatus::corner;
            break;
        }
        const Rates r0 = f(la, st);
        const bool gains_closed = std::all_of(r0.net.begin(), r0.net.end(), [&](double v) { return v <= cfg.gap_tol; });
        if (gains_closed) {
            traj.status = FlowStatus::equilibrium;
            break;
        }
        if (std::abs(r0.d_la) <= rate_tol_la && std::abs(r0.d_st) <= rate_tol_st) {
            traj.status = FlowStatus::boundary;
            break;
        }
        if (t >= cfg.t_max) {
            traj.status = FlowStatus::max_steps;
            break;
        }

        double h = std::min(cfg.dt, cfg.t_max - t);
        double la_new = la;
        double st_new = st;
        while (true) {
            const Rates k1 = r0;
            const Rates k2 = f(clamp_la(la + 0.5 * h * k1.d_la), clamp_st(st + 0.5 * h * k1.d_st));
            const Rates k3 = f(clamp_la(la + 0.5 * h * k2.d_la), clamp_st(st + 0.5 * h * k2.d_st));
            const Rates k4 = f(clamp_la(la + h * k3.d_la), clamp_st(st + h * k3.d_st));
            la_new = la + h / 6.0 * (k1.d_la + 2.0 * k2.d_la + 2.0 * k3.d_la + k4.d_la);
            st_new = st + h / 6.0 * (k1.d_st + 2.0 * k2.d_st + 2.0 * k3.d_st + k4.d_st);
            const bool kink = k4.pattern != k1.pattern || k2.pattern != k1.pattern || k3.pattern != k1.pattern;
            if (kink && h > dt_min) {
                h *= 0.5;
                continue;
            }
            break;
        }
        const double over_la = std::max(-la_new, la_new - total_la);
        const double over_st = std::max(-st_new, st_new - total_st);
        if (over_la > cfg.overshoot_tol * std::max(total_la, 1.0) ||
            over_st > cfg.overshoot_tol * std::max(total_st, 1.0))
            throw StepSizeError("ode_flow: step overshoots the population bounds; reduce dt");
        la = clamp_la(la_new);
        st = clamp_st(st_new);
        t += h;
        if (++accepted % cfg.record_every == 0) record();
    }
    if (traj.rows.back().t != t) record();
    return traj;
}

std::string to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::equilibrium: return "equilibrium";
        case FlowStatus::corner: return "corner";
        case FlowStatus::boundary: return "boundary";
        case FlowStatus::oscillation: return "oscillation";
        case FlowStatus::max_steps: return "max_steps";
    }
    return "unknown";
}

std::string to_string(ConicKind k) {
    switch (k) {
        case ConicKind::ellipse: return "ellipse";
        case ConicKind::parabola: return "parabola";
        case ConicKind::hyperbola: return "hyperbola";
    }
    return "unknown";
}

}  // namespace equilibrium
}  // namespace lastlook
