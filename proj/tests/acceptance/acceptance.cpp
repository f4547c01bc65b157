// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lastlook/asymptotics.hpp"
#include "lastlook/equilibrium.hpp"
#include "lastlook/solver.hpp"
#include "lastlook/verification.hpp"

using namespace lastlook;
using namespace lastlook::equilibrium;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "MISS ") + what;
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const Environment kEnv{1.0, Correlation(0.5), 0.8};
std::vector<Venue> two_venues(double xi1) { return {{"ll", LastLookPolicy(xi1)}, {"plain", LastLookPolicy::none()}}; }

Outcome no_lastlook_spread() {
    Outcome o;
    const double s = solver::solve_spread_no_lastlook(MarketParams(1.0, Correlation(0.0), 0.15, 1.0)).spread;
    o.require(std::abs(s - 0.12) <= 0.005, fmt("alpha=.15 spread %.5f", s));
    double worst = 0.0;
    for (double a : {0.001, 0.005, 0.01, 0.015, 0.02}) {
        const double x = solver::solve_spread_no_lastlook(MarketParams(1.0, Correlation(0.0), a, 1.0)).spread;
        const double lead = std::sqrt(2.0 / std::numbers::pi) * a;
        worst = std::max(worst, std::abs(x - lead) / lead);
    }
    o.require(worst <= 0.1, fmt("max rel. gap to sqrt(2/pi) alpha over alpha<=.02: %.4f", worst));
    return o;
}

Outcome optimal_threshold() {
    Outcome o;
    const auto best =
        solver::optimal_rejection_threshold(MarketParams(1.0, Correlation(0.5), 0.15, 0.8), proportional_delta(0.5));
    o.require(std::abs(best.xi + 2.49) <= 0.05, fmt("xi*/sigma %.4f", best.xi));
    o.require(std::abs(best.spread - 0.065) <= 0.005, fmt("spread %.4f", best.spread));
    return o;
}

struct Panel {
    double xi1;
    double la1, la2, st1, st2;
    double spread1, spread2, cost1, cost2, la_profit1, la_profit2;
};

Outcome table1() {
    Outcome o;
    const Panel panels[] = {{-4.0, 99, 101, 370, 430, 0.16, 0.15, 0.17, 0.15, 0.61, 0.65},
                            {-3.5, 85, 115, 371, 429, 0.13, 0.17, 0.14, 0.17, 0.59, 0.64}};
    for (const auto& p : panels) {
        const MarketState init{{125, 75}, {375, 425}, 0.05};
        const auto traj = sequential_migration(init, kEnv, two_venues(p.xi1));
        const auto& f = traj.terminal();
        const std::string tag = fmt("xi1=%g", p.xi1);
        o.require(traj.status == FlowStatus::equilibrium, tag + " status " + to_string(traj.status));
        auto count = [&](const char* name, double got, double want) {
            o.require(std::abs(got - want) <= 2.0, fmt("%s %s %.0f (expected %.0f)", tag.c_str(), name, got, want));
        };
        count("N_LA1", f.n_la_1, p.la1);
        count("N_LA2", f.n_la_2, p.la2);
        count("N_ST1", f.n_st_1, p.st1);
        count("N_ST2", f.n_st_2, p.st2);
        auto quote = [&](const char* name, double got, double want) {
            o.require(std::abs(got - want) <= 0.01 + 1e-12,
                      fmt("%s %s %.4f (expected %.2f)", tag.c_str(), name, got, want));
        };
        quote("spread1", f.spread_1, p.spread1);
        quote("spread2", f.spread_2, p.spread2);
        quote("cost1", f.omega_st_effective_1, p.cost1);
        quote("cost2", f.omega_st_effective_2, p.cost2);
        quote("la1", f.omega_la_1, p.la_profit1);
        quote("la2", f.omega_la_2, p.la_profit2);
    }
    return o;
}

EquilibriumOptions asymptotic() {
    EquilibriumOptions opt;
    opt.mode = EvaluationMode::asymptotic;
    return opt;
}

const Totals kTotals{200, 800};

EquilibriumRegion& reference_region() {
    static EquilibriumRegion reg = equilibrium_region(kEnv, two_venues(-3.5), kTotals, 0.05, 200, asymptotic());
    return reg;
}

Outcome region_existence() {
    Outcome o;
    const auto& wide = reference_region();
    const auto narrow = equilibrium_region(kEnv, two_venues(-3.5), kTotals, 0.025, 200, asymptotic());
    o.require(!wide.empty(), fmt("c=.05: %zu equilibrium cells", wide.count(wide.equilibrium)));
    o.require(narrow.empty(), fmt("c=.025: %zu equilibrium cells", narrow.count(narrow.equilibrium)));
    return o;
}

Outcome flow_outcomes() {
    Outcome o;
    const auto venues = two_venues(-3.5);
    for (double c : {0.025, 0.05}) {
        OdeConfig cfg;
        cfg.cost_la = cfg.cost_st = c;
        int corner1 = 0, corner2 = 0, interior = 0, interior_ok = 0, other = 0;
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const double la = kTotals.n_la * (i + 0.5) / 10.0, st = kTotals.n_st * (j + 0.5) / 10.0;
                const MarketState init{{la, kTotals.n_la - la}, {st, kTotals.n_st - st}, c};
                const auto traj = ode_flow(init, kEnv, venues, cfg, asymptotic());
                const auto& f = traj.terminal();
                if (traj.status == FlowStatus::corner) {
                    (f.n_la_2 + f.n_st_2 <= cfg.empty_threshold ? corner1 : corner2)++;
                } else if (traj.status == FlowStatus::equilibrium) {
                    ++interior;
                    auto opt = asymptotic();
                    opt.tolerance = cfg.gap_tol;
                    const MarketState fin{{f.n_la_1, f.n_la_2}, {f.n_st_1, f.n_st_2}, c};
                    if (is_equilibrium(fin, kEnv, venues, opt).in_equilibrium &&
                        reference_region().contains(f.n_la_1, f.n_st_1, 2))
                        ++interior_ok;
                } else {
                    ++other;
                }
            }
        }
        const std::string tally = fmt("c=%g: %d venue-1 corners, %d venue-2 corners, %d interior (%d verified), %d other",
                                      c, corner1, corner2, interior, interior_ok, other);
        if (c < 0.04) {
            o.require(corner1 + corner2 == 100, tally);
        } else {
            o.require(corner2 == 0 && other == 0 && interior_ok == interior, tally);
        }
    }
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    const auto rep = verification::run_oracle_suite(verification::OracleGrid{}, SimConfig{1'000'000, 2018, false});
    const double frac = double(rep.outside_2se) / double(rep.comparisons.size());
    double worst = 0.0;
    const verification::Comparison* w = nullptr;
    for (const auto& c : rep.comparisons)
        if (std::abs(c.z) > worst) {
            worst = std::abs(c.z);
            w = &c;
        }
    o.require(rep.outside_3se == 0,
              fmt("%zu of %zu beyond 3 s.e. (max |z| %.2f: %s rho=%g beta=%g xi=%g D=%g)", rep.outside_3se,
                  rep.comparisons.size(), worst, w ? w->quantity.c_str() : "-", w ? w->rho : 0.0, w ? w->beta : 0.0,
                  w ? w->xi_over_sigma : 0.0, w ? w->spread_over_sigma : 0.0));
    o.require(frac <= 0.05, fmt("%.1f%% beyond 2 s.e.", 100.0 * frac));
    return o;
}

Outcome limit_reductions() {
    Outcome o;
    std::size_t failed = 0;
    double worst = 0.0;
    const auto checks = verification::run_limit_suite();
    for (const auto& c : checks) {
        if (!c.passed()) {
            ++failed;
            o.require(false, c.name + fmt(" error %.3g", c.error()));
        }
        worst = std::max(worst, c.error());
    }
    o.require(failed == 0, fmt("%zu checks, max error %.3g", checks.size(), worst));
    return o;
}

Outcome derivative_checks() {
    Outcome o;
    constexpr double h = 1e-5;
    double worst_a = 0.0, worst_b = 0.0;
    int n = 0;
    for (double rho : {-0.5, 0.5})
        for (double xi : {-4.0, -3.0, -2.0, -1.5, -1.0})
            for (double d : {0.05, 0.3}) {
                const MarketParams p(1.0, Correlation(rho), 0.1, 0.8);
                const LastLookPolicy pol(xi);
                const double fa = (model::a_term(d + h, p, pol) - model::a_term(d - h, p, pol)) / (2 * h);
                const double fb = (model::b_term(d + h, p, pol) - model::b_term(d - h, p, pol)) / (2 * h);
                worst_a = std::max(worst_a, std::abs(asymptotics::a_prime(d, p, pol) - fa));
                worst_b = std::max(worst_b, std::abs(asymptotics::b_prime(d, p, pol) - fb));
                ++n;
            }
    o.require(worst_a <= 1e-6, fmt("A' max |err| %.2e over %d points", worst_a, n));
    o.require(worst_b <= 1e-6, fmt("B' max |err| %.2e", worst_b));
    return o;
}

Outcome conic_anchors() {
    Outcome o;
    double anchor = 0.0, disc = 0.0;
    for (auto band : {Band::slow_traders, Band::latency_arbitrageurs})
        for (double c : {0.025, 0.05}) {
            const auto pair = conic_boundaries(kEnv, two_venues(-3.5), kTotals, c, band);
            for (const auto* q : {&pair.plus, &pair.minus}) {
                anchor = std::max({anchor, std::abs(q->evaluate(0, 0)), std::abs(q->evaluate(kTotals.n_la, kTotals.n_st))});
                disc = std::max(disc, std::abs(q->omega - std::pow(pair.slope_2 - pair.slope_1, 2)));
            }
        }
    o.require(anchor <= 1e-9, fmt("max |Q| at anchors %.2e", anchor));
    o.require(disc <= 1e-12, fmt("max discriminant error %.2e", disc));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"no-last-look spread", no_lastlook_spread},
        {"optimal threshold", optimal_threshold},
        {"two-venue sequential migration", table1},
        {"equilibrium region existence", region_existence},
        {"continuous flow outcomes", flow_outcomes},
        {"closed forms vs Monte Carlo", oracle_equivalence},
        {"limit reductions", limit_reductions},
        {"derivative checks", derivative_checks},
        {"conic anchors", conic_anchors},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const Outcome out = criteria[k].second();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!out.pass) ++failures;
        std::printf("%s criterion %zu (%s) [%.2fs]: %s\n", out.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, secs,
                    out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
