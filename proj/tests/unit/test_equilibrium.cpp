#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lastlook/equilibrium.hpp"

using namespace lastlook;
using namespace lastlook::equilibrium;

namespace {

const Environment kEnv{1.0, Correlation(0.5), 0.8};

std::vector<Venue> venues(double xi1) { return {{"ll", LastLookPolicy(xi1)}, {"plain", LastLookPolicy::none()}}; }

EquilibriumOptions asym() {
    EquilibriumOptions o;
    o.mode = EvaluationMode::asymptotic;
    return o;
}

}  // namespace

TEST_CASE("venue quantities at the 125/375 vs 75/425 split") {
    const auto plain = venue_quantities({"plain", LastLookPolicy::none()}, kEnv, 0.15, EvaluationMode::exact);
    CHECK(plain.spread == doctest::Approx(0.12).epsilon(0.01 / 0.12));
    CHECK(plain.omega_st_effective == doctest::Approx(0.12).epsilon(0.01 / 0.12));
    CHECK(plain.omega_la == doctest::Approx(0.68).epsilon(0.01 / 0.68));
    const auto ll = venue_quantities({"ll", LastLookPolicy(-4.0)}, kEnv, 0.25, EvaluationMode::exact);
    CHECK(ll.spread == doctest::Approx(0.19).epsilon(0.01 / 0.19));
    CHECK(ll.omega_st_effective == doctest::Approx(0.20).epsilon(0.01 / 0.20));
    CHECK(ll.omega_la == doctest::Approx(0.58).epsilon(0.01 / 0.58));
    CHECK_THROWS_AS((void)venue_quantities({"x", LastLookPolicy::none()}, kEnv, 1.0, EvaluationMode::exact),
                    std::domain_error);
}

TEST_CASE("equilibrium check on start and end states") {
    const MarketState fin{{99, 101}, {370, 430}, 0.05};
    const auto r = is_equilibrium(fin, kEnv, venues(-4.0));
    CHECK(r.in_equilibrium);
    CHECK_FALSE(r.vacuous);
    REQUIRE(r.pairs.size() == 1);
    CHECK(std::abs(r.pairs[0].st_gap) <= 0.05);
    for (double res : r.balance_residuals) CHECK(std::abs(res) < 1e-9);

    const MarketState init{{125, 75}, {375, 425}, 0.05};
    CHECK_FALSE(is_equilibrium(init, kEnv, venues(-4.0)).in_equilibrium);

    const MarketState corner{{200, 0}, {800, 0}, 0.05};
    const auto rc = is_equilibrium(corner, kEnv, venues(-4.0));
    CHECK(rc.vacuous);
    CHECK_FALSE(rc.quotes[1].has_value());

    CHECK_THROWS_AS((void)is_equilibrium(MarketState{{1, 2}, {3}, 0.05}, kEnv, venues(-4.0)), std::domain_error);
    CHECK_THROWS_AS((void)is_equilibrium(MarketState{{-1, 2}, {3, 4}, 0.05}, kEnv, venues(-4.0)),
                    std::domain_error);
}

TEST_CASE("conic anchors, discriminant and classification") {
    const Totals t{200, 800};
    for (auto band : {Band::slow_traders, Band::latency_arbitrageurs}) {
        for (double c : {0.025, 0.05}) {
            const auto pair = conic_boundaries(kEnv, venues(-3.5), t, c, band);
            for (const auto* q : {&pair.plus, &pair.minus}) {
                CHECK(std::abs(q->evaluate(0, 0)) < 1e-9);
                CHECK(std::abs(q->evaluate(t.n_la, t.n_st)) < 1e-9);
                const double expect = std::pow(pair.slope_2 - pair.slope_1, 2);
                CHECK(std::abs(q->omega - expect) < 1e-12);
                CHECK(q->kind == (q->omega > 0 ? ConicKind::hyperbola : ConicKind::ellipse));
            }
            CHECK(pair.plus.zeta == doctest::Approx(pair.h0 - c));
            CHECK(pair.minus.zeta == doctest::Approx(pair.h0 + c));
        }
    }
    // Identical slopes: vanishing discriminant.
    const auto same = make_conic(0.4, 0.4, 0.01, t);
    CHECK(same.kind == ConicKind::parabola);
    CHECK(same.omega == 0.0);
}

TEST_CASE("region masks agree with the conic bands away from their edges") {
    const Totals t{200, 800};
    const auto reg = equilibrium_region(kEnv, venues(-3.5), t, 0.05, 120, asym());
    const auto st = conic_boundaries(kEnv, venues(-3.5), t, 0.05, Band::slow_traders);
    const auto la = conic_boundaries(kEnv, venues(-3.5), t, 0.05, Band::latency_arbitrageurs);
    const int r = reg.resolution;
    auto inside = [&](const ConicPair& p, int i, int j) {
        return p.in_band(reg.n_la_axis[static_cast<std::size_t>(i)], reg.n_st_axis[static_cast<std::size_t>(j)]);
    };
    auto on_edge = [&](const ConicPair& p, int i, int j) {
        const bool here = inside(p, i, j);
        for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj) {
                const int a = i + di, b = j + dj;
                if (a >= 0 && b >= 0 && a < r && b < r && inside(p, a, b) != here) return true;
            }
        return false;
    };
    std::size_t mismatches = 0, interior_mismatches = 0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            const auto k = reg.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            if (!reg.defined[k]) continue;
            for (const auto& [mask, pair] : {std::pair{&reg.st_band, &st}, std::pair{&reg.la_band, &la}}) {
                if (bool((*mask)[k]) != inside(*pair, i, j)) {
                    ++mismatches;
                    if (!on_edge(*pair, i, j)) ++interior_mismatches;
                }
            }
        }
    CHECK(interior_mismatches == 0);
    CHECK(mismatches < static_cast<std::size_t>(r));
}

TEST_CASE("region existence and monotonicity in the migration cost") {
    const Totals t{200, 800};
    const auto wide = equilibrium_region(kEnv, venues(-3.5), t, 0.05, 100, asym());
    const auto narrow = equilibrium_region(kEnv, venues(-3.5), t, 0.025, 100, asym());
    CHECK_FALSE(wide.empty());
    CHECK(narrow.empty());
    for (std::size_t k = 0; k < wide.equilibrium.size(); ++k) {
        CHECK(narrow.st_band[k] <= wide.st_band[k]);
        CHECK(narrow.la_band[k] <= wide.la_band[k]);
    }
    const auto tiny = equilibrium_region(kEnv, venues(-3.5), t, 0.05, 2, asym());
    CHECK(tiny.n_la_axis.size() == 2);
    CHECK(tiny.defined.size() == 4);
    CHECK_THROWS_AS((void)equilibrium_region(kEnv, venues(-3.5), t, 0.05, 1, asym()), std::domain_error);
}

TEST_CASE("sequential migration") {
    const MarketState init{{125, 75}, {375, 425}, 0.05};
    const auto traj = sequential_migration(init, kEnv, venues(-4.0));
    CHECK(traj.status == FlowStatus::equilibrium);
    for (const auto& row : traj.rows) {
        CHECK(row.n_la_1 + row.n_la_2 == 200.0);
        CHECK(row.n_st_1 + row.n_st_2 == 800.0);
    }
    const auto& last = traj.terminal();
    CHECK(is_equilibrium(MarketState{{last.n_la_1, last.n_la_2}, {last.n_st_1, last.n_st_2}, 0.05}, kEnv,
                         venues(-4.0))
              .in_equilibrium);
    CHECK(std::abs(last.n_la_1 - 99) <= 2);

    // A state already in equilibrium does not move.
    const MarketState fin{{99, 101}, {370, 430}, 0.05};
    const auto still = sequential_migration(fin, kEnv, venues(-4.0));
    CHECK(still.rows.size() == 1);
    CHECK(still.status == FlowStatus::equilibrium);

    SequentialConfig la_first;
    la_first.order = MigrationOrder::la_first;
    CHECK(sequential_migration(init, kEnv, venues(-4.0), la_first).status == FlowStatus::equilibrium);

    SequentialConfig short_run;
    short_run.max_steps = 3;
    CHECK(sequential_migration(init, kEnv, venues(-4.0), short_run).status == FlowStatus::max_steps);

    CHECK_THROWS_AS((void)sequential_migration(MarketState{{1.5, 2}, {3, 4}, 0.05}, kEnv, venues(-4.0)),
                    std::domain_error);
}

TEST_CASE("continuous flow") {
    OdeConfig cfg;
    const MarketState lower{{170, 30}, {120, 680}, 0.05};
    const auto traj = ode_flow(lower, kEnv, venues(-3.5), cfg, asym());
    CHECK(traj.status == FlowStatus::equilibrium);
    const auto& last = traj.terminal();
    CHECK(last.n_la_1 + last.n_la_2 == doctest::Approx(200.0));
    CHECK(last.n_st_1 + last.n_st_2 == doctest::Approx(800.0));
    auto opt = asym();
    opt.tolerance = cfg.gap_tol;
    CHECK(is_equilibrium(MarketState{{last.n_la_1, last.n_la_2}, {last.n_st_1, last.n_st_2}, 0.05}, kEnv,
                         venues(-3.5), opt)
              .in_equilibrium);

    OdeConfig cheap = cfg;
    cheap.cost_la = cheap.cost_st = 0.025;
    const auto corner = ode_flow(lower, kEnv, venues(-3.5), cheap, asym());
    CHECK(corner.status == FlowStatus::corner);
    const auto& c = corner.terminal();
    CHECK(std::min(c.n_la_1 + c.n_st_1, c.n_la_2 + c.n_st_2) <= cfg.empty_threshold);
}

TEST_CASE("flow from an equilibrium point is stationary") {
    const MarketState fin{{99, 101}, {370, 430}, 0.05};
    const auto traj = ode_flow(fin, kEnv, venues(-4.0));
    CHECK(traj.rows.size() == 1);
    CHECK(traj.status == FlowStatus::equilibrium);
}

TEST_CASE("oversized steps are reported") {
    OdeConfig cfg;
    cfg.dt = 500.0;
    cfg.kappa_la = cfg.kappa_st = 1e4;
    const MarketState init{{170, 30}, {120, 680}, 0.05};
    CHECK_THROWS_AS((void)ode_flow(init, kEnv, venues(-3.5), cfg, asym()), StepSizeError);
}
