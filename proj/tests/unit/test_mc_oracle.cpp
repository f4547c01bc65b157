#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lastlook/mc_oracle.hpp"
#include "lastlook/verification.hpp"

using namespace lastlook;

namespace {
MarketParams mp(double rho, double beta, double alpha = 0.1) {
    return MarketParams(1.0, Correlation(rho), alpha, beta);
}
}  // namespace

TEST_CASE("config validation") {
    SimConfig bad;
    bad.n_samples = 0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("increments have unit variance and the requested correlation") {
    for (double rho : {-0.5, 0.0, 0.7}) {
        const auto inc = mc::draw_increments(mp(rho, 1.0), 200000, 11);
        double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
        for (const auto& z : inc) {
            s1 += z.z1;
            s2 += z.z2;
            s11 += z.z1 * z.z1;
            s22 += z.z2 * z.z2;
            s12 += z.z1 * z.z2;
        }
        const double n = static_cast<double>(inc.size());
        CHECK(std::abs(s1 / n) < 0.01);
        CHECK(std::abs(s2 / n) < 0.01);
        CHECK(s11 / n == doctest::Approx(1.0).epsilon(0.01));
        CHECK(s22 / n == doctest::Approx(1.0).epsilon(0.01));
        CHECK(std::abs(s12 / n - rho) < 0.01);
    }
}

TEST_CASE("simulation is deterministic in the seed") {
    const SimConfig cfg{200000, 99, false};
    const auto a = mc::simulate(mp(0.5, 0.8), LastLookPolicy(-2.0), 0.1, cfg);
    const auto b = mc::simulate(mp(0.5, 0.8), LastLookPolicy(-2.0), 0.1, cfg);
    CHECK(a.omega_st.mean == b.omega_st.mean);
    CHECK(a.omega_la.mean == b.omega_la.mean);
    CHECK(a.psi_la.mean == b.psi_la.mean);
    CHECK(a.upsilon->mean == b.upsilon->mean);
    CHECK(a.rejected == b.rejected);
    const auto c = mc::simulate(mp(0.5, 0.8), LastLookPolicy(-2.0), 0.1, SimConfig{200000, 100, false});
    CHECK(c.omega_st.mean != a.omega_st.mean);
    CHECK(mc::splitmix64(1) != mc::splitmix64(2));
}

TEST_CASE("antithetic pairing reduces the ST cost error") {
    const auto p = mp(0.0, 0.5);
    const LastLookPolicy pol(-2.0);
    const auto plain = mc::simulate(p, pol, 0.1, SimConfig{400000, 5, false});
    const auto anti = mc::simulate(p, pol, 0.1, SimConfig{400000, 5, true});
    CHECK(anti.omega_st.se < plain.omega_st.se);
    const double exact = model::omega_st_lastlook(0.1, p, pol);
    CHECK(std::abs(anti.omega_st.mean - exact) < 4.0 * anti.omega_st.se);
}

TEST_CASE("no Last Look never rejects") {
    const auto e = mc::simulate(mp(0.2, 0.5), LastLookPolicy::none(), 0.2, SimConfig{100000, 3, false});
    CHECK(e.psi_st.mean == 1.0);
    CHECK(e.psi_la.mean == 1.0);
    CHECK_FALSE(e.upsilon.has_value());
    CHECK(e.rejected == 0);
    CHECK(e.la_trades > 0);
}

TEST_CASE("small oracle grid agrees with the closed forms") {
    verification::OracleGrid grid;
    grid.rho = {0.5};
    grid.beta = {0.8};
    grid.xi_over_sigma = {-2.0};
    grid.spread_over_sigma = {0.1};
    const auto rep = verification::run_oracle_suite(grid, SimConfig{1'000'000, 2018, false});
    CHECK(rep.comparisons.size() == 5);
    for (const auto& c : rep.comparisons) CHECK(std::abs(c.z) < 4.0);
}

TEST_CASE("limit suite") {
    const auto checks = verification::run_limit_suite();
    CHECK(checks.size() > 10);
    for (const auto& c : checks) {
        INFO(c.name);
        CHECK(c.passed());
    }
}
