#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lastlook/mc_oracle.hpp"
#include "lastlook/model.hpp"
#include "lastlook/solver.hpp"

using namespace lastlook;
namespace nm = lastlook::model::normalized;

namespace {

MarketParams mp(double rho, double beta, double alpha = 0.1, double sigma = 1.0) {
    return MarketParams(sigma, Correlation(rho), alpha, beta);
}

// Composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int n = 4000) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// A and B as one-dimensional integrals over Z1, with Z2 | Z1 ~ N(rho Z1, 1 - rho^2).
double a_oracle(double d, double xi, double rho) {
    const double s = std::sqrt(1.0 - rho * rho);
    return simpson([&](double z) { return std_normal_pdf(z) * std_normal_cdf((-xi - (1.0 + rho) * z) / s); }, d, 12.0);
}
double b_oracle(double d, double xi, double rho) {
    const double s = std::sqrt(1.0 - rho * rho);
    return simpson([&](double z) { return z * std_normal_pdf(z) * std_normal_cdf((-xi - (1.0 + rho) * z) / s); }, d,
                   12.0);
}

bool within(double mc, double se, double ref, double k = 3.0) { return std::abs(mc - ref) <= k * se; }

}  // namespace

TEST_CASE("market parameters are validated") {
    CHECK_THROWS_AS(MarketParams(0.0, Correlation(0.0), 0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(MarketParams(1.0, Correlation(0.0), -0.1, 1.0), std::domain_error);
    CHECK_THROWS_AS(MarketParams(1.0, Correlation(0.0), 0.1, 1.5), std::domain_error);
    CHECK_THROWS_AS(LastLookPolicy(0.5), std::domain_error);
    CHECK_THROWS_AS((void)model::omega_la_no_lastlook(-0.1, mp(0, 1)), std::domain_error);
    CHECK(LastLookPolicy::none().rejection_cost() == 0.0);
    CHECK(LastLookPolicy(-3.0).rejection_cost() == doctest::Approx(1.5));
    CHECK(LastLookPolicy(-3.0, constant_delta(0.2)).rejection_cost() == doctest::Approx(0.2));
}

TEST_CASE("no Last Look LA profit") {
    const auto p = mp(0, 1);
    CHECK(model::omega_la_no_lastlook(0.0, p) == doctest::Approx(0.7978845608).epsilon(1e-10));
    CHECK(model::omega_la_no_lastlook(40.0, p) == doctest::Approx(0.0));
    double prev = kInf;
    for (double d = 0.0; d < 4.0; d += 0.1) {
        const double v = model::omega_la_no_lastlook(d, p);
        CHECK(v < prev);
        CHECK(v >= 0.0);
        prev = v;
    }
    const auto mc = mc::simulate(p, LastLookPolicy::none(), 0.5);
    CHECK(within(mc.omega_la.mean, mc.omega_la.se, model::omega_la_no_lastlook(0.5, p)));
}

TEST_CASE("ST cost and execution probability") {
    const LastLookPolicy none;
    for (double d : {0.0, 0.3, 1.2}) CHECK(model::omega_st_lastlook(d, mp(0.5, 0.8), none) == doctest::Approx(d));
    CHECK(model::psi_st(mp(0.5, 0.8), none) == 1.0);
    for (double xi : {-4.0, -2.0})
        CHECK(model::omega_st_lastlook(0.2, mp(0.3, 1.0), LastLookPolicy(xi)) ==
              doctest::Approx(0.2 * std_normal_cdf(-xi)).epsilon(1e-14));
    CHECK(model::psi_st(mp(0.0, 1.0), LastLookPolicy(-1.959963985)) == doctest::Approx(0.975).epsilon(1e-9));

    const auto p = mp(0.5, 0.8);
    const LastLookPolicy ll(-3.5);
    const auto mc = mc::simulate(p, ll, 0.1);
    CHECK(within(mc.omega_st.mean, mc.omega_st.se, model::omega_st_lastlook(0.1, p, ll)));
    CHECK(within(mc.psi_st.mean, mc.psi_st.se, model::psi_st(p, ll)));
}

TEST_CASE("A and B terms against one-dimensional integrals") {
    for (double rho : {-0.5, 0.0, 0.5, 0.8}) {
        for (double xi : {-3.5, -2.0, -1.0}) {
            for (double d : {0.0, 0.2, 0.7}) {
                CHECK(nm::a_term(d, xi, rho) == doctest::Approx(a_oracle(d, xi, rho)).epsilon(1e-9));
                CHECK(nm::b_term(d, xi, rho) == doctest::Approx(b_oracle(d, xi, rho)).epsilon(1e-9));
            }
        }
    }
    CHECK(nm::a_term(0.4, -kInf, 0.3) == doctest::Approx(std_normal_cdf(-0.4)));
    CHECK(nm::b_term(0.4, -kInf, 0.3) == doctest::Approx(std_normal_pdf(0.4)));
    CHECK(nm::b_term(0.0, -kInf, 0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
}

TEST_CASE("LA profit and execution with Last Look") {
    const auto p = mp(0.5, 0.8);
    CHECK(std::abs(model::omega_la_lastlook(0.5, p, LastLookPolicy::none()) -
                   model::omega_la_no_lastlook(0.5, p)) < 1e-9);
    CHECK(model::omega_la_lastlook(0.0, p, LastLookPolicy::none()) == doctest::Approx(0.7978845608).epsilon(1e-10));
    CHECK(model::psi_la(0.2, p, LastLookPolicy::none()).value == doctest::Approx(1.0));

    const LastLookPolicy ll(-3.5);
    const auto mc = mc::simulate(p, ll, 0.13);
    CHECK(within(mc.omega_la.mean, mc.omega_la.se, model::omega_la_lastlook(0.13, p, ll)));
    CHECK(within(mc.psi_la.mean, mc.psi_la.se, model::psi_la(0.13, p, ll).value));
    // The printed denominator is far outside the simulated frequency.
    const double printed = model::psi_la(0.13, p, ll, PsiLaDenominator::as_printed).value;
    CHECK(std::abs(mc.psi_la.mean - printed) > 50.0 * mc.psi_la.se);

    // Huge spreads: no LA trade ever happens.
    const auto far = model::psi_la(60.0, p, ll);
    CHECK(far.degenerate);
}

TEST_CASE("Bayes rejection diagnostic") {
    const LastLookPolicy ll(-3.0);
    CHECK(model::upsilon(0.1, mp(0.5, 0.8, 0.0), ll) == 0.0);
    CHECK(model::upsilon(0.1, mp(0.5, 0.8, 1.0), ll) == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)model::upsilon(0.1, mp(0.5, 0.8), LastLookPolicy::none()), UndefinedConditional);

    // Solved spreads, decreasing in the threshold.
    double prev = 1.0;
    for (double xi : {-4.0, -3.0, -2.0}) {
        const auto p = mp(0.5, 0.8, 0.1);
        const LastLookPolicy pol(xi);
        const double spread = solver::solve_spread_lastlook(p, pol).spread;
        const double u = model::upsilon(spread, p, pol);
        CHECK(u < prev);
        prev = u;
        const auto mc = mc::simulate(p, pol, spread);
        REQUIRE(mc.upsilon.has_value());
        CHECK(within(mc.upsilon->mean, mc.upsilon->se, u));
    }
}

TEST_CASE("effective cost") {
    const auto p = mp(0.5, 0.8);
    CHECK(model::effective_cost_st(0.3, p, LastLookPolicy::none()) == 0.3);
    const LastLookPolicy z(-2.5, zero_delta());
    CHECK(model::effective_cost_st(0.3, p, z) == model::omega_st_lastlook(0.3, p, z));
    const LastLookPolicy ll(-2.5);
    CHECK(model::effective_cost_st(0.3, p, ll) ==
          doctest::Approx(model::omega_st_lastlook(0.3, p, ll) + 1.25 * (1.0 - model::psi_st(p, ll))));
}

TEST_CASE("large negative threshold reproduces the no Last Look forms") {
    const LastLookPolicy deep(-30.0, zero_delta());
    for (double rho : {-0.5, 0.0, 0.5})
        for (double d : {0.0, 0.1, 0.5, 2.0}) {
            const auto p = mp(rho, 0.8);
            CHECK(std::abs(model::omega_la_lastlook(d, p, deep) - model::omega_la_no_lastlook(d, p)) < 1e-9);
            CHECK(std::abs(model::omega_st_lastlook(d, p, deep) - d) < 1e-9);
        }
}

TEST_CASE("scale equivariance") {
    for (double sigma : {0.25, 3.0}) {
        const auto q1 = model::quote_at(0.2, mp(0.5, 0.8, 0.1, 1.0), LastLookPolicy(-3.0));
        const auto qs = model::quote_at(0.2 * sigma, mp(0.5, 0.8, 0.1, sigma), LastLookPolicy(-3.0 * sigma));
        CHECK(qs.omega_st == doctest::Approx(sigma * q1.omega_st).epsilon(1e-12));
        CHECK(qs.omega_la == doctest::Approx(sigma * q1.omega_la).epsilon(1e-12));
        CHECK(qs.omega_st_effective == doctest::Approx(sigma * q1.omega_st_effective).epsilon(1e-12));
        CHECK(qs.psi_st == doctest::Approx(q1.psi_st).epsilon(1e-13));
        CHECK(qs.psi_la == doctest::Approx(q1.psi_la).epsilon(1e-13));
        CHECK(qs.upsilon == doctest::Approx(q1.upsilon).epsilon(1e-13));
    }
}

TEST_CASE("monotonicity in the threshold and bounds on a property grid") {
    for (double rho : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
        for (double beta : {0.0, 0.5, 1.0}) {
            const auto p = mp(rho, beta);
            double prev_la = kInf, prev_psi = 1.0;
            for (double xi = -6.0; xi < -0.05; xi += 0.25) {
                const LastLookPolicy pol(xi);
                const double la = model::omega_la_lastlook(0.15, p, pol);
                const double psi = model::psi_st(p, pol);
                CHECK(la <= prev_la + 1e-15);
                CHECK(psi <= prev_psi + 1e-15);
                prev_la = la;
                prev_psi = psi;
                for (double d : {0.0, 0.3, 1.5}) {
                    const double a = model::a_term(d, p, pol);
                    CHECK(a >= 0.0);
                    CHECK(a <= 1.0);
                    const auto q = model::quote_at(d, p, pol);
                    CHECK(q.psi_la >= 0.0);
                    CHECK(q.psi_la <= 1.0);
                    CHECK(q.psi_st >= 0.0);
                    CHECK(q.psi_st <= 1.0);
                }
            }
        }
    }
}
