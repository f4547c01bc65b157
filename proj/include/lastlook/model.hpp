#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "lastlook/gauss.hpp"

namespace lastlook {

// Trader mix and price-revision environment of a single venue.
struct MarketParams {
    double sigma = 1.0;               // price-revision scale per period
    Correlation rho{0.0};              // correlation of successive revisions
    double alpha = 0.0;               // fraction of latency-arbitrage trades
    double beta = 1.0;                // probability an ST sees the updated quote

    MarketParams() = default;
    MarketParams(double sigma, Correlation rho, double alpha, double beta);

    // Throws std::domain_error when an invariant is violated.
    void validate() const;
    [[nodiscard]] MarketParams with_alpha(double a) const;
};

// Maps the rejection threshold xi (< 0, price units) to the ST's imputed cost
// per rejected trade.
using DeltaRule = std::function<double(double xi)>;

[[nodiscard]] DeltaRule proportional_delta(double factor = 0.5);
[[nodiscard]] DeltaRule zero_delta();
[[nodiscard]] DeltaRule constant_delta(double delta);

class LastLookPolicy {
public:
    // No Last Look: xi = -inf, delta = 0.
    LastLookPolicy();
    // Threshold xi < 0 (or -inf). Default rule delta = 0.5|xi|.
    explicit LastLookPolicy(double xi, DeltaRule rule = proportional_delta());

    [[nodiscard]] static LastLookPolicy none() { return {}; }

    [[nodiscard]] double xi() const noexcept { return xi_; }
    [[nodiscard]] bool rejects() const noexcept { return xi_ != -kInf; }
    // delta >= 0; identically 0 without Last Look.
    [[nodiscard]] double rejection_cost() const;
    [[nodiscard]] const DeltaRule& delta_rule() const noexcept { return rule_; }
    [[nodiscard]] LastLookPolicy with_threshold(double xi) const { return LastLookPolicy(xi, rule_); }

private:
    double xi_;
    DeltaRule rule_;
};

// Solved state of one venue.
struct VenueQuote {
    double spread = 0.0;
    double omega_st = 0.0;            // ST round-trip cost on accepted trades
    double omega_la = 0.0;            // LA round-trip profit
    double omega_st_effective = 0.0;  // cost including imputed rejection cost
    double psi_st = 1.0;
    double psi_la = 1.0;
    double upsilon = 0.0;             // NaN when no trade can be rejected
};

// Result of a conditional probability whose conditioning event may have
// vanishing mass.
struct ConditionalProbability {
    double value = 0.0;
    bool degenerate = false;  // conditioning probability underflowed
};

enum class PsiLaDenominator {
    conditioning_event,  // Phi(-spread/sigma) = P[P1 - P0 > spread]
    as_printed,          // Phi(+spread/sigma); kept for comparison only
};

// Raised when Bayes' rule is applied to an event with zero probability.
class UndefinedConditional : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

namespace model {

// Closed forms in normalized units (spread_norm = spread/sigma, xi_norm = xi/sigma).
namespace normalized {
[[nodiscard]] double a_term(double spread_norm, double xi_norm, double rho) noexcept;
[[nodiscard]] double a_term_as_printed(double spread_norm, double xi_norm, double rho) noexcept;
[[nodiscard]] double a_term_complement(double spread_norm, double xi_norm, double rho) noexcept;
[[nodiscard]] double b_term(double spread_norm, double xi_norm, double rho) noexcept;
[[nodiscard]] double omega_st(double spread_norm, double xi_norm, double rho, double beta) noexcept;
[[nodiscard]] double omega_la(double spread_norm, double xi_norm, double rho) noexcept;
[[nodiscard]] double psi_st(double xi_norm, double rho, double beta) noexcept;
[[nodiscard]] double reject_st(double xi_norm, double rho, double beta) noexcept;
// Intercept and slope of Omega_ST/sigma as an affine function of spread_norm.
[[nodiscard]] double st_cost_intercept(double xi_norm, double rho, double beta) noexcept;
[[nodiscard]] double st_cost_slope(double xi_norm, double rho, double beta) noexcept;
}  // namespace normalized

[[nodiscard]] double omega_la_no_lastlook(double spread, const MarketParams& params);
[[nodiscard]] double omega_st_lastlook(double spread, const MarketParams& params, const LastLookPolicy& policy);
[[nodiscard]] double psi_st(const MarketParams& params, const LastLookPolicy& policy);
[[nodiscard]] double a_term(double spread_norm, const MarketParams& params, const LastLookPolicy& policy);
[[nodiscard]] double b_term(double spread_norm, const MarketParams& params, const LastLookPolicy& policy);
[[nodiscard]] double omega_la_lastlook(double spread, const MarketParams& params, const LastLookPolicy& policy);
[[nodiscard]] ConditionalProbability psi_la(double spread, const MarketParams& params, const LastLookPolicy& policy,
                                            PsiLaDenominator denominator = PsiLaDenominator::conditioning_event);
// Throws UndefinedConditional when no trade of either type can be rejected.
[[nodiscard]] double upsilon(double spread, const MarketParams& params, const LastLookPolicy& policy);
[[nodiscard]] double effective_cost_st(double spread, const MarketParams& params, const LastLookPolicy& policy);

// Every quantity of VenueQuote at a given spread. upsilon is NaN when undefined.
[[nodiscard]] VenueQuote quote_at(double spread, const MarketParams& params, const LastLookPolicy& policy);

}  // namespace model
}  // namespace lastlook
