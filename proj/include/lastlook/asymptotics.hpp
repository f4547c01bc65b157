#pragma once

#include "lastlook/model.hpp"

namespace lastlook {

// First-order small-alpha coefficients of one venue:
//   spread/sigma        ~ delta0 + delta1 alpha   (clamped at 0)
//   Omega_hat_ST/sigma  ~ eta0   + eta1   alpha
//   Omega_LA/sigma      ~ gamma0 + gamma1 alpha
struct AsymptoticCoefficients {
    double delta0 = 0.0;
    double delta1 = 0.0;
    double eta0 = 0.0;
    double eta1 = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
};

enum class DerivativeForm {
    partial_derivative,  // dA/dd from the bivariate-CDF partial derivative
    as_printed,          // -sqrt(1-rho^2) phi(d) Phi(w); comparison only
};

enum class LaSlopeForm {
    chain_rule,  // 2 delta1 (B' - A - delta0 A'), the derivative of Omega_LA along alpha
    as_printed,  // 2 (B' - A - delta0 A'); comparison only
};

namespace asymptotics {

// Coefficients depend on (beta, rho, xi/sigma, delta/sigma) only; params.alpha is ignored.
struct SpreadCoefficients {
    double delta0;
    double delta1;
};
struct CostCoefficients {
    double eta0;
    double eta1;
};
struct ProfitCoefficients {
    double gamma0;
    double gamma1;
};

[[nodiscard]] SpreadCoefficients spread_coefficients(const MarketParams& params, const LastLookPolicy& policy);
[[nodiscard]] CostCoefficients st_cost_coefficients(const MarketParams& params, const LastLookPolicy& policy);
[[nodiscard]] ProfitCoefficients la_profit_coefficients(const MarketParams& params, const LastLookPolicy& policy,
                                                        LaSlopeForm form = LaSlopeForm::chain_rule,
                                                        DerivativeForm a_form = DerivativeForm::partial_derivative);
[[nodiscard]] AsymptoticCoefficients coefficients(const MarketParams& params, const LastLookPolicy& policy,
                                                  LaSlopeForm form = LaSlopeForm::chain_rule);

// d/d(spread_norm) of the A and B terms. Negative spread_norm is allowed (delta0 <= 0).
[[nodiscard]] double a_prime(double spread_norm, const MarketParams& params, const LastLookPolicy& policy,
                             DerivativeForm form = DerivativeForm::partial_derivative);
[[nodiscard]] double b_prime(double spread_norm, const MarketParams& params, const LastLookPolicy& policy);

// Quote at the first-order approximation for the given alpha.
[[nodiscard]] VenueQuote first_order_quote(const AsymptoticCoefficients& coef, const MarketParams& params,
                                           const LastLookPolicy& policy);

}  // namespace asymptotics
}  // namespace lastlook
