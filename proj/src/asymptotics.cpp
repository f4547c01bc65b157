#include "lastlook/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lastlook::asymptotics {

namespace nm = model::normalized;
using detail::cdf;
using detail::pdf;

namespace {

struct Normalized {
    double xi;
    double rho;
    double beta;
};

Normalized normalize(const MarketParams& p, const LastLookPolicy& policy) {
    return {policy.xi() / p.sigma, p.rho.value(), p.beta};
}

double a_prime_n(double d, const Normalized& n, DerivativeForm form) {
    const double c = std::sqrt(0.5 * (1.0 + n.rho));
    const double w = -n.xi / std::sqrt(2.0 * (1.0 + n.rho));
    if (form == DerivativeForm::as_printed) {
        return -std::sqrt(1.0 - n.rho * n.rho) * pdf(d) * cdf(w);
    }
    // A(d) = Phi(w) - Phi_c(d, w);  d/dx Phi_c(x, y) = phi(x) Phi((y - c x)/sqrt(1 - c^2))
    if (w == kInf) return -pdf(d);
    return -pdf(d) * cdf((w - c * d) / std::sqrt(1.0 - c * c));
}

double b_prime_n(double d, const Normalized& n) {
    const double s = std::sqrt(1.0 - n.rho * n.rho);
    const double u = -(n.xi + (1.0 + n.rho) * d) / s;
    double out = -((1.0 + n.rho) / s * pdf(u) + d * cdf(u)) * pdf(d);
    const double weight = pdf(n.xi / std::sqrt(2.0 * (1.0 + n.rho)));
    if (weight > 0.0) {
        out += std::sqrt((1.0 + n.rho) / (1.0 - n.rho)) * weight *
               pdf(-(n.xi + 2.0 * d) / std::sqrt(2.0 * (1.0 - n.rho)));
    }
    return out;
}

// 2 (B(d) - d A(d)) for any real d.
double la_profit_n(double d, const Normalized& n) {
    return 2.0 * (nm::b_term(d, n.xi, n.rho) - d * nm::a_term(d, n.xi, n.rho));
}

}  // namespace

double a_prime(double spread_norm, const MarketParams& params, const LastLookPolicy& policy, DerivativeForm form) {
    return a_prime_n(spread_norm, normalize(params, policy), form);
}

double b_prime(double spread_norm, const MarketParams& params, const LastLookPolicy& policy) {
    return b_prime_n(spread_norm, normalize(params, policy));
}

SpreadCoefficients spread_coefficients(const MarketParams& params, const LastLookPolicy& policy) {
    const Normalized n = normalize(params, policy);
    const double a_st = nm::st_cost_intercept(n.xi, n.rho, n.beta);
    const double b_st = nm::st_cost_slope(n.xi, n.rho, n.beta);
    const double d0 = -a_st / b_st;
    return {d0, la_profit_n(d0, n) / b_st};
}

CostCoefficients st_cost_coefficients(const MarketParams& params, const LastLookPolicy& policy) {
    const Normalized n = normalize(params, policy);
    const double d0 = spread_coefficients(params, policy).delta0;
    const double eta0 = policy.rejects() ? policy.rejection_cost() / params.sigma * nm::reject_st(n.xi, n.rho, n.beta)
                                         : 0.0;
    return {eta0, la_profit_n(d0, n)};
}

ProfitCoefficients la_profit_coefficients(const MarketParams& params, const LastLookPolicy& policy, LaSlopeForm form,
                                          DerivativeForm a_form) {
    const Normalized n = normalize(params, policy);
    const SpreadCoefficients s = spread_coefficients(params, policy);
    const double d0 = s.delta0;
    const double slope = 2.0 * (b_prime_n(d0, n) - nm::a_term(d0, n.xi, n.rho) - d0 * a_prime_n(d0, n, a_form));
    return {la_profit_n(d0, n), form == LaSlopeForm::chain_rule ? s.delta1 * slope : slope};
}

AsymptoticCoefficients coefficients(const MarketParams& params, const LastLookPolicy& policy, LaSlopeForm form) {
    const SpreadCoefficients s = spread_coefficients(params, policy);
    const CostCoefficients e = st_cost_coefficients(params, policy);
    const ProfitCoefficients g = la_profit_coefficients(params, policy, form);
    return {s.delta0, s.delta1, e.eta0, e.eta1, g.gamma0, g.gamma1};
}

VenueQuote first_order_quote(const AsymptoticCoefficients& coef, const MarketParams& params,
                             const LastLookPolicy& policy) {
    const double a = params.alpha;
    const double sigma = params.sigma;
    VenueQuote q;
    q.spread = sigma * std::max(0.0, coef.delta0 + coef.delta1 * a);
    q.omega_st_effective = sigma * (coef.eta0 + coef.eta1 * a);
    q.omega_st = q.omega_st_effective - sigma * coef.eta0;
    q.omega_la = sigma * (coef.gamma0 + coef.gamma1 * a);
    q.psi_st = model::psi_st(params, policy);
    q.psi_la = model::psi_la(q.spread, params, policy).value;
    try {
        q.upsilon = model::upsilon(q.spread, params, policy);
    } catch (const UndefinedConditional&) {
        q.upsilon = std::numeric_limits<double>::quiet_NaN();
    }
    return q;
}

}  // namespace lastlook::asymptotics
