#include "lastlook/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lastlook {

using detail::bvn_cdf;
using detail::cdf;
using detail::pdf;

MarketParams::MarketParams(double sigma_, Correlation rho_, double alpha_, double beta_)
    : sigma(sigma_), rho(rho_), alpha(alpha_), beta(beta_) {
    validate();
}

void MarketParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::domain_error("sigma must be positive and finite, got " + std::to_string(sigma));
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::domain_error("alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw std::domain_error("beta must lie in [0, 1], got " + std::to_string(beta));
    }
}

MarketParams MarketParams::with_alpha(double a) const {
    MarketParams p = *this;
    p.alpha = a;
    p.validate();
    return p;
}

DeltaRule proportional_delta(double factor) {
    if (!(factor >= 0.0) || !std::isfinite(factor)) throw std::domain_error("delta factor must be >= 0");
    return [factor](double xi) { return factor * std::abs(xi); };
}

DeltaRule zero_delta() {
    return [](double) { return 0.0; };
}

DeltaRule constant_delta(double delta) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::domain_error("delta must be >= 0 and finite");
    return [delta](double) { return delta; };
}

LastLookPolicy::LastLookPolicy() : xi_(-kInf), rule_(zero_delta()) {}

LastLookPolicy::LastLookPolicy(double xi, DeltaRule rule) : xi_(xi), rule_(std::move(rule)) {
    if (std::isnan(xi) || !(xi < 0.0)) {
        throw std::domain_error("rejection threshold must be negative or -inf, got " + std::to_string(xi));
    }
    if (!rule_) throw std::invalid_argument("delta rule must be callable");
    if (rejects()) {
        const double d = rule_(xi_);
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw std::domain_error("delta rule must give a finite non-negative cost at xi = " + std::to_string(xi));
        }
    }
}

double LastLookPolicy::rejection_cost() const {
    return rejects() ? rule_(xi_) : 0.0;
}

namespace model {
namespace normalized {

namespace {
// W = (Z1 + Z2)/sqrt(2(1+rho)) is standard normal with corr(Z1, W) = sqrt((1+rho)/2).
// The LA's trade on an up-move is accepted iff W < w, w = -xi/sqrt(2(1+rho)).
double accept_level(double xi_norm, double rho) noexcept { return -xi_norm / std::sqrt(2.0 * (1.0 + rho)); }
double sum_correlation(double rho) noexcept { return std::sqrt(0.5 * (1.0 + rho)); }
}  // namespace

double a_term(double spread_norm, double xi_norm, double rho) noexcept {
    // P[Z1 > d, W < w] = P[-Z1 < -d, W < w], corr(-Z1, W) = -c
    return bvn_cdf(-spread_norm, accept_level(xi_norm, rho), -sum_correlation(rho));
}

double a_term_as_printed(double spread_norm, double xi_norm, double rho) noexcept {
    const double w = accept_level(xi_norm, rho);
    return cdf(w) - bvn_cdf(spread_norm, w, sum_correlation(rho));
}

double a_term_complement(double spread_norm, double xi_norm, double rho) noexcept {
    // P[Z1 > d, W > w]
    return bvn_cdf(-spread_norm, -accept_level(xi_norm, rho), sum_correlation(rho));
}

double b_term(double spread_norm, double xi_norm, double rho) noexcept {
    const double d = spread_norm;
    const double first = pdf(d) * cdf(-(xi_norm + (1.0 + rho) * d) / std::sqrt(1.0 - rho * rho));
    const double weight = pdf(-accept_level(xi_norm, rho));
    if (weight == 0.0) return first;
    return first - sum_correlation(rho) * weight * cdf(-(xi_norm + 2.0 * d) / std::sqrt(2.0 * (1.0 - rho)));
}

double st_cost_intercept(double xi_norm, double rho, double beta) noexcept {
    return (1.0 - beta) * sum_correlation(rho) * pdf(-accept_level(xi_norm, rho));
}

double st_cost_slope(double xi_norm, double rho, double beta) noexcept {
    return psi_st(xi_norm, rho, beta);
}

double omega_st(double spread_norm, double xi_norm, double rho, double beta) noexcept {
    return st_cost_intercept(xi_norm, rho, beta) + spread_norm * st_cost_slope(xi_norm, rho, beta);
}

double omega_la(double spread_norm, double xi_norm, double rho) noexcept {
    return 2.0 * (b_term(spread_norm, xi_norm, rho) - a_term(spread_norm, xi_norm, rho) * spread_norm);
}

double psi_st(double xi_norm, double rho, double beta) noexcept {
    return beta * cdf(-xi_norm) + (1.0 - beta) * cdf(accept_level(xi_norm, rho));
}

double reject_st(double xi_norm, double rho, double beta) noexcept {
    return beta * cdf(xi_norm) + (1.0 - beta) * cdf(-accept_level(xi_norm, rho));
}

}  // namespace normalized

namespace {

void require_spread(double spread, const char* where) {
    if (std::isnan(spread) || spread < 0.0) {
        throw std::domain_error(std::string(where) + ": spread must be >= 0, got " + std::to_string(spread));
    }
}

double xi_norm(const MarketParams& p, const LastLookPolicy& policy) { return policy.xi() / p.sigma; }

}  // namespace

double omega_la_no_lastlook(double spread, const MarketParams& params) {
    require_spread(spread, "omega_la_no_lastlook");
    const double d = spread / params.sigma;
    return 2.0 * params.sigma * pdf(d) - 2.0 * spread * cdf(-d);
}

double omega_st_lastlook(double spread, const MarketParams& params, const LastLookPolicy& policy) {
    require_spread(spread, "omega_st_lastlook");
    return params.sigma *
           normalized::omega_st(spread / params.sigma, xi_norm(params, policy), params.rho.value(), params.beta);
}

double psi_st(const MarketParams& params, const LastLookPolicy& policy) {
    if (!policy.rejects()) return 1.0;
    return normalized::psi_st(xi_norm(params, policy), params.rho.value(), params.beta);
}

double a_term(double spread_norm, const MarketParams& params, const LastLookPolicy& policy) {
    require_spread(spread_norm, "a_term");
    return normalized::a_term(spread_norm, xi_norm(params, policy), params.rho.value());
}

double b_term(double spread_norm, const MarketParams& params, const LastLookPolicy& policy) {
    require_spread(spread_norm, "b_term");
    return normalized::b_term(spread_norm, xi_norm(params, policy), params.rho.value());
}

double omega_la_lastlook(double spread, const MarketParams& params, const LastLookPolicy& policy) {
    require_spread(spread, "omega_la_lastlook");
    return params.sigma * normalized::omega_la(spread / params.sigma, xi_norm(params, policy), params.rho.value());
}

ConditionalProbability psi_la(double spread, const MarketParams& params, const LastLookPolicy& policy,
                              PsiLaDenominator denominator) {
    require_spread(spread, "psi_la");
    const double d = spread / params.sigma;
    if (!policy.rejects() && denominator == PsiLaDenominator::conditioning_event) return {1.0, false};
    const double a = normalized::a_term(d, xi_norm(params, policy), params.rho.value());
    const double mass = denominator == PsiLaDenominator::conditioning_event ? cdf(-d) : cdf(d);
    if (mass == 0.0) return {0.0, true};
    return {a / mass, false};
}

double upsilon(double spread, const MarketParams& params, const LastLookPolicy& policy) {
    require_spread(spread, "upsilon");
    const double d = spread / params.sigma;
    const double xn = xi_norm(params, policy);
    const double rho = params.rho.value();
    const double mass = cdf(-d);
    // 1 - Psi_LA, with the LA-trade conditioning event; -> 1 as the spread diverges.
    const double la_reject = mass > 0.0 ? normalized::a_term_complement(d, xn, rho) / mass : 1.0;
    const double st_reject = normalized::reject_st(xn, rho, params.beta);
    const double la_part = params.alpha * la_reject;
    const double total = la_part + (1.0 - params.alpha) * st_reject;
    if (!(total > 0.0)) {
        throw UndefinedConditional("upsilon: no trade can be rejected, P[LA | reject] is undefined");
    }
    return la_part / total;
}

double effective_cost_st(double spread, const MarketParams& params, const LastLookPolicy& policy) {
    require_spread(spread, "effective_cost_st");
    if (!policy.rejects()) return spread;
    const double reject = normalized::reject_st(xi_norm(params, policy), params.rho.value(), params.beta);
    return omega_st_lastlook(spread, params, policy) + policy.rejection_cost() * reject;
}

VenueQuote quote_at(double spread, const MarketParams& params, const LastLookPolicy& policy) {
    VenueQuote q;
    q.spread = spread;
    q.omega_st = policy.rejects() ? omega_st_lastlook(spread, params, policy) : spread;
    q.omega_la = policy.rejects() ? omega_la_lastlook(spread, params, policy) : omega_la_no_lastlook(spread, params);
    q.omega_st_effective = effective_cost_st(spread, params, policy);
    q.psi_st = psi_st(params, policy);
    q.psi_la = psi_la(spread, params, policy).value;
    try {
        q.upsilon = upsilon(spread, params, policy);
    } catch (const UndefinedConditional&) {
        q.upsilon = std::numeric_limits<double>::quiet_NaN();
    }
    return q;
}

}  // namespace model
}  // namespace lastlook
