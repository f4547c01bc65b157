#include "lastlook/solver.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace lastlook {

void SolverConfig::validate() const {
    if (!(abs_tol > 0.0)) throw std::domain_error("solver abs_tol must be > 0");
    if (max_iter < 1) throw std::domain_error("solver max_iter must be >= 1");
    if (!(bracket_hi > 0.0)) throw std::domain_error("solver bracket_hi must be > 0");
}


namespace solver {

namespace {

constexpr int kScanPoints = 64;
constexpr int kMaxExpansions = 12;

struct Root {
    double x;
    double residual;
    int iterations;
    int sign_changes;
    double lo;
    double hi;
};

// Finds the first upward sign change of f on (0, hi], expanding hi as
// needed, and bisects it. Requires f(0) < 0.
Root first_upward_root(const std::function<double(double)>& f, double f0, const SolverConfig& cfg,
                       const char* what) {
    double scan_hi = cfg.bracket_hi;
    for (int expansion = 0; expansion <= kMaxExpansions; ++expansion, scan_hi *= 2.0) {
        double prev_x = 0.0;
        double prev_f = f0;
        double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
        bool found = false;
        int sign_changes = 0;
        for (int i = 1; i <= kScanPoints; ++i) {
            const double x = scan_hi * i / kScanPoints;
            const double fx = f(x);
            if (!std::isfinite(fx)) {
                std::ostringstream os;
                os << what << ": balancing function is not finite at normalized spread " << x;
                throw SolverError(os.str());
            }
            if ((prev_f < 0.0) != (fx < 0.0)) {
                ++sign_changes;
                if (!found) {
                    found = true;
                    lo = prev_x;
                    flo = prev_f;
                    hi = x;
                    fhi = fx;
                }
            }
            prev_x = x;
            prev_f = fx;
        }
        if (!found) continue;

        int iter = 0;
        double best = std::abs(flo) < std::abs(fhi) ? lo : hi;
        double best_f = std::min(std::abs(flo), std::abs(fhi));
        while (iter < cfg.max_iter) {
            const double mid = 0.5 * (lo + hi);
            if (!(mid > lo && mid < hi)) break;
            const double fm = f(mid);
            ++iter;
            if (std::abs(fm) < best_f) {
                best = mid;
                best_f = std::abs(fm);
            }
            if (fm == 0.0) {
                lo = hi = mid;
                break;
            }
            if (fm < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo <= cfg.abs_tol && best_f <= 0.5 * cfg.abs_tol) break;
        }
        if (hi - lo > cfg.abs_tol) {
            std::ostringstream os;
            os << what << ": bisection did not reach tolerance after " << iter << " iterations, bracket [" << lo
               << ", " << hi << "]";
            throw SolverError(os.str());
        }
        return {best, f(best), iter, sign_changes, lo, hi};
    }
    std::ostringstream os;
    os << what << ": no sign change of the balancing function on [0, " << scan_hi / 2.0
       << "] (normalized); f(0) = " << f0;
    throw SolverError(os.str());
}

void require_alpha(const MarketParams& p) {
    p.validate();
    if (p.alpha >= 1.0) {
        throw NoFiniteSolution("no finite break-even spread for alpha >= 1 (spread diverges as alpha -> 1)");
    }
}

}  // namespace

double broker_profit(double spread, const MarketParams& params, const LastLookPolicy& policy) {
    const double st = model::omega_st_lastlook(spread, params, policy);
    const double la = model::omega_la_lastlook(spread, params, policy);
    return (1.0 - params.alpha) * st - params.alpha * la;
}

double no_lastlook_balance(double x, double alpha) {
    return detail::pdf(x) - x * detail::cdf(-x) - (1.0 - alpha) / (2.0 * alpha) * x;
}

SpreadSolution solve_spread_no_lastlook(const MarketParams& params, const SolverConfig& cfg) {
    cfg.validate();
    require_alpha(params);
    SpreadSolution sol;
    if (params.alpha == 0.0) {
        sol.status = SpreadStatus::zero_population;
        return sol;
    }
    const double alpha = params.alpha;
    // The balance is decreasing in x; search the negated function for its upward crossing.
    auto f = [alpha](double x) { return -no_lastlook_balance(x, alpha); };
    const Root r = first_upward_root(f, f(0.0), cfg, "solve_spread_no_lastlook");
    sol.spread = params.sigma * r.x;
    sol.residual = -r.residual;
    sol.iterations = r.iterations;
    sol.sign_changes = r.sign_changes;
    sol.bracket_lo = r.lo;
    sol.bracket_hi = r.hi;
    return sol;
}

SpreadSolution solve_spread_lastlook(const MarketParams& params, const LastLookPolicy& policy,
                                     const SolverConfig& cfg) {
    cfg.validate();
    require_alpha(params);
    if (!policy.rejects()) return solve_spread_no_lastlook(params, cfg);

    const double xi_n = policy.xi() / params.sigma;
    const double rho = params.rho.value();
    const double alpha = params.alpha;
    const double beta = params.beta;
    auto f = [=](double x) {
        return (1.0 - alpha) * model::normalized::omega_st(x, xi_n, rho, beta) -
               alpha * model::normalized::omega_la(x, xi_n, rho);
    };

    SpreadSolution sol;
    const double f0 = f(0.0);
    if (f0 >= 0.0) {
        // Already break-even or profitable at zero spread; the root would be negative.
        sol.status = f0 > 0.0 ? SpreadStatus::clamped_at_zero : SpreadStatus::root;
        sol.residual = params.sigma * f0;
        return sol;
    }
    const Root r = first_upward_root(f, f0, cfg, "solve_spread_lastlook");
    sol.spread = params.sigma * r.x;
    sol.residual = params.sigma * r.residual;
    sol.iterations = r.iterations;
    sol.sign_changes = r.sign_changes;
    sol.bracket_lo = r.lo;
    sol.bracket_hi = r.hi;
    return sol;
}

double effective_cost_at_threshold(double xi, const MarketParams& params, const DeltaRule& rule,
                                   const SolverConfig& cfg) {
    const LastLookPolicy policy(xi, rule);
    const SpreadSolution s = solve_spread_lastlook(params, policy, cfg);
    return model::effective_cost_st(s.spread, params, policy);
}

OptimalThreshold optimal_rejection_threshold(const MarketParams& params, const DeltaRule& rule,
                                             const ThresholdSearch& search, const SolverConfig& cfg) {
    if (!(search.xi_lo < search.xi_hi) || !(search.xi_hi < 0.0) || !std::isfinite(search.xi_lo)) {
        throw std::domain_error("threshold search needs finite xi_lo < xi_hi < 0");
    }
    if (search.grid_points < 3) throw std::domain_error("threshold search needs at least 3 grid points");

    auto objective = [&](double xi) {
        const double v = effective_cost_at_threshold(xi, params, rule, cfg);
        if (!std::isfinite(v)) {
            std::ostringstream os;
            os << "optimal_rejection_threshold: objective not finite at xi = " << xi;
            throw SolverError(os.str());
        }
        return v;
    };

    const int n = search.grid_points;
    const double step = (search.xi_hi - search.xi_lo) / (n - 1);
    int best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double v = objective(search.xi_lo + step * i);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }

    double a = search.xi_lo + step * std::max(0, best - 1);
    double b = search.xi_lo + step * std::min(n - 1, best + 1);
    const double tol = search.xi_tol * params.sigma;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }

    // Compare the refined interior point with the bracket ends and the grid best.
    OptimalThreshold out;
    std::vector<double> candidates{0.5 * (a + b), search.xi_lo + step * best};
    if (best == 0) candidates.push_back(search.xi_lo);
    if (best == n - 1) candidates.push_back(search.xi_hi);
    out.cost = std::numeric_limits<double>::infinity();
    for (double xi : candidates) {
        const double v = objective(xi);
        if (v < out.cost) {
            out.cost = v;
            out.xi = xi;
        }
    }
    out.spread = solve_spread_lastlook(params, LastLookPolicy(out.xi, rule), cfg).spread;
    if (out.xi - search.xi_lo <= tol) {
        out.location = ThresholdLocation::lower_bound;
    } else if (search.xi_hi - out.xi <= tol) {
        out.location = ThresholdLocation::upper_bound;
    }
    return out;
}

std::string to_string(SpreadStatus s) {
    switch (s) {
        case SpreadStatus::root: return "root";
        case SpreadStatus::zero_population: return "zero_population";
        case SpreadStatus::clamped_at_zero: return "clamped_at_zero";
    }
    return "unknown";
}

std::string to_string(ThresholdLocation l) {
    switch (l) {
        case ThresholdLocation::interior: return "interior";
        case ThresholdLocation::lower_bound: return "lower_bound";
        case ThresholdLocation::upper_bound: return "upper_bound";
    }
    return "unknown";
}

}  // namespace solver
}  // namespace lastlook
