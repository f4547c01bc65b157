#pragma once

#include <stdexcept>
#include <string>

#include "lastlook/model.hpp"

namespace lastlook {

struct SolverConfig {
    double abs_tol = 1e-12;   // on the normalized spread
    int max_iter = 200;
    double bracket_hi = 10.0;  // initial upper bracket, normalized units

    void validate() const;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The balancing equation has no finite root (alpha >= 1).
class NoFiniteSolution : public SolverError {
public:
    using SolverError::SolverError;
};

enum class SpreadStatus {
    root,             // bracketed sign change refined to tolerance
    zero_population,  // alpha = 0 without Last Look: nothing to recover
    clamped_at_zero,  // broker already profitable at zero spread
};

struct SpreadSolution {
    double spread = 0.0;     // price units
    SpreadStatus status = SpreadStatus::root;
    double residual = 0.0;   // balancing function at the returned spread, price units
    int iterations = 0;
    int sign_changes = 0;    // sign changes seen on the coarse scan; > 1 flags non-uniqueness
    double bracket_lo = 0.0;  // normalized bracket enclosing the root
    double bracket_hi = 0.0;
};

namespace solver {

// (1 - alpha) Omega_ST(spread) - alpha Omega_LA(spread), price units.
[[nodiscard]] double broker_profit(double spread, const MarketParams& params, const LastLookPolicy& policy);

// phi(x) - x Phi(-x) - (1 - alpha)/(2 alpha) x, in the normalized spread x.
[[nodiscard]] double no_lastlook_balance(double x, double alpha);

[[nodiscard]] SpreadSolution solve_spread_no_lastlook(const MarketParams& params, const SolverConfig& cfg = {});
[[nodiscard]] SpreadSolution solve_spread_lastlook(const MarketParams& params, const LastLookPolicy& policy,
                                                   const SolverConfig& cfg = {});

enum class ThresholdLocation { interior, lower_bound, upper_bound };

struct OptimalThreshold {
    double xi = 0.0;
    double spread = 0.0;
    double cost = 0.0;  // effective ST cost at (xi, spread)
    ThresholdLocation location = ThresholdLocation::interior;
    [[nodiscard]] bool at_boundary() const noexcept { return location != ThresholdLocation::interior; }
};

struct ThresholdSearch {
    double xi_lo = -6.0;  // price units
    double xi_hi = -1.0;
    int grid_points = 64;
    double xi_tol = 1e-4;  // in units of sigma
};

// Effective ST cost at the break-even spread for threshold xi.
[[nodiscard]] double effective_cost_at_threshold(double xi, const MarketParams& params, const DeltaRule& rule,
                                                 const SolverConfig& cfg = {});

// Minimizes the ST's effective cost over xi in [xi_lo, xi_hi]: coarse grid
// scan followed by golden-section refinement.
[[nodiscard]] OptimalThreshold optimal_rejection_threshold(const MarketParams& params, const DeltaRule& rule,
                                                           const ThresholdSearch& search = {},
                                                           const SolverConfig& cfg = {});

[[nodiscard]] std::string to_string(SpreadStatus s);
[[nodiscard]] std::string to_string(ThresholdLocation l);

}  // namespace solver
}  // namespace lastlook
