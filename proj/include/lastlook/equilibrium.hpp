#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lastlook/asymptotics.hpp"
#include "lastlook/model.hpp"
#include "lastlook/solver.hpp"

namespace lastlook {

enum class EvaluationMode { exact, asymptotic };

// Price process and ST behaviour shared by every venue.
struct Environment {
    double sigma = 1.0;
    Correlation rho{0.0};
    double beta = 1.0;

    [[nodiscard]] MarketParams params(double alpha) const { return MarketParams(sigma, rho, alpha, beta); }
};

struct Venue {
    std::string label;
    LastLookPolicy policy;
};

// Per-venue populations. Counts are integral for sequential migration and
// real-valued for the fluid flow.
struct MarketState {
    std::vector<double> n_la;
    std::vector<double> n_st;
    double migration_cost = 0.0;

    [[nodiscard]] std::size_t venues() const noexcept { return n_la.size(); }
    [[nodiscard]] double total_la() const;
    [[nodiscard]] double total_st() const;
    [[nodiscard]] double total() const { return total_la() + total_st(); }
    [[nodiscard]] double population(std::size_t i) const { return n_la.at(i) + n_st.at(i); }
    [[nodiscard]] bool empty(std::size_t i) const { return population(i) <= 0.0; }
    // NaN for an empty venue.
    [[nodiscard]] double alpha(std::size_t i) const;
    void validate() const;
};

struct EquilibriumOptions {
    EvaluationMode mode = EvaluationMode::exact;
    SolverConfig solver{};
    double trade_multiplier = 1.0;  // expected trades per migration decision
    double tolerance = 0.0;         // slack added to the migration cost in checks
};

// The two quantities that drive migration, plus the spread.
struct Payoffs {
    double spread = 0.0;
    double omega_st_effective = 0.0;
    double omega_la = 0.0;
};

// Evaluates one venue's quote as a function of its LA fraction. Asymptotic
// coefficients are computed once at construction.
class VenueModel {
public:
    VenueModel(const Environment& env, Venue venue, EvaluationMode mode, SolverConfig cfg = {});

    // alpha in [0, 1]. alpha = 1 gives the LA-only limit: no finite spread,
    // zero LA profit, infinite ST cost.
    [[nodiscard]] VenueQuote quote(double alpha) const;
    // Same limits as quote(); skips the probabilities.
    [[nodiscard]] Payoffs payoffs(double alpha) const;
    [[nodiscard]] const AsymptoticCoefficients& coefficients() const noexcept { return coef_; }
    [[nodiscard]] const Venue& venue() const noexcept { return venue_; }
    [[nodiscard]] EvaluationMode mode() const noexcept { return mode_; }

private:
    Environment env_;
    Venue venue_;
    EvaluationMode mode_;
    SolverConfig cfg_;
    AsymptoticCoefficients coef_;
};

namespace equilibrium {

[[nodiscard]] VenueQuote venue_quantities(const Venue& venue, const Environment& env, double alpha,
                                          EvaluationMode mode, const SolverConfig& cfg = {});

struct PairCheck {
    std::size_t i = 0;
    std::size_t j = 0;
    double st_gap = 0.0;  // Omega_hat_ST^i - Omega_hat_ST^j
    double la_gap = 0.0;  // Omega_LA^i - Omega_LA^j
    bool st_ok = false;
    bool la_ok = false;
};

struct EquilibriumReport {
    bool in_equilibrium = false;
    bool vacuous = false;  // fewer than two populated venues
    std::vector<std::optional<VenueQuote>> quotes;  // nullopt for empty venues
    std::vector<double> balance_residuals;          // (1-a)Omega_ST - a Omega_LA per venue
    std::vector<PairCheck> pairs;
};

[[nodiscard]] EquilibriumReport is_equilibrium(const MarketState& state, const Environment& env,
                                               const std::vector<Venue>& venues, const EquilibriumOptions& opt = {});

struct Totals {
    double n_la = 0.0;  // M
    double n_st = 0.0;
    [[nodiscard]] double total() const { return n_la + n_st; }
};

// Masks over venue 1's (n_la, n_st) on a resolution x resolution grid,
// row-major in n_la. Cells where a venue is empty are not `defined` and are
// outside every band.
struct EquilibriumRegion {
    int resolution = 0;
    Totals totals;
    double migration_cost = 0.0;
    std::vector<double> n_la_axis;
    std::vector<double> n_st_axis;
    std::vector<std::uint8_t> defined;
    std::vector<std::uint8_t> st_band;
    std::vector<std::uint8_t> la_band;
    std::vector<std::uint8_t> equilibrium;

    [[nodiscard]] std::size_t index(std::size_t i_la, std::size_t j_st) const {
        return i_la * static_cast<std::size_t>(resolution) + j_st;
    }
    [[nodiscard]] std::size_t count(const std::vector<std::uint8_t>& mask) const;
    [[nodiscard]] bool empty() const { return count(equilibrium) == 0; }
    // Nearest-cell lookup of the equilibrium mask for a continuous state.
    [[nodiscard]] bool contains(double n_la_1, double n_st_1, int cell_slack = 0) const;
};

[[nodiscard]] EquilibriumRegion equilibrium_region(const Environment& env, const std::vector<Venue>& venues,
                                                   const Totals& totals, double migration_cost, int resolution,
                                                   const EquilibriumOptions& opt = {});

enum class Band { slow_traders, latency_arbitrageurs };
enum class ConicKind { ellipse, parabola, hyperbola };

// A x^2 + B xy + C y^2 + D x + E y = 0 in venue 1's (x = n_la, y = n_st).
struct ConicSection {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
    double zeta = 0.0;
    double omega = 0.0;  // B^2 - 4AC
    ConicKind kind = ConicKind::parabola;
    [[nodiscard]] double evaluate(double x, double y) const { return a * x * x + b * x * y + c * y * y + d * x + e * y; }
};

struct ConicPair {
    ConicSection plus;   // zeta = H0 - c: band requires evaluate <= 0
    ConicSection minus;  // zeta = H0 + c: band requires evaluate >= 0
    double h0 = 0.0;
    double slope_1 = 0.0;  // first-order slope in venue 1 (eta1 or gamma1)
    double slope_2 = 0.0;
    [[nodiscard]] bool in_band(double x, double y) const { return plus.evaluate(x, y) <= 0.0 && minus.evaluate(x, y) >= 0.0; }
};

[[nodiscard]] ConicPair conic_boundaries(const Environment& env, const std::vector<Venue>& venues, const Totals& totals,
                                         double migration_cost, Band band = Band::slow_traders);
[[nodiscard]] ConicSection make_conic(double slope_1, double slope_2, double zeta, const Totals& totals);

struct FlowRow {
    double t = 0.0;
    double n_la_1 = 0.0, n_st_1 = 0.0, n_la_2 = 0.0, n_st_2 = 0.0;
    double spread_1 = 0.0, spread_2 = 0.0;
    double omega_st_effective_1 = 0.0, omega_st_effective_2 = 0.0;
    double omega_la_1 = 0.0, omega_la_2 = 0.0;
};

enum class FlowStatus {
    equilibrium,  // no type gains more than the migration cost
    corner,       // one venue holds every trader
    boundary,     // stationary only because a population bound blocks the flow
    oscillation,  // sequential migration revisited a state
    max_steps,    // step or time budget exhausted
};

struct FlowTrajectory {
    std::vector<FlowRow> rows;
    FlowStatus status = FlowStatus::max_steps;
    [[nodiscard]] const FlowRow& terminal() const { return rows.back(); }
};

enum class MigrationOrder { simultaneous, la_first };

struct SequentialConfig {
    int max_steps = 10000;
    MigrationOrder order = MigrationOrder::simultaneous;
};

[[nodiscard]] FlowTrajectory sequential_migration(const MarketState& initial, const Environment& env,
                                                  const std::vector<Venue>& venues, const SequentialConfig& cfg = {},
                                                  const EquilibriumOptions& opt = {});

class StepSizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OdeConfig {
    double kappa_la = 40.0;
    double kappa_st = 20.0;
    double cost_la = 0.05;
    double cost_st = 0.05;
    double dt = 0.05;
    double t_max = 5000.0;
    double gap_tol = 1e-7;         // stop once every net gain is within this of zero
    double empty_threshold = 0.5;  // a venue at or below this population is empty
    double overshoot_tol = 0.01;   // max overshoot past a bound, as a fraction of that type's total
    int record_every = 20;
};

[[nodiscard]] FlowTrajectory ode_flow(const MarketState& initial, const Environment& env,
                                      const std::vector<Venue>& venues, const OdeConfig& cfg = {},
                                      const EquilibriumOptions& opt = {});

[[nodiscard]] std::string to_string(FlowStatus s);
[[nodiscard]] std::string to_string(ConicKind k);

}  // namespace equilibrium
}  // namespace lastlook
