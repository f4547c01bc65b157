#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lastlook/equilibrium.hpp"
#include "lastlook/mc_oracle.hpp"
#include "lastlook/solver.hpp"
#include "lastlook/verification.hpp"

namespace lastlook::cli {

// Invalid scenario content; `path` locates the offending field, e.g. $.venues[1].xi.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct DeltaSpec {
    std::string rule = "proportional";  // proportional | constant | zero
    double value = 0.5;                 // factor for proportional, delta for constant
};

struct VenueSpec {
    std::string label = "venue";
    std::optional<double> xi;  // nullopt: no Last Look
    DeltaSpec delta;
};

struct MigrationSpec {
    std::string dynamics = "sequential";  // sequential | ode
    double cost = 0.05;
    std::optional<double> cost_la;  // ode only; default `cost`
    std::optional<double> cost_st;
    std::string order = "simultaneous";  // simultaneous | la_first
    int max_steps = 10000;
    double trade_multiplier = 1.0;
};

struct SweepSpec {
    std::string variable = "alpha";  // alpha | xi_over_sigma | rho
    std::vector<double> values;
    std::string series_variable;     // empty: no series
    std::vector<double> series_values;
};

struct ThresholdSpec {
    solver::ThresholdSearch search{};
    int curve_points = 101;
};

struct SimulationSpec {
    std::uint64_t n_samples = 1'000'000;
    bool antithetic = false;
    verification::OracleGrid grid{};
};

struct Scenario {
    double sigma = 1.0;
    double rho = 0.0;
    double beta = 1.0;
    double alpha = 0.1;
    std::string mode = "exact";  // exact | asymptotic
    std::uint64_t seed = 2018;
    std::vector<VenueSpec> venues{VenueSpec{}};
    std::vector<double> n_la;  // per-venue populations
    std::vector<double> n_st;
    MigrationSpec migration;
    equilibrium::OdeConfig ode;
    SolverConfig solver;
    SweepSpec sweep;
    ThresholdSpec threshold;
    int region_resolution = 200;
    SimulationSpec simulation;

    [[nodiscard]] MarketParams params() const;
    [[nodiscard]] Environment environment() const;
    [[nodiscard]] LastLookPolicy policy(std::size_t venue) const;
    [[nodiscard]] DeltaRule delta_rule(std::size_t venue) const;
    [[nodiscard]] std::vector<Venue> venue_list() const;
    [[nodiscard]] EvaluationMode evaluation_mode() const;
    [[nodiscard]] EquilibriumOptions options() const;
    [[nodiscard]] MarketState state() const;
    [[nodiscard]] equilibrium::OdeConfig ode_config() const;
};

// Rejects unknown keys, wrong types and values violating module invariants.
[[nodiscard]] Scenario parse_scenario(const nlohmann::json& doc);
[[nodiscard]] Scenario load_scenario(const std::string& path);
// Canonical form: every field, defaults included. parse_scenario(to_json(s)) == s.
[[nodiscard]] nlohmann::ordered_json to_json(const Scenario& s);

}  // namespace lastlook::cli
