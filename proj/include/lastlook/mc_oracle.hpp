#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lastlook/model.hpp"

namespace lastlook {

struct SimConfig {
    std::uint64_t n_samples = 1'000'000;
    std::uint64_t seed = 2018;
    bool antithetic = false;  // pairs (Z1, Zperp) with (-Z1, -Zperp)

    void validate() const;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

struct SimEstimates {
    Estimate omega_st;  // price units, accepted trades only
    Estimate omega_la;
    Estimate psi_st;
    Estimate psi_la;               // among LA trades
    std::optional<Estimate> upsilon;  // nullopt when nothing was rejected
    std::uint64_t la_trades = 0;      // samples in which an LA trades
    std::uint64_t rejected = 0;       // rejections in the typed trade stream
};

namespace mc {

struct Increment {
    double z1;
    double z2;
};

// Standardized revisions (Z1, Z2) with corr rho; deterministic in seed.
[[nodiscard]] std::vector<Increment> draw_increments(const MarketParams& params, std::size_t n, std::uint64_t seed);

// Monte Carlo estimates of the venue quantities at a given spread. Batches
// use independent sub-seeds and are merged in order, so the result does not
// depend on the thread count.
[[nodiscard]] SimEstimates simulate(const MarketParams& params, const LastLookPolicy& policy, double spread,
                                    const SimConfig& cfg = {});

// SplitMix64 step, used to derive batch seeds.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace mc
}  // namespace lastlook
