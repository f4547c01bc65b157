#include "lastlook/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lastlook/parallel.hpp"

namespace lastlook {

void SimConfig::validate() const {
    if (n_samples < 1) throw std::domain_error("SimConfig: n_samples must be at least 1");
}

namespace mc {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<Increment> draw_increments(const MarketParams& params, std::size_t n, std::uint64_t seed) {
    params.validate();
    const double rho = params.rho.value();
    const double s = std::sqrt(1.0 - rho * rho);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Increment> out(n);
    for (auto& inc : out) {
        const double z1 = normal(rng);
        const double zp = normal(rng);
        inc = {z1, rho * z1 + s * zp};
    }
    return out;
}

namespace {

constexpr std::uint64_t kBatch = 1u << 16;

// Running first and second moments of a per-unit statistic.
struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    [[nodiscard]] Estimate estimate(double n) const {
        const double mean = sum / n;
        const double var = n > 1.0 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
        return {mean, std::sqrt(var / n)};
    }
};

struct Accumulator {
    double units = 0.0;
    Moments st_cost, la_profit, st_accept;
    std::uint64_t la_trades = 0;
    std::uint64_t la_accepted = 0;
    std::uint64_t typed = 0;
    std::uint64_t rejected = 0;
    std::uint64_t rejected_la = 0;

    void merge(const Accumulator& o) {
        units += o.units;
        st_cost.merge(o.st_cost);
        la_profit.merge(o.la_profit);
        st_accept.merge(o.st_accept);
        la_trades += o.la_trades;
        la_accepted += o.la_accepted;
        typed += o.typed;
        rejected += o.rejected;
        rejected_la += o.rejected_la;
    }
};

struct Venue {
    double rho_c;   // sqrt(1 - rho^2)
    double rho;
    double beta;
    double x;       // normalized spread
    double xi;      // normalized threshold (may be -inf)
    double alpha;
};

struct StTrade {
    double cost;
    bool accepted;
};

// Normalized ST round trip. `updated` and `buy` are the ST's draws.
StTrade st_trade(const Venue& v, double z1, double z2, bool updated, bool buy) {
    if (updated) {
        // Executes at the updated mid P1; the broker compares with P2.
        const bool acc = buy ? (-z2 > v.xi) : (z2 > v.xi);
        return {acc ? v.x : 0.0, acc};
    }
    const double p2 = z1 + z2;
    const bool acc = buy ? (-p2 > v.xi) : (p2 > v.xi);
    const double cost = buy ? (v.x - z1) : (v.x + z1);
    return {acc ? cost : 0.0, acc};
}

// Normalized LA profit; trades only when |Z1| exceeds the spread.
struct LaTrade {
    bool traded;
    bool accepted;
    double profit;
};

LaTrade la_trade(const Venue& v, double z1, double z2) {
    const double p2 = z1 + z2;
    if (z1 > v.x) {
        const bool acc = -p2 > v.xi;
        return {true, acc, acc ? z1 - v.x : 0.0};
    }
    if (z1 < -v.x) {
        const bool acc = p2 > v.xi;
        return {true, acc, acc ? -z1 - v.x : 0.0};
    }
    return {false, false, 0.0};
}

Accumulator run_batch(const Venue& v, std::uint64_t n, std::uint64_t seed, bool antithetic, bool typed_stream) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Accumulator acc;

    auto one = [&](double z1, double zp, bool updated, bool buy, double& st_cost, double& st_acc, double& la_profit) {
        const double z2 = v.rho * z1 + v.rho_c * zp;
        const StTrade st = st_trade(v, z1, z2, updated, buy);
        st_cost += st.cost;
        st_acc += st.accepted ? 1.0 : 0.0;
        const LaTrade la = la_trade(v, z1, z2);
        la_profit += la.profit;
        if (la.traded) {
            ++acc.la_trades;
            if (la.accepted) ++acc.la_accepted;
        }
    };

    const std::uint64_t units = antithetic ? (n + 1) / 2 : n;
    for (std::uint64_t u = 0; u < units; ++u) {
        const double z1 = normal(rng);
        const double zp = normal(rng);
        const bool updated = unif(rng) < v.beta;
        const bool buy = unif(rng) < 0.5;
        double c = 0.0, a = 0.0, p = 0.0;
        one(z1, zp, updated, buy, c, a, p);
        double w = 1.0;
        if (antithetic) {
            one(-z1, -zp, updated, buy, c, a, p);
            w = 0.5;
        }
        acc.st_cost.add(w * c);
        acc.st_accept.add(w * a);
        acc.la_profit.add(w * p);
        acc.units += 1.0;
    }

    if (typed_stream) {
        // Trades labelled by type; LA trades exist only when |Z1| > spread.
        for (std::uint64_t k = 0; k < n; ++k) {
            const bool is_la = unif(rng) < v.alpha;
            bool accepted = true;
            if (is_la) {
                LaTrade la{false, false, 0.0};
                while (!la.traded) {
                    const double z1 = normal(rng);
                    const double z2 = v.rho * z1 + v.rho_c * normal(rng);
                    la = la_trade(v, z1, z2);
                }
                accepted = la.accepted;
            } else {
                const double z1 = normal(rng);
                const double z2 = v.rho * z1 + v.rho_c * normal(rng);
                const bool updated = unif(rng) < v.beta;
                const bool buy = unif(rng) < 0.5;
                accepted = st_trade(v, z1, z2, updated, buy).accepted;
            }
            ++acc.typed;
            if (!accepted) {
                ++acc.rejected;
                if (is_la) ++acc.rejected_la;
            }
        }
    }
    return acc;
}

Estimate proportion(std::uint64_t hits, std::uint64_t n) {
    if (n == 0) return {0.0, 0.0};
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

}  // namespace

SimEstimates simulate(const MarketParams& params, const LastLookPolicy& policy, double spread, const SimConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!(spread >= 0.0) || !std::isfinite(spread)) throw std::domain_error("simulate: spread must be finite and >= 0");

    const double rho = params.rho.value();
    const Venue v{std::sqrt(1.0 - rho * rho), rho, params.beta, spread / params.sigma,
                  policy.rejects() ? policy.xi() / params.sigma : -kInf, params.alpha};
    // Conditioning on |Z1| > spread by rejection needs a non-negligible acceptance rate.
    const bool typed_stream = policy.rejects() && 2.0 * detail::cdf(-v.x) > 1e-6;

    const std::uint64_t batches = (cfg.n_samples + kBatch - 1) / kBatch;
    std::vector<Accumulator> parts(batches);
    parallel_for(batches, [&](std::size_t b) {
        const std::uint64_t n = std::min<std::uint64_t>(kBatch, cfg.n_samples - b * kBatch);
        parts[b] = run_batch(v, n, splitmix64(cfg.seed ^ splitmix64(b)), cfg.antithetic, typed_stream);
    });
    Accumulator total;
    for (const auto& p : parts) total.merge(p);

    const double sigma = params.sigma;
    SimEstimates est;
    est.omega_st = total.st_cost.estimate(total.units);
    est.omega_st.mean *= sigma;
    est.omega_st.se *= sigma;
    est.omega_la = total.la_profit.estimate(total.units);
    est.omega_la.mean *= sigma;
    est.omega_la.se *= sigma;
    est.psi_st = total.st_accept.estimate(total.units);
    est.psi_la = total.la_trades ? proportion(total.la_accepted, total.la_trades) : Estimate{1.0, 0.0};
    est.la_trades = total.la_trades;
    est.rejected = total.rejected;
    if (total.rejected > 0) est.upsilon = proportion(total.rejected_la, total.rejected);
    return est;
}

}  // namespace mc
}  // namespace lastlook
