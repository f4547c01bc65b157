#include "lastlook/gauss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lastlook {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684759;

// Gauss-Legendre rule on [-1, 1], computed once by Newton iteration on P_n.
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> nodes{};
    std::array<double, N> weights{};

    GaussLegendre() {
        const std::size_t m = (N + 1) / 2;
        for (std::size_t i = 0; i < m; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0;
                double p1 = 0.0;
                for (std::size_t j = 1; j <= N; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
                }
                dp = N * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            nodes[i] = -z;
            nodes[N - 1 - i] = z;
            weights[i] = weights[N - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre<20>& gl20() {
    static const GaussLegendre<20> rule;
    return rule;
}

// P[X > h, Y > k] (Drezner-Wesolowsky reduction as refined by Genz).
double bvn_upper(double h, double k, double r) noexcept {
    const auto& gl = gl20();
    const double hk = h * k;
    double bvn = 0.0;

    if (std::abs(r) < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = std::asin(r);
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double sn = std::sin(0.5 * asr * (gl.nodes[i] + 1.0));
            bvn += gl.weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        // Rule covers [-1, 1] once, i.e. both symmetric halves of the classic form.
        return bvn * asr / (2.0 * kTwoPi) + detail::cdf(-h) * detail::cdf(-k);
    }

    double kk = k;
    double hkk = hk;
    if (r < 0.0) {
        kk = -k;
        hkk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - kk) * (h - kk);
        const double c = (4.0 - hkk) / 8.0;
        const double d = (12.0 - hkk) / 16.0;
        bvn = a * std::exp(-0.5 * (bs / as + hkk)) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (hkk > -160.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-0.5 * hkk) * std::sqrt(kTwoPi) * detail::cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a *= 0.5;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double xs = std::pow(a * (gl.nodes[i] + 1.0), 2);
            const double rs = std::sqrt(1.0 - xs);
            const double asr = -0.5 * (bs / xs + hkk);
            if (asr > -100.0) {
                bvn += a * gl.weights[i] * std::exp(asr) *
                       (std::exp(-hkk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs -
                        (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / kTwoPi;
    }
    if (r > 0.0) {
        bvn += detail::cdf(-std::max(h, kk));
    } else {
        bvn = -bvn;
        if (kk > h) {
            bvn += (h < 0.0) ? detail::cdf(kk) - detail::cdf(h) : detail::cdf(-h) - detail::cdf(-kk);
        }
    }
    return bvn;
}

}  // namespace

Correlation::Correlation(double value) : value_(value) {
    if (!(std::abs(value) < 1.0)) {
        throw std::domain_error("correlation must lie in (-1, 1), got " + std::to_string(value));
    }
}

namespace detail {

double pdf(double x) noexcept {
    if (std::isinf(x)) return 0.0;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double cdf(double x) noexcept {
    if (x == kInf) return 1.0;
    if (x == -kInf) return 0.0;
    // erfc keeps relative accuracy in the lower tail; past |x| = 8 the
    // extended-precision routine avoids the last few ulps of loss in tail ratios.
    if (std::abs(x) > 8.0) {
        const long double v = 0.5L * std::erfc(-static_cast<long double>(x) / std::sqrt(2.0L));
        return static_cast<double>(v);
    }
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double bvn_cdf(double x, double y, double rho) noexcept {
    if (x == -kInf || y == -kInf) return 0.0;
    if (x == kInf) return cdf(y);
    if (y == kInf) return cdf(x);
    // P[X <= x, Y <= y] = P[-X > -x, -Y > -y]
    const double p = bvn_upper(-x, -y, rho);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace detail

double std_normal_pdf(double x) {
    if (!std::isfinite(x)) throw std::domain_error("std_normal_pdf: argument must be finite");
    return detail::pdf(x);
}

double std_normal_cdf(double x) {
    if (std::isnan(x)) throw std::domain_error("std_normal_cdf: NaN argument");
    return detail::cdf(x);
}

double bivariate_normal_cdf(double x, double y, Correlation rho) {
    if (std::isnan(x) || std::isnan(y)) throw std::domain_error("bivariate_normal_cdf: NaN argument");
    return detail::bvn_cdf(x, y, rho.value());
}

}  // namespace lastlook
