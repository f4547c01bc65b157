#pragma once

#include <limits>

namespace lastlook {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Correlation coefficient restricted to the open interval (-1, 1).
class Correlation {
public:
    explicit Correlation(double value);
    [[nodiscard]] double value() const noexcept { return value_; }

private:
    double value_;
};

// phi(x). Throws std::domain_error for non-finite x.
[[nodiscard]] double std_normal_pdf(double x);

// Phi(x). Accepts +/-inf; throws std::domain_error for NaN.
[[nodiscard]] double std_normal_cdf(double x);

// P[X <= x, Y <= y] for a standard bivariate normal pair with correlation rho.
// x and y may be +/-inf.
[[nodiscard]] double bivariate_normal_cdf(double x, double y, Correlation rho);

namespace detail {

// Unchecked variants used inside the closed forms, where +/-inf arguments
// arise from the no-Last-Look sentinel and must map to their limits.
[[nodiscard]] double pdf(double x) noexcept;
[[nodiscard]] double cdf(double x) noexcept;
[[nodiscard]] double bvn_cdf(double x, double y, double rho) noexcept;

}  // namespace detail
}  // namespace lastlook
