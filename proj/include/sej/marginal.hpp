#pragma once

#include <array>
#include <utility>

#include "sej/domain.hpp"

namespace sej {

// Theoretical masses of the four inter-quantile bins fixed by the
// three-quantile elicitation format.
inline constexpr std::array<double, 4> kBinMass = {0.05, 0.45, 0.45, 0.05};

// Continuous distribution reconstructed from three elicited quantiles:
// piecewise uniform over (L, q05, q50, q95, U) with bin masses
// (0.05, 0.45, 0.45, 0.05). The support overshoots the 90% interval by a
// fraction k on each side. A degenerate triple is a point mass at q50.
class Marginal {
public:
    static constexpr double kDefaultOvershoot = 0.10;

    // fit_marginal: throws NonMonotoneQuantiles.
    static Marginal fit(const QuantileTriple& t, double overshoot = kDefaultOvershoot);

    // Right-continuous CDF; clamps to 0/1 outside the support.
    // Throws OutOfSupport for NaN.
    double cdf(double x) const;

    // Inverse CDF for u in [0, 1]; returns knots exactly at
    // u in {0, 0.05, 0.5, 0.95, 1}. Throws OutOfSupport for u outside [0,1].
    double inv_cdf(double u) const;

    // Exact (mean, variance) of the piecewise-uniform density.
    std::pair<double, double> moments() const;

    double support_lo() const noexcept { return knots_[0]; }
    double support_hi() const noexcept { return knots_[4]; }
    double q05() const noexcept { return knots_[1]; }
    double q50() const noexcept { return knots_[2]; }
    double q95() const noexcept { return knots_[3]; }
    bool degenerate() const noexcept { return degenerate_; }
    const std::array<double, 5>& knots() const noexcept { return knots_; }

private:
    std::array<double, 5> knots_{}; // (L, q05, q50, q95, U)
    bool degenerate_ = false;
};

inline Marginal fit_marginal(const QuantileTriple& t,
                             double overshoot = Marginal::kDefaultOvershoot) {
    return Marginal::fit(t, overshoot);
}

} // namespace sej
