#include "sej/marginal.hpp"

#include <cmath>

namespace sej {

namespace {
// Cumulative mass at each knot: F(L), F(q05), F(q50), F(q95), F(U).
constexpr std::array<double, 5> kKnotCdf = {0.0, 0.05, 0.5, 0.95, 1.0};
} // namespace

Marginal Marginal::fit(const QuantileTriple& t, double overshoot) {
    checked_triple(t.q05, t.q50, t.q95, "fit_marginal");
    if (!(overshoot >= 0.0) || !std::isfinite(overshoot)) {
        throw Error(Errc::InvalidEntry, "overshoot must be finite and >= 0");
    }
    Marginal m;
    if (t.degenerate()) {
        m.degenerate_ = true;
        m.knots_ = {t.q50, t.q50, t.q50, t.q50, t.q50};
        return m;
    }
    const double spread = t.q95 - t.q05;
    m.knots_ = {t.q05 - overshoot * spread, t.q05, t.q50, t.q95, t.q95 + overshoot * spread};
    return m;
}

double Marginal::cdf(double x) const {
    if (std::isnan(x)) throw Error(Errc::OutOfSupport, "cdf of NaN");
    if (degenerate_) return x < knots_[2] ? 0.0 : 1.0;
    if (x <= knots_[0]) return 0.0;
    if (x >= knots_[4]) return 1.0;
    double c = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double lo = knots_[i], hi = knots_[i + 1];
        if (x >= hi) {
            c += kBinMass[i];
        } else {
            if (x > lo) c += kBinMass[i] * (x - lo) / (hi - lo);
            break;
        }
    }
    return c;
}

double Marginal::inv_cdf(double u) const {
    if (std::isnan(u) || u < 0.0 || u > 1.0) {
        throw Error(Errc::OutOfSupport, "inv_cdf argument outside [0,1]");
    }
    if (degenerate_) return knots_[2];
    // Exact knot identities first.
    for (int i = 0; i < 5; ++i) {
        if (u == kKnotCdf[i]) return knots_[i];
    }
    double c = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double next = kKnotCdf[i + 1];
        if (u <= next) {
            const double width = knots_[i + 1] - knots_[i];
            if (width == 0.0) return knots_[i];
            return knots_[i] + (u - c) / kBinMass[i] * width;
        }
        c = next;
    }
    return knots_[4];
}

std::pair<double, double> Marginal::moments() const {
    if (degenerate_) return {knots_[2], 0.0};
    double mean = 0.0, second = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double a = knots_[i], b = knots_[i + 1];
        mean += kBinMass[i] * 0.5 * (a + b);
        second += kBinMass[i] * (a * a + a * b + b * b) / 3.0;
    }
    return {mean, second - mean * mean};
}

} // namespace sej
