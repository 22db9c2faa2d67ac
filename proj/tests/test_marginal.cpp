#include <doctest.h>

#include <cmath>
#include <random>

#include "sej/marginal.hpp"

using namespace sej;

TEST_CASE("support construction with 10% overshoot") {
    const Marginal m = fit_marginal({0, 6, 26}, 0.1);
    CHECK(m.support_lo() == doctest::Approx(-2.6).epsilon(1e-12));
    CHECK(m.support_hi() == doctest::Approx(28.6).epsilon(1e-12));
    CHECK(m.cdf(6.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(m.degenerate());
}

TEST_CASE("degenerate triple is a point mass") {
    const Marginal m = fit_marginal({5, 5, 5});
    CHECK(m.degenerate());
    CHECK(m.cdf(4.999) == 0.0);
    CHECK(m.cdf(5.0) == 1.0);
    CHECK(m.inv_cdf(0.0) == 5.0);
    CHECK(m.inv_cdf(0.313) == 5.0);
    CHECK(m.inv_cdf(1.0) == 5.0);
    const auto [mean, var] = m.moments();
    CHECK(mean == 5.0);
    CHECK(var == 0.0);
}

TEST_CASE("inverse CDF returns the elicited quantiles exactly") {
    const std::vector<QuantileTriple> triples = {
        {0, 6, 26}, {-10, 3, 20}, {-9, 2, 19}, {-11, 18, 80}, {-1.25, 0.5, 33.125}};
    for (const auto& t : triples) {
        const Marginal m = fit_marginal(t);
        CHECK(m.inv_cdf(0.05) == t.q05);
        CHECK(m.inv_cdf(0.5) == t.q50);
        CHECK(m.inv_cdf(0.95) == t.q95);
        CHECK(m.inv_cdf(0.0) == m.support_lo());
        CHECK(m.inv_cdf(1.0) == m.support_hi());
    }
}

TEST_CASE("round trip through the CDF") {
    const Marginal m = fit_marginal({0, 6, 26});
    CHECK(m.inv_cdf(m.cdf(10.0)) == doctest::Approx(10.0).epsilon(1e-9));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> x_in(-2.6, 28.6);
    for (int i = 0; i < 1000; ++i) {
        const double x = x_in(rng);
        CHECK(m.inv_cdf(m.cdf(x)) == doctest::Approx(x).epsilon(1e-9));
    }
    std::uniform_real_distribution<double> u_in(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double u = u_in(rng);
        CHECK(m.cdf(m.inv_cdf(u)) == doctest::Approx(u).epsilon(1e-9));
    }
}

TEST_CASE("CDF clamps outside the support and rejects NaN") {
    const Marginal m = fit_marginal({0, 6, 26});
    CHECK(m.cdf(-1000.0) == 0.0);
    CHECK(m.cdf(1000.0) == 1.0);
    CHECK_THROWS_AS(m.cdf(std::nan("")), Error);
    CHECK_THROWS_AS(m.inv_cdf(-0.1), Error);
    CHECK_THROWS_AS(m.inv_cdf(1.1), Error);
}

TEST_CASE("moments of the piecewise-uniform density") {
    SUBCASE("hand-checked means") {
        CHECK(fit_marginal({-10, 3, 20}).moments().first ==
              doctest::Approx(4.10).epsilon(1e-12));
        CHECK(fit_marginal({0, 6, 26}).moments().first == doctest::Approx(9.85).epsilon(1e-12));
        CHECK(fit_marginal({-10, 0, 10}).moments().first == doctest::Approx(0.0));
    }
    SUBCASE("against direct sampling") {
        const Marginal m = fit_marginal({-10, 3, 20});
        const auto [mean, var] = m.moments();
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const int n = 1'000'000;
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = m.inv_cdf(unif(rng));
            acc += x;
            acc2 += x * x;
        }
        const double mc_mean = acc / n;
        const double mc_var = acc2 / n - mc_mean * mc_mean;
        // three Monte Carlo standard errors
        const double se_mean = std::sqrt(var / n);
        CHECK(std::abs(mean - mc_mean) < 3.0 * se_mean);
        CHECK(std::abs(var - mc_var) < 0.02 * var);
    }
}

TEST_CASE("affine transform property of the fit") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(-20.0, 20.0);
    std::uniform_real_distribution<double> scale(0.1, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        double q[3] = {unif(rng), unif(rng), unif(rng)};
        std::sort(q, q + 3);
        const double a = scale(rng), b = unif(rng);
        const Marginal base = fit_marginal({q[0], q[1], q[2]});
        const Marginal mapped = fit_marginal({a * q[0] + b, a * q[1] + b, a * q[2] + b});
        for (int i = 0; i < 20; ++i) {
            const double x = base.support_lo() +
                             (base.support_hi() - base.support_lo()) * (i / 19.0);
            CHECK(mapped.cdf(a * x + b) == doctest::Approx(base.cdf(x)).epsilon(1e-9));
        }
    }
}

TEST_CASE("partially degenerate triples keep the knot identities") {
    const Marginal m = fit_marginal({0, 0, 10});
    CHECK(m.inv_cdf(0.05) == 0.0);
    CHECK(m.inv_cdf(0.5) == 0.0);
    CHECK(m.inv_cdf(0.95) == 10.0);
    CHECK(m.cdf(0.0) == doctest::Approx(0.5)); // mass of both lower bins
    CHECK(m.cdf(m.support_hi()) == 1.0);
}

TEST_CASE("overshoot must be finite and non-negative") {
    CHECK_THROWS_AS(fit_marginal({0, 1, 2}, -0.1), Error);
    CHECK_NOTHROW(fit_marginal({0, 1, 2}, 0.0));
}
