#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include <volcal/black_scholes.hpp>

#include "test_utils.hpp"

using namespace volcal;
using Catch::Approx;

TEST_CASE("norm_cdf symmetry and range", "[black_scholes]") {
    REQUIRE(norm_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
    testutil::Gen gen(11);
    for (int i = 0; i < 200; ++i) {
        const double x = gen.uniform(-8.0, 8.0);
        const double p = norm_cdf(x);
        REQUIRE(p >= 0.0);
        REQUIRE(p <= 1.0);
        REQUIRE(norm_cdf(x) + norm_cdf(-x) == Catch::Approx(1.0).margin(1e-14));
        REQUIRE(norm_cdf(x + 1e-3) >= p);
    }
}

TEST_CASE("norm_cdf against frozen high-precision values", "[black_scholes]") {
    // Frozen from a 50-digit evaluation of the standard normal CDF.
    REQUIRE(norm_cdf(1.0) == Catch::Approx(0.8413447460685429485852325).epsilon(1e-12));
    REQUIRE(norm_cdf(0.5) == Catch::Approx(0.6914624612740131036377046).epsilon(1e-12));
    REQUIRE(norm_cdf(-2.5) == Catch::Approx(0.006209665325776135166978105).epsilon(1e-12));
}

TEST_CASE("norm_cdf against the extended-precision oracle", "[black_scholes]") {
    testutil::Gen gen(12);
    for (int i = 0; i < 500; ++i) {
        const double x = gen.uniform(-6.0, 6.0);
        const double ref = static_cast<double>(testutil::norm_cdf_ref(x));
        REQUIRE(std::fabs(norm_cdf(x) - ref) <= 1e-12);
    }
    REQUIRE_THROWS_AS(norm_cdf(std::numeric_limits<double>::quiet_NaN()), InvalidInput);
}

TEST_CASE("bs_call pinned values", "[black_scholes]") {
    // Frozen from a 50-digit independent evaluation of Eq 1.
    REQUIRE(bs_call(100.0, 100.0, 0.0, 1.0, 0.2) ==
            Approx(7.965567455405796293080924).epsilon(1e-13));
    REQUIRE(bs_call(100.0, 110.0, 0.03, 0.75, 0.25) ==
            Approx(5.66866566188467210146212).epsilon(1e-13));
}

TEST_CASE("bs_call deterministic-payoff limits", "[black_scholes]") {
    REQUIRE(bs_call(110.0, 100.0, 0.0, 1.0, 0.0) == Catch::Approx(10.0).margin(1e-12));
    REQUIRE(bs_call(90.0, 100.0, 0.0, 1.0, 0.0) == 0.0);
    // K -> 0: sure exercise, price -> S.
    REQUIRE(bs_call(100.0, 1e-12, 0.0, 1.0, 0.2) == Catch::Approx(100.0).margin(1e-9));
    // sigma -> 0 continuously approaches the deterministic payoff.
    REQUIRE(bs_call(110.0, 100.0, 0.0, 1.0, 1e-9) == Catch::Approx(10.0).margin(1e-9));
}

TEST_CASE("bs_call bounds and monotonicity", "[black_scholes]") {
    testutil::Gen gen(13);
    for (int i = 0; i < 1000; ++i) {
        const double S = gen.uniform(50.0, 200.0);
        const double K = gen.uniform(0.5 * S, 1.8 * S);
        const double r = gen.uniform(0.0, 0.08);
        const double tau = gen.uniform(0.05, 3.0);
        const double sigma = gen.uniform(0.01, 0.9);
        const double c = bs_call(S, K, r, tau, sigma);
        const double intrinsic = std::max(S - K * std::exp(-r * tau), 0.0);
        REQUIRE(c >= intrinsic - 1e-12 * S);
        REQUIRE(c <= S + 1e-12 * S);
        REQUIRE(bs_call(S, K * 1.02, r, tau, sigma) <= c + 1e-12 * S);
        REQUIRE(bs_call(S, K, r, tau, sigma + 0.01) >= c - 1e-12 * S);
    }
}

TEST_CASE("bs_call rejects nonfinite and invalid inputs", "[black_scholes]") {
    REQUIRE_THROWS_AS(bs_call(-1.0, 100.0, 0.0, 1.0, 0.2), InvalidInput);
    REQUIRE_THROWS_AS(bs_call(100.0, 0.0, 0.0, 1.0, 0.2), InvalidInput);
    REQUIRE_THROWS_AS(bs_call(100.0, 100.0, 0.0, 0.0, 0.2), InvalidInput);
    REQUIRE_THROWS_AS(bs_call(100.0, 100.0, 0.0, 1.0, -0.1), InvalidInput);
    REQUIRE_THROWS_AS(bs_call(std::numeric_limits<double>::infinity(), 100.0, 0.0, 1.0, 0.2),
                      InvalidInput);
    BsParams bad{0.0};
    REQUIRE_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("bs_call_variance equals bs_call at sigma = sqrt(v)", "[black_scholes]") {
    REQUIRE(bs_call_variance(100.0, 100.0, 0.0, 1.0, 0.04) ==
            Approx(bs_call(100.0, 100.0, 0.0, 1.0, 0.2)).epsilon(1e-15));
    REQUIRE(bs_call_variance(110.0, 100.0, 0.0, 1.0, 0.0) == Catch::Approx(10.0).margin(1e-12));
    REQUIRE_THROWS_AS(bs_call_variance(100.0, 100.0, 0.0, 1.0, -1e-9), InvalidInput);
    // Monotone nondecreasing in the variance rate.
    double prev = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double v = 1e-4 + 0.3 * i / 99.0;
        const double c = bs_call_variance(95.0, 100.0, 0.02, 0.7, v);
        REQUIRE(c >= prev - 1e-12);
        prev = c;
    }
}

TEST_CASE("bs_variance_derivative order 1 is the vega chain-rule identity",
          "[black_scholes]") {
    const double S = 100.0, K = 100.0, r = 0.0, tau = 1.0, v = 0.04;
    const double sigma = std::sqrt(v);
    const double d1 =
        (std::log(S / K) + (r + 0.5 * v) * tau) / (sigma * std::sqrt(tau));
    const double vega = S * norm_pdf(d1) * std::sqrt(tau);
    REQUIRE(bs_variance_derivative(S, K, r, tau, v, 1) ==
            Approx(vega / (2.0 * sigma)).epsilon(1e-12));
}

TEST_CASE("bs_variance_derivative matches the finite-difference oracle", "[black_scholes]") {
    testutil::Gen gen(14);
    for (int i = 0; i < 40; ++i) {
        const double S = gen.uniform(60.0, 160.0);
        const double K = gen.uniform(0.7 * S, 1.4 * S);
        const double r = gen.uniform(0.0, 0.06);
        const double tau = gen.uniform(0.1, 2.0);
        const double v = gen.uniform(0.005, 0.2);
        for (int order = 1; order <= 4; ++order) {
            const double fd = testutil::bs_variance_derivative_fd(S, K, r, tau, v, order);
            const double an = bs_variance_derivative(S, K, r, tau, v, order);
            const double tol = order <= 2 ? 1e-6 : 1e-4;
            REQUIRE(testutil::rel_diff(an, fd) <= tol);
        }
    }
}

TEST_CASE("bs_variance_derivative vanishes for worthless options", "[black_scholes]") {
    for (int order = 1; order <= 4; ++order) {
        const double d = bs_variance_derivative(100.0, 1e7, 0.0, 0.5, 0.04, order);
        REQUIRE(std::fabs(d) <= 1e-30);
    }
    REQUIRE_THROWS_AS(bs_variance_derivative(100.0, 100.0, 0.0, 1.0, 0.0, 1), InvalidInput);
    REQUIRE_THROWS_AS(bs_variance_derivative(100.0, 100.0, 0.0, 1.0, 0.04, 5), InvalidInput);
    REQUIRE_THROWS_AS(bs_variance_derivative(100.0, 100.0, 0.0, 1.0, 0.04, 0), InvalidInput);
}

TEST_CASE("bs_call matches a lognormal-payoff quadrature oracle", "[black_scholes]") {
    // Independent route: discounted expectation of the payoff under the
    // terminal lognormal density, integrated adaptively in z-space.
    const double S = 100.0, K = 105.0, r = 0.02, tau = 0.8, sigma = 0.25;
    auto integrand = [&](long double z) -> long double {
        const long double sd = sigma * sqrtl(static_cast<long double>(tau));
        const long double st =
            S * expl((r - 0.5L * sigma * sigma) * tau + sd * z);
        const long double payoff = st > K ? st - K : 0.0L;
        const long double phi =
            expl(-0.5L * z * z) / sqrtl(2.0L * 3.14159265358979323846264338327950288L);
        return payoff * phi;
    };
    const long double expectation = testutil::adaptive_simpson(integrand, -12.0L, 12.0L, 1e-16L);
    const double oracle = static_cast<double>(expl(-r * tau) * expectation);
    REQUIRE(bs_call(S, K, r, tau, sigma) == Catch::Approx(oracle).epsilon(1e-10));
}
