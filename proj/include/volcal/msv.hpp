#pragma once

#include <cmath>
#include <cstdlib>
#include <tuple>

#include "volcal/black_scholes.hpp"
#include "volcal/errors.hpp"
#include "volcal/price_result.hpp"
#include "volcal/quadrature.hpp"

namespace volcal {

/// Variance term structure sigma0^2 e^{-lambda t} + sigma1^2 lambda t e^{-lambda t}
/// + sigma2^2, modulated by a unit-mean lognormal scalar xi with standard
/// deviation k.
struct MsvParams {
    double sigma0_hat = 0.0;
    double sigma1_hat = 0.0;
    double sigma2_hat = 0.0;
    double lambda = 0.0; ///< decay rate per year
    double k = 0.0;      ///< lognormal standard deviation of xi

    void validate() const {
        auto nonneg = [](double x, const char* name) {
            if (!(x >= 0.0) || !std::isfinite(x)) {
                throw InvalidInput(std::string("MsvParams: ") + name +
                                   " must be finite and >= 0");
            }
        };
        nonneg(sigma0_hat, "sigma0_hat");
        nonneg(sigma1_hat, "sigma1_hat");
        nonneg(sigma2_hat, "sigma2_hat");
        nonneg(lambda, "lambda");
        nonneg(k, "k");
        if (sigma0_hat == 0.0 && sigma1_hat == 0.0 && sigma2_hat == 0.0) {
            throw InvalidInput("MsvParams: variance would be identically zero");
        }
    }
};

/// Central moments of the time-averaged variance rate V = xi * Ibar(tau).
struct MsvMoments {
    double mean_rate = 0.0; ///< E(V)
    double mu2 = 0.0;
    double mu3 = 0.0;
    double mu4 = 0.0;
};

namespace msv_detail {

// (1 - e^{-x})/x and (1 - e^{-x}(1+x))/x. Both hit catastrophic
// cancellation near zero; below the cutoff the series keeps full precision
// (the mean-rate contract is 1e-10 relative down to lambda*tau = 1e-8).
inline double decay_factor_level(double x) {
    if (x < 1e-3) {
        return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0 + x * x * x * x / 120.0;
    }
    return -std::expm1(-x) / x;
}

inline double decay_factor_slope(double x) {
    if (x < 1e-3) {
        const double x2 = x * x;
        return x / 2.0 - x2 / 3.0 + x2 * x / 8.0 - x2 * x2 / 30.0 + x2 * x2 * x / 144.0;
    }
    return (-std::expm1(-x) - x * std::exp(-x)) / x;
}

} // namespace msv_detail

/// Mean variance rate Ibar(tau) = (1/tau) ∫_0^tau (deterministic factor) dt.
inline double mean_variance_rate(const MsvParams& p, double tau) {
    p.validate();
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw InvalidInput("mean_variance_rate: tau must be finite and > 0");
    }
    const double x = p.lambda * tau;
    return p.sigma0_hat * p.sigma0_hat * msv_detail::decay_factor_level(x) +
           p.sigma1_hat * p.sigma1_hat * msv_detail::decay_factor_slope(x) +
           p.sigma2_hat * p.sigma2_hat;
}

/// Second, third, and fourth central moments of a unit-mean lognormal with
/// standard deviation k:
///   m2 = k^2
///   m3 = k^4 (3 + k^2)
///   m4 = k^4 {(1+k^2)^4 + 2(1+k^2)^3 + 3(1+k^2)^2 - 3}
inline std::tuple<double, double, double> xi_central_moments(double k) {
    if (!(k >= 0.0) || !std::isfinite(k)) {
        throw InvalidInput("xi_central_moments: k must be finite and >= 0");
    }
    const double k2 = k * k;
    const double k4 = k2 * k2;
    const double y = 1.0 + k2;
    const double y2 = y * y;
    const double m3 = k4 * (3.0 + k2);
    const double m4 = k4 * (y2 * y2 + 2.0 * y2 * y + 3.0 * y2 - 3.0);
    return {k2, m3, m4};
}

/// Central moments of V = xi * Ibar(tau): mu_i = m_i * Ibar^i.
inline MsvMoments msv_moments(const MsvParams& p, double tau) {
    const double ibar = mean_variance_rate(p, tau);
    const auto [m2, m3, m4] = xi_central_moments(p.k);
    MsvMoments mom;
    mom.mean_rate = ibar;
    mom.mu2 = m2 * ibar * ibar;
    mom.mu3 = m3 * ibar * ibar * ibar;
    mom.mu4 = m4 * ibar * ibar * ibar * ibar;
    return mom;
}

/// Taylor-expanded call price around the mean variance rate:
///   C = C_BS(Ibar) + sum_{i=2}^{order} (d^i C_BS/dv^i)(Ibar) * mu_i / i!
/// order in {2,3,4}; 4 retains every moment the model supplies.
inline PriceResult msv_call(const MsvParams& p, double S, double K, double r, double tau,
                            int order = 4) {
    if (order < 2 || order > 4) throw InvalidInput("msv_call: order must be in {2,3,4}");
    const MsvMoments mom = msv_moments(p, tau);
    PriceResult res;
    res.order = order;
    const double base = bs_call_variance(S, K, r, tau, mom.mean_rate);
    res.term_sizes.push_back(std::fabs(base));
    double price = base;
    const double mu[5] = {0.0, 0.0, mom.mu2, mom.mu3, mom.mu4};
    double factorial = 1.0;
    for (int i = 2; i <= order; ++i) {
        factorial *= i;
        const double term =
            bs_variance_derivative(S, K, r, tau, mom.mean_rate, i) * mu[i] / factorial;
        if (!std::isfinite(term)) {
            throw NumericFailure("msv_call: nonfinite Taylor term at order " +
                                 std::to_string(i) + " (k too large for the expansion)");
        }
        res.term_sizes.push_back(std::fabs(term));
        price += term;
    }
    res.price = price;
    return res;
}

/// Exact mixture price E_xi[C_BS(xi * Ibar)] by Gauss-Hermite quadrature over
/// ln xi ~ Normal(-s^2/2, s^2), s^2 = ln(1 + k^2). Node count doubles from 64
/// until the value moves by no more than 1e-9 * S.
inline PriceResult msv_mixture_oracle(const MsvParams& p, double S, double K, double r,
                                      double tau) {
    const double ibar = mean_variance_rate(p, tau);
    PriceResult res;
    if (p.k == 0.0) {
        res.price = bs_call_variance(S, K, r, tau, ibar);
        return res;
    }
    const double s2 = std::log1p(p.k * p.k);
    const double s = std::sqrt(s2);
    auto value_at = [&](int n) {
        const quad::Rule& rule = quad::gauss_hermite(n);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double xi = std::exp(-0.5 * s2 + s * M_SQRT2 * rule.x[i]);
            sum += rule.w[i] * bs_call_variance(S, K, r, tau, xi * ibar);
        }
        return sum / std::sqrt(M_PI);
    };
    int n = 64;
    double prev = value_at(n);
    bool converged = false;
    while (n < 1024 && !converged) {
        n *= 2;
        const double cur = value_at(n);
        converged = std::fabs(cur - prev) <= 1e-9 * S;
        prev = cur;
    }
    if (!converged) {
        throw NumericFailure("msv_mixture_oracle: quadrature did not converge");
    }
    res.price = prev;
    res.quad_nodes = n;
    return res;
}

} // namespace volcal
