#pragma once

#include <cmath>

#include "volcal/errors.hpp"

namespace volcal {

/// Standard normal density.
inline double norm_pdf(double x) {
    constexpr double kInvSqrt2Pi = 0.3989422804014326779;
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Standard normal CDF via erfc; accurate to a few ulp over the whole line,
/// well inside the 1e-12 budget the variance-derivative chain needs.
inline double norm_cdf(double x) {
    if (std::isnan(x)) throw InvalidInput("norm_cdf: x must be finite");
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

/// Constant-volatility model parameter.
struct BsParams {
    double sigma; ///< annualized volatility, > 0

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            throw InvalidInput("BsParams: sigma must be finite and > 0");
        }
    }
};

namespace detail {

inline void check_contract(double S, double K, double r, double tau) {
    if (!(S > 0.0) || !std::isfinite(S)) throw InvalidInput("bs_call: S must be finite and > 0");
    if (!(K > 0.0) || !std::isfinite(K)) throw InvalidInput("bs_call: K must be finite and > 0");
    if (!std::isfinite(r)) throw InvalidInput("bs_call: r must be finite");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("bs_call: tau must be finite and > 0");
}

} // namespace detail

/// European call under constant volatility. sigma = 0 degenerates to the
/// discounted deterministic payoff instead of letting d1/d2 blow up;
/// calibration probes that boundary.
inline double bs_call(double S, double K, double r, double tau, double sigma) {
    detail::check_contract(S, K, r, tau);
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw InvalidInput("bs_call: sigma must be finite and >= 0");
    }
    const double s = sigma * std::sqrt(tau);
    if (s <= 0.0) {
        const double forward_gap = S - K * std::exp(-r * tau);
        return forward_gap > 0.0 ? forward_gap : 0.0;
    }
    const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * tau) / s;
    const double d2 = d1 - s;
    return S * norm_cdf(d1) - K * std::exp(-r * tau) * norm_cdf(d2);
}

/// Call price as a function of the variance rate v = sigma^2.
inline double bs_call_variance(double S, double K, double r, double tau, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidInput("bs_call_variance: variance rate must be finite and >= 0");
    }
    return bs_call(S, K, r, tau, std::sqrt(v));
}

/// i-th partial derivative of the call price with respect to the variance
/// rate v, i in 1..4. Closed forms obtained by differentiating in total
/// variance w = v*tau and scaling by tau^i, using
///   dC/dw            = S phi(d1) / (2 sqrt(w))
///   d(d1)/dw         = -d2/(2w),  d(d2)/dw = -d1/(2w)
/// which collapse each successive derivative into a polynomial in
/// A = d1*d2 and B = d1+d2:
///   d2C/dw2 = dC/dw * (A-1)/(2w)
///   d3C/dw3 = dC/dw * ((A-1)^2 + 2 - B^2)/(4w^2)
///   d4C/dw4 = dC/dw * (a^3 - 3aB^2 + 6a + 6B^2 - 8)/(8w^3),  a = A-1.
inline double bs_variance_derivative(double S, double K, double r, double tau, double v,
                                     int order) {
    detail::check_contract(S, K, r, tau);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidInput("bs_variance_derivative: variance rate must be finite and > 0");
    }
    if (order < 1 || order > 4) {
        throw InvalidInput("bs_variance_derivative: order must be in 1..4");
    }
    const double w = v * tau;
    const double sw = std::sqrt(w);
    const double d1 = (std::log(S / K) + r * tau) / sw + 0.5 * sw;
    const double d2 = d1 - sw;
    const double base = S * norm_pdf(d1) / (2.0 * sw);
    const double A = d1 * d2;
    const double B = d1 + d2;
    double factor = 1.0;
    switch (order) {
        case 1:
            factor = 1.0;
            break;
        case 2:
            factor = (A - 1.0) / (2.0 * w);
            break;
        case 3:
            factor = ((A - 1.0) * (A - 1.0) + 2.0 - B * B) / (4.0 * w * w);
            break;
        case 4: {
            const double a = A - 1.0;
            factor = (a * a * a - 3.0 * a * B * B + 6.0 * a + 6.0 * B * B - 8.0) /
                     (8.0 * w * w * w);
            break;
        }
    }
    return base * factor * std::pow(tau, order);
}

} // namespace volcal
