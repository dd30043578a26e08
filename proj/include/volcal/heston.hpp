#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "volcal/errors.hpp"
#include "volcal/price_result.hpp"
#include "volcal/quadrature.hpp"

namespace volcal {

/// Square-root stochastic volatility parameters under the risk-neutral
/// measure (volatility risk premium set to zero).
struct HestonParams {
    double v0 = 0.0;         ///< initial variance rate
    double kappa = 0.0;      ///< mean-reversion speed
    double theta = 0.0;      ///< long-run variance
    double vol_of_vol = 0.0; ///< diffusion of the variance process
    double rho = 0.0;        ///< spot/variance correlation

    void validate() const {
        auto pos = [](double x, const char* name) {
            if (!(x > 0.0) || !std::isfinite(x)) {
                throw InvalidInput(std::string("HestonParams: ") + name +
                                   " must be finite and > 0");
            }
        };
        pos(v0, "v0");
        pos(kappa, "kappa");
        pos(theta, "theta");
        pos(vol_of_vol, "vol_of_vol");
        if (!(rho > -1.0 && rho < 1.0)) {
            throw InvalidInput("HestonParams: rho must lie in (-1, 1)");
        }
    }

    /// 2*kappa*theta / vol_of_vol^2. Reported, never enforced: market
    /// calibrations routinely violate Feller and pricing stays well-defined.
    double feller_ratio() const { return 2.0 * kappa * theta / (vol_of_vol * vol_of_vol); }
};

namespace heston_detail {

using cd = std::complex<double>;

/// Number j selects the measure: u1 = +1/2 with b1 = kappa - rho*sigma,
/// u2 = -1/2 with b2 = kappa.
struct CfTerms {
    cd log_f; ///< C + D*v0 + i*phi*ln(S)
};

// Exponent of f_j, evaluated in the branch-stable rearrangement: the root
// with Re(d) >= 0 is paired with exp(-d*tau), so the log argument never
// circles the origin as phi grows and the principal log stays continuous.
// (beta - d) is formed as sigma^2*(2u*phi*i - phi^2)/(beta + d) to dodge
// the cancellation that otherwise wrecks the vol_of_vol -> 0 limit.
inline cd log_cf(double phi, const HestonParams& p, double log_spot, double r, double tau,
                 int j) {
    const double sigma = p.vol_of_vol;
    const double sigma2 = sigma * sigma;
    const double a = p.kappa * p.theta;
    const double b = (j == 1) ? p.kappa - p.rho * sigma : p.kappa;
    const double u = (j == 1) ? 0.5 : -0.5;
    const cd i(0.0, 1.0);

    const cd beta = cd(b, -p.rho * sigma * phi);
    const cd two_u_phi_i_minus_phi2 = cd(-phi * phi, 2.0 * u * phi);
    const cd d = std::sqrt(beta * beta - sigma2 * two_u_phi_i_minus_phi2);
    const cd beta_plus_d = beta + d;
    const cd q = two_u_phi_i_minus_phi2 / beta_plus_d; // (beta - d)/sigma^2
    const cd g = sigma2 * q / beta_plus_d;             // (beta - d)/(beta + d)
    const cd e_dt = std::exp(-d * tau);

    const cd D = q * (1.0 - e_dt) / (1.0 - g * e_dt);

    // log((1 - g*e_dt)/(1 - g)) / sigma^2, series when |g| is small: the
    // direct log rounds to zero information there and the a/sigma^2 factor
    // amplifies that rounding into the price.
    cd log_term_over_sigma2;
    if (std::abs(g) < 1e-4) {
        const cd q_over = q / beta_plus_d; // g / sigma^2
        cd sum(0.0, 0.0);
        cd g_pow(1.0, 0.0); // g^(n-1)
        cd e_pow = e_dt;    // e^(-n d tau)
        for (int n = 1; n <= 3; ++n) {
            sum += q_over * g_pow * (e_pow - 1.0) / static_cast<double>(n);
            g_pow *= g;
            e_pow *= e_dt;
        }
        log_term_over_sigma2 = -sum;
    } else {
        log_term_over_sigma2 = std::log((1.0 - g * e_dt) / (1.0 - g)) / sigma2;
    }

    const cd C = i * (r * phi * tau) + a * (q * tau - 2.0 * log_term_over_sigma2);
    return C + D * p.v0 + i * (phi * log_spot);
}

struct PjResult {
    double raw = 0.0;     ///< 1/2 + integral/pi, before clamping
    double clamped = 0.0; ///< raw restricted to [0, 1]
    int nodes = 0;
    double phi_max = 0.0;
};

inline void check_inputs(const HestonParams& p, double S, double K, double r, double tau) {
    p.validate();
    if (!(S > 0.0) || !std::isfinite(S)) throw InvalidInput("heston: S must be finite and > 0");
    if (!(K > 0.0) || !std::isfinite(K)) throw InvalidInput("heston: K must be finite and > 0");
    if (!std::isfinite(r)) throw InvalidInput("heston: r must be finite");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("heston: tau must be finite and > 0");
}

// Eq-8-style inversion integral with adaptive truncation and node doubling.
inline PjResult pj(const HestonParams& p, double S, double K, double r, double tau, int j,
                   double price_tol) {
    const double log_spot = std::log(S);
    const double log_strike = std::log(K);
    const cd i(0.0, 1.0);

    auto integrand = [&](double phi) {
        const cd lf = log_cf(phi, p, log_spot, r, tau, j);
        if (!std::isfinite(lf.real()) || !std::isfinite(lf.imag())) {
            throw NumericFailure("heston_cf: nonfinite exponent at phi=" + std::to_string(phi) +
                                 " (pathological parameter vector)");
        }
        const cd val = std::exp(lf - i * (phi * log_strike)) / (i * phi);
        return val.real();
    };

    // Extend the truncation point until the integrand magnitude has decayed
    // below 1e-12; the tail beyond that is dominated by the exponential
    // decay of the characteristic function.
    constexpr double kEps = 1e-8;
    constexpr double kTail = 1e-12;
    double phi_max = 200.0;
    auto magnitude = [&](double phi) {
        const cd lf = log_cf(phi, p, log_spot, r, tau, j);
        return std::exp(lf.real()) / phi;
    };
    while (magnitude(phi_max) > kTail) {
        phi_max *= 2.0;
        if (phi_max > 102400.0) {
            throw NumericFailure("heston_pj: integrand tail above tolerance at phi_max cap");
        }
    }

    // A Gauss-Legendre rule resolves exp(i*theta(phi)) once its node count
    // exceeds roughly half the total phase swept over the interval. Measure
    // the phase slope of the full integrand (characteristic function plus the
    // strike factor) at a few points and budget nodes for the steepest one,
    // so deep in/out-of-the-money strikes get the resolution they need while
    // ordinary moneyness keeps the 1024-node ceiling.
    double slope_max = std::fabs(log_spot - log_strike) + std::fabs(r) * tau + 1.0;
    const double h = 1e-4 * phi_max;
    for (double frac : {0.05, 0.25, 0.5, 0.75, 1.0}) {
        const double phi = frac * phi_max;
        const double im_hi = log_cf(phi + h, p, log_spot, r, tau, j).imag();
        const double im_lo = log_cf(phi - h, p, log_spot, r, tau, j).imag();
        const double slope = std::fabs((im_hi - im_lo) / (2.0 * h) - log_strike);
        slope_max = std::max(slope_max, slope);
    }
    int max_nodes = 1024;
    const double needed = 0.55 * slope_max * phi_max + 64.0;
    while (max_nodes < needed && max_nodes < 16384) max_nodes *= 2;
    if (max_nodes < 16384) max_nodes *= 2; // one spare doubling for the convergence pair

    PjResult res;
    res.phi_max = phi_max;
    double prev = quad::integrate_legendre(integrand, kEps, phi_max, 64);
    int n = 64;
    bool converged = false;
    while (n < max_nodes) {
        n *= 2;
        const double cur = quad::integrate_legendre(integrand, kEps, phi_max, n);
        if (std::fabs(cur - prev) <= price_tol * M_PI) {
            prev = cur;
            converged = true;
            break;
        }
        prev = cur;
    }
    if (!converged) {
        // accept the capped value only if a 3/4-size rule lands nearby
        const double cur = prev;
        const double check = quad::integrate_legendre(integrand, kEps, phi_max, max_nodes * 3 / 4);
        if (std::fabs(cur - check) > 1e4 * price_tol * M_PI) {
            throw NumericFailure("heston_pj: quadrature did not self-converge at " +
                                 std::to_string(max_nodes) + " nodes");
        }
    }
    res.nodes = n;
    // The integrand tends to the finite limit alpha = d/dphi Im(log f_j) - ln K
    // at phi = 0, so the sliver [0, eps) skipped by the quadrature carries mass
    // alpha*eps. Restoring it matters for extreme moneyness, where alpha is
    // |ln(S/K)|-sized and the sliver alone would breach the price tolerance.
    const double alpha =
        log_cf(kEps, p, log_spot, r, tau, j).imag() / kEps - log_strike;
    res.raw = 0.5 + (prev + alpha * kEps) / M_PI;
    res.clamped = std::clamp(res.raw, 0.0, 1.0);
    return res;
}

} // namespace heston_detail

/// Characteristic function f_j = exp(C_j + D_j v0 + i phi ln S), j in {1,2}.
inline std::complex<double> heston_cf(double phi, const HestonParams& p, double S, double r,
                                      double tau, int j) {
    heston_detail::check_inputs(p, S, 1.0, r, tau);
    if (j != 1 && j != 2) throw InvalidInput("heston_cf: j must be 1 or 2");
    const std::complex<double> lf =
        heston_detail::log_cf(phi, p, std::log(S), r, tau, j);
    if (!std::isfinite(lf.real()) || !std::isfinite(lf.imag())) {
        throw NumericFailure("heston_cf: nonfinite exponent (pathological parameter vector)");
    }
    return std::exp(lf);
}

/// Pseudo-probability P_j = 1/2 + (1/pi) ∫ Re[e^{-i phi ln K} f_j/(i phi)] dphi,
/// clamped to [0,1]. Use heston_pj_detail for the raw value and diagnostics.
inline heston_detail::PjResult heston_pj_detail(const HestonParams& p, double S, double K,
                                                double r, double tau, int j) {
    heston_detail::check_inputs(p, S, K, r, tau);
    if (j != 1 && j != 2) throw InvalidInput("heston_pj: j must be 1 or 2");
    // Probability-space tolerance chosen so the price error stays below
    // 1e-9 * S regardless of which leg dominates.
    const double tol = 0.5e-9 * S / std::max(S, K * std::exp(-r * tau));
    return heston_detail::pj(p, S, K, r, tau, j, std::max(tol, 1e-13));
}

inline double heston_pj(const HestonParams& p, double S, double K, double r, double tau, int j) {
    return heston_pj_detail(p, S, K, r, tau, j).clamped;
}

/// Semi-analytic call price S*P1 - K*e^{-r tau}*P2.
inline PriceResult heston_call(const HestonParams& p, double S, double K, double r, double tau) {
    const auto p1 = heston_pj_detail(p, S, K, r, tau, 1);
    const auto p2 = heston_pj_detail(p, S, K, r, tau, 2);
    PriceResult res;
    res.price = S * p1.clamped - K * std::exp(-r * tau) * p2.clamped;
    res.quad_nodes = std::max(p1.nodes, p2.nodes);
    res.phi_max = std::max(p1.phi_max, p2.phi_max);
    res.raw_p1 = p1.raw;
    res.raw_p2 = p2.raw;
    return res;
}

} // namespace volcal
