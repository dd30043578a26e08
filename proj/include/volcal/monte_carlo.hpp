#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

#include "volcal/black_scholes.hpp"
#include "volcal/errors.hpp"
#include "volcal/heston.hpp"
#include "volcal/rng.hpp"

namespace volcal {

struct McConfig {
    std::int64_t n_paths = 100000;
    int n_steps = 250; ///< time steps per year; a path of maturity tau uses ceil(n_steps * tau)
    std::uint64_t seed = 0;
    bool antithetic = true;

    void validate() const {
        if (n_paths <= 0) throw InvalidInput("McConfig: n_paths must be > 0");
        if (n_steps <= 0) throw InvalidInput("McConfig: n_steps must be > 0");
        if (antithetic && (n_paths % 2) != 0) {
            throw InvalidInput("McConfig: antithetic sampling needs an even n_paths");
        }
    }
};

struct McEstimate {
    double price = 0.0;
    double stderr_est = 0.0; ///< standard error of the mean
    std::int64_t n_effective = 0; ///< independent samples behind the estimate
};

namespace mc_detail {

inline void check_contract(double S, double K, double tau) {
    if (!(S > 0.0) || !std::isfinite(S)) throw InvalidInput("mc: spot must be finite and > 0");
    if (!(K > 0.0) || !std::isfinite(K)) throw InvalidInput("mc: strike must be finite and > 0");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidInput("mc: tau must be finite and > 0");
}

/// Runs fn(first, last) over [0, n) split across hardware threads (or
/// VOLCAL_THREADS when set). Each call owns a disjoint index range, so
/// writes into per-index slots never race, and chunking never changes what
/// any index computes.
template <typename Fn>
void parallel_for(std::int64_t n, Fn fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("VOLCAL_THREADS")) {
        const int requested = std::atoi(env);
        if (requested > 0) hw = static_cast<unsigned>(requested);
    }
    if (hw == 0) hw = 1;
    const std::int64_t n_chunks = std::min<std::int64_t>(hw, n);
    if (n_chunks <= 1) {
        fn(std::int64_t{0}, n);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_chunks));
    const std::int64_t chunk = (n + n_chunks - 1) / n_chunks;
    for (std::int64_t c = 0; c < n_chunks; ++c) {
        const std::int64_t first = c * chunk;
        const std::int64_t last = std::min(first + chunk, n);
        workers.emplace_back([=]() { fn(first, last); });
    }
    for (auto& w : workers) w.join();
}

/// Mean and standard error from per-sample values, accumulated in index
/// order so the result does not depend on how the samples were produced.
inline McEstimate reduce(const std::vector<double>& samples) {
    const std::int64_t n = static_cast<std::int64_t>(samples.size());
    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : samples) {
        const double d = v - mean;
        ss += d * d;
    }
    McEstimate est;
    est.price = mean;
    est.n_effective = n;
    if (n > 1) {
        est.stderr_est = std::sqrt(ss / (static_cast<double>(n - 1) * static_cast<double>(n)));
    }
    return est;
}

} // namespace mc_detail

/// Heston call by full-truncation Euler on (ln S, v): the variance enters
/// drift and diffusion as max(v, 0) while v itself may go negative.
/// Antithetic pairs share one stream (the partner path flips every normal);
/// each pair average is one sample. The estimate is bit-identical for a
/// given seed regardless of thread count.
inline McEstimate mc_heston_call(const HestonParams& p, double S, double K, double r,
                                 double tau, const McConfig& cfg) {
    p.validate();
    cfg.validate();
    mc_detail::check_contract(S, K, tau);

    const std::int64_t steps =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(cfg.n_steps * tau)));
    const double dt = tau / static_cast<double>(steps);
    const double sqrt_dt = std::sqrt(dt);
    const double rho_c = std::sqrt(1.0 - p.rho * p.rho);
    const double disc = std::exp(-r * tau);
    const double log_s0 = std::log(S);

    const std::int64_t n_samples = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
    std::vector<double> samples(static_cast<std::size_t>(n_samples));

    mc_detail::parallel_for(n_samples, [&](std::int64_t first, std::int64_t last) {
        for (std::int64_t i = first; i < last; ++i) {
            rng::NormalStream ns(cfg.seed, static_cast<std::uint64_t>(i));
            double x_a = log_s0, v_a = p.v0;
            double x_b = log_s0, v_b = p.v0;
            for (std::int64_t s = 0; s < steps; ++s) {
                const double z1 = ns.next();
                const double z2 = ns.next();
                const double w1 = z1;
                const double w2 = p.rho * z1 + rho_c * z2;
                {
                    const double vp = std::max(v_a, 0.0);
                    const double sv = std::sqrt(vp);
                    x_a += (r - 0.5 * vp) * dt + sv * sqrt_dt * w1;
                    v_a += p.kappa * (p.theta - vp) * dt + p.vol_of_vol * sv * sqrt_dt * w2;
                }
                if (cfg.antithetic) {
                    const double vp = std::max(v_b, 0.0);
                    const double sv = std::sqrt(vp);
                    x_b += (r - 0.5 * vp) * dt - sv * sqrt_dt * w1;
                    v_b += p.kappa * (p.theta - vp) * dt - p.vol_of_vol * sv * sqrt_dt * w2;
                }
            }
            double payoff = std::max(std::exp(x_a) - K, 0.0);
            if (cfg.antithetic) {
                payoff = 0.5 * (payoff + std::max(std::exp(x_b) - K, 0.0));
            }
            samples[static_cast<std::size_t>(i)] = disc * payoff;
        }
    });
    return mc_detail::reduce(samples);
}

/// Black-Scholes call by exact terminal sampling, mainly a cross-check for
/// the machinery around the Heston estimator.
inline McEstimate mc_bs_call(const BsParams& p, double S, double K, double r, double tau,
                             const McConfig& cfg) {
    p.validate();
    cfg.validate();
    mc_detail::check_contract(S, K, tau);

    const double sigma = p.sigma;
    const double drift = (r - 0.5 * sigma * sigma) * tau;
    const double vol = sigma * std::sqrt(tau);
    const double disc = std::exp(-r * tau);

    const std::int64_t n_samples = cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths;
    std::vector<double> samples(static_cast<std::size_t>(n_samples));

    mc_detail::parallel_for(n_samples, [&](std::int64_t first, std::int64_t last) {
        for (std::int64_t i = first; i < last; ++i) {
            rng::NormalStream ns(cfg.seed, static_cast<std::uint64_t>(i));
            const double z = ns.next();
            double payoff = std::max(S * std::exp(drift + vol * z) - K, 0.0);
            if (cfg.antithetic) {
                payoff = 0.5 * (payoff + std::max(S * std::exp(drift - vol * z) - K, 0.0));
            }
            samples[static_cast<std::size_t>(i)] = disc * payoff;
        }
    });
    return mc_detail::reduce(samples);
}

} // namespace volcal
