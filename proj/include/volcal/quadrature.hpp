#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "volcal/errors.hpp"

namespace volcal::quad {

/// Nodes and weights of a quadrature rule on its reference interval.
struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

namespace detail {

// Legendre nodes on [-1,1] by Newton iteration on the three-term recurrence.
inline Rule make_gauss_legendre(int n) {
    Rule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double z1 = 0.0, pp = 0.0;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        } while (std::fabs(z - z1) > 1e-15);
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return rule;
}

// Hermite nodes for ∫ exp(-t^2) f(t) dt, normalized recurrence so large n
// does not overflow.
inline Rule make_gauss_hermite(int n) {
    Rule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    constexpr double kPiM4 = 0.751125544464942482996;
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.x[1];
        } else {
            z = 2.0 * z - rule.x[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = kPiM4, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::fabs(z - z1) <= 1e-14) break;
        }
        rule.x[i] = z;
        rule.x[n - 1 - i] = -z;
        rule.w[i] = 2.0 / (pp * pp);
        rule.w[n - 1 - i] = rule.w[i];
    }
    return rule;
}

inline const Rule& cached(std::map<int, Rule>& cache, std::mutex& mu, int n, Rule (*make)(int)) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, make(n)).first;
    }
    return it->second;
}

} // namespace detail

/// n-point Gauss-Legendre rule on [-1,1]. Tables are built once and never
/// mutated afterwards.
inline const Rule& gauss_legendre(int n) {
    if (n < 2) throw InvalidInput("gauss_legendre: need at least 2 nodes");
    static std::map<int, Rule> cache;
    static std::mutex mu;
    return detail::cached(cache, mu, n, &detail::make_gauss_legendre);
}

/// n-point Gauss-Hermite rule for ∫ exp(-t^2) f(t) dt.
inline const Rule& gauss_hermite(int n) {
    if (n < 2) throw InvalidInput("gauss_hermite: need at least 2 nodes");
    static std::map<int, Rule> cache;
    static std::mutex mu;
    return detail::cached(cache, mu, n, &detail::make_gauss_hermite);
}

/// ∫_a^b f with the n-point Gauss-Legendre rule.
template <typename F>
double integrate_legendre(F&& f, double a, double b, int n) {
    const Rule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += rule.w[i] * f(mid + half * rule.x[i]);
    }
    return half * sum;
}

} // namespace volcal::quad
