#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "volcal/errors.hpp"
#include "volcal/market_data.hpp"
#include "volcal/model.hpp"
#include "volcal/rng.hpp"

namespace volcal {

enum class LossKind { sse, rmse };

inline const char* loss_kind_name(LossKind k) {
    return k == LossKind::sse ? "sse" : "rmse";
}

struct CalibrationConfig {
    Model model = Model::bs;
    LossKind loss_kind = LossKind::sse;
    int max_evals = 2000;
    int n_starts = 3;
    double tolerance = 1e-10; ///< simplex loss-spread stop threshold
    std::uint64_t seed = 0;   ///< jitter for starts beyond the first
    double feller_penalty_weight = 0.0;
    int msv_order = 4;

    void validate() const {
        if (max_evals < 100) throw InvalidInput("CalibrationConfig: max_evals must be >= 100");
        if (n_starts < 1) throw InvalidInput("CalibrationConfig: n_starts must be >= 1");
        if (!(tolerance > 0.0)) throw InvalidInput("CalibrationConfig: tolerance must be > 0");
        if (!(feller_penalty_weight >= 0.0)) {
            throw InvalidInput("CalibrationConfig: feller_penalty_weight must be >= 0");
        }
        if (msv_order < 2 || msv_order > 4) {
            throw InvalidInput("CalibrationConfig: msv_order must be in {2,3,4}");
        }
    }
};

struct CalibrationResult {
    Model model = Model::bs;
    ModelParams params;
    double loss = 0.0;
    long long n_evals = 0; ///< objective evaluations summed over all starts
    double elapsed_seconds = 0.0;
    int start_index = 0; ///< which start produced the winner
    bool converged = false;
    LossKind loss_kind = LossKind::sse;
};

/// Loss over a dataset: sum of squared price errors (or its RMSE transform),
/// plus the soft Feller penalty for Heston. SSE and RMSE share every argmin
/// because rmse = sqrt(sse / n) monotonically.
inline double calibration_loss(const ModelParams& params, const Dataset& ds,
                               LossKind kind = LossKind::sse,
                               double feller_penalty_weight = 0.0, int msv_order = 4) {
    if (ds.quotes.empty()) throw InvalidInput("calibration_loss: dataset is empty");
    double sse = 0.0;
    for (const Quote& q : ds.quotes) {
        double model_mid = 0.0;
        try {
            model_mid = model_price(params, q.spot, q.strike, q.rate, q.tau, msv_order);
        } catch (const NumericFailure& e) {
            throw NumericFailure("calibration_loss: pricing failed for quote '" + q.quote_id +
                                 "': " + e.what());
        }
        const double err = model_mid - q.mid_price;
        sse += err * err;
    }
    if (const auto* h = std::get_if<HestonParams>(&params); h && feller_penalty_weight > 0.0) {
        const double excess =
            std::max(0.0, h->vol_of_vol * h->vol_of_vol - 2.0 * h->kappa * h->theta);
        sse += feller_penalty_weight * excess * excess;
    }
    if (kind == LossKind::rmse) {
        return std::sqrt(sse / static_cast<double>(ds.quotes.size()));
    }
    return sse;
}

/// Bijection onto unconstrained coordinates: log for positive fields (the
/// MSV sigma-hats on squared scale), atanh for rho. Requires strictly
/// interior parameters.
inline std::vector<double> transform_to_unbounded(const ModelParams& params) {
    auto log_pos = [](double x, const char* name) {
        if (!(x > 0.0)) {
            throw InvalidInput(std::string("transform_to_unbounded: ") + name +
                               " must be > 0");
        }
        return std::log(x);
    };
    if (const auto* bs = std::get_if<BsParams>(&params)) {
        return {log_pos(bs->sigma, "sigma")};
    }
    if (const auto* h = std::get_if<HestonParams>(&params)) {
        if (!(std::fabs(h->rho) < 1.0)) {
            throw InvalidInput("transform_to_unbounded: |rho| must be < 1");
        }
        return {log_pos(h->v0, "v0"), log_pos(h->kappa, "kappa"), log_pos(h->theta, "theta"),
                log_pos(h->vol_of_vol, "vol_of_vol"), std::atanh(h->rho)};
    }
    const auto& m = std::get<MsvParams>(params);
    return {log_pos(m.sigma0_hat * m.sigma0_hat, "sigma0_hat^2"),
            log_pos(m.sigma1_hat * m.sigma1_hat, "sigma1_hat^2"),
            log_pos(m.sigma2_hat * m.sigma2_hat, "sigma2_hat^2"), log_pos(m.lambda, "lambda"),
            log_pos(m.k, "k")};
}

inline ModelParams untransform(const std::vector<double>& x, Model model) {
    auto need = [&](std::size_t n) {
        if (x.size() != n) {
            throw InvalidInput("untransform: expected " + std::to_string(n) +
                               " coordinates, got " + std::to_string(x.size()));
        }
    };
    switch (model) {
        case Model::bs: {
            need(1);
            return BsParams{std::exp(x[0])};
        }
        case Model::heston: {
            need(5);
            HestonParams h;
            h.v0 = std::exp(x[0]);
            h.kappa = std::exp(x[1]);
            h.theta = std::exp(x[2]);
            h.vol_of_vol = std::exp(x[3]);
            h.rho = std::tanh(x[4]);
            return h;
        }
        case Model::msv: {
            need(5);
            MsvParams m;
            m.sigma0_hat = std::exp(0.5 * x[0]);
            m.sigma1_hat = std::exp(0.5 * x[1]);
            m.sigma2_hat = std::exp(0.5 * x[2]);
            m.lambda = std::exp(x[3]);
            m.k = std::exp(x[4]);
            return m;
        }
    }
    throw InvalidInput("untransform: unknown model");
}

struct MinimizeResult {
    std::vector<double> x;
    double f = 0.0;
    long long n_evals = 0;
    bool converged = false;
};

/// Nelder-Mead with reflection 1, expansion 2, contraction 0.5, shrink 0.5.
/// Stops when the simplex loss-spread drops below tolerance or the
/// evaluation budget runs out; always returns the best point seen.
template <typename F>
MinimizeResult nelder_mead(F&& f, const std::vector<double>& x0, int max_evals,
                           double tolerance) {
    const std::size_t n = x0.size();
    if (n == 0) throw InvalidInput("nelder_mead: empty start point");

    struct Vertex {
        std::vector<double> x;
        double f;
    };
    MinimizeResult res;
    res.x = x0;
    res.f = std::numeric_limits<double>::infinity();

    long long evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        ++evals;
        if (v < res.f) {
            res.f = v;
            res.x = x;
        }
        return v;
    };

    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back({x0, eval(x0)});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = x0;
        x[i] += 0.25;
        if (evals >= max_evals) break;
        simplex.push_back({x, eval(x)});
    }

    while (simplex.size() == n + 1 && evals < max_evals) {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        if (simplex.back().f - simplex.front().f < tolerance) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        const Vertex& worst = simplex.back();
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + t * (centroid[j] - worst.x[j]);
            return x;
        };

        std::vector<double> xr = along(1.0);
        const double fr = eval(xr);
        if (fr < simplex.front().f) {
            if (evals >= max_evals) {
                simplex.back() = {std::move(xr), fr};
                continue;
            }
            std::vector<double> xe = along(2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex.back() = {std::move(xe), fe};
            } else {
                simplex.back() = {std::move(xr), fr};
            }
            continue;
        }
        if (fr < simplex[n - 1].f) {
            simplex.back() = {std::move(xr), fr};
            continue;
        }
        if (evals >= max_evals) break;
        const bool outside = fr < worst.f;
        std::vector<double> xc = along(outside ? 0.5 : -0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : worst.f)) {
            simplex.back() = {std::move(xc), fc};
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            if (evals >= max_evals) break;
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i].x[j] = simplex[0].x[j] + 0.5 * (simplex[i].x[j] - simplex[0].x[j]);
            }
            simplex[i].f = eval(simplex[i].x);
        }
    }
    res.n_evals = evals;
    return res;
}

namespace calib_detail {

inline ModelParams default_start(Model model) {
    switch (model) {
        case Model::bs: return BsParams{0.2};
        case Model::heston: {
            HestonParams h;
            h.v0 = 0.04;
            h.kappa = 1.5;
            h.theta = 0.04;
            h.vol_of_vol = 0.5;
            h.rho = -0.5;
            return h;
        }
        case Model::msv: {
            MsvParams m;
            m.sigma0_hat = 0.2;
            m.sigma1_hat = 0.1;
            m.sigma2_hat = 0.2;
            m.lambda = 1.0;
            m.k = 0.1;
            return m;
        }
    }
    throw InvalidInput("default_start: unknown model");
}

/// Start points in transformed space: the model default first, then jittered
/// copies (+-0.5 per log coordinate, +-0.2 for atanh-rho), all drawn from one
/// seed-determined sequence so the set never depends on scheduling.
inline std::vector<std::vector<double>> start_points(const CalibrationConfig& cfg) {
    const std::vector<double> center = transform_to_unbounded(default_start(cfg.model));
    std::vector<std::vector<double>> starts;
    starts.reserve(static_cast<std::size_t>(cfg.n_starts));
    starts.push_back(center);
    std::uint64_t state = cfg.seed;
    for (int s = 1; s < cfg.n_starts; ++s) {
        std::vector<double> x = center;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const bool is_rho = cfg.model == Model::heston && j == 4;
            const double half_width = is_rho ? 0.2 : 0.5;
            x[j] += rng::uniform(state, -half_width, half_width);
        }
        starts.push_back(std::move(x));
    }
    return starts;
}

} // namespace calib_detail

/// Multi-start calibration. Starts run concurrently; the winner is the
/// lexicographic minimum of (loss, start_index), so the result is identical
/// for any interleaving. Throws CalibrationFailure when no start reaches a
/// finite loss.
inline CalibrationResult calibrate(const Dataset& ds, const CalibrationConfig& cfg) {
    cfg.validate();
    if (ds.quotes.empty()) throw InvalidInput("calibrate: dataset is empty");

    const auto t0 = std::chrono::steady_clock::now();
    const auto starts = calib_detail::start_points(cfg);

    constexpr double kFailedLoss = 1e100;
    auto objective = [&](const std::vector<double>& x) {
        for (double xi : x) {
            if (!std::isfinite(xi) || std::fabs(xi) > 700.0) return kFailedLoss;
        }
        try {
            const ModelParams p = untransform(x, cfg.model);
            const double loss = calibration_loss(p, ds, cfg.loss_kind,
                                                 cfg.feller_penalty_weight, cfg.msv_order);
            return std::isfinite(loss) ? loss : kFailedLoss;
        } catch (const InvalidInput&) {
            return kFailedLoss;
        } catch (const NumericFailure&) {
            return kFailedLoss;
        }
    };

    std::vector<MinimizeResult> runs(starts.size());
    {
        std::vector<std::thread> workers;
        workers.reserve(starts.size());
        for (std::size_t s = 0; s < starts.size(); ++s) {
            workers.emplace_back([&, s]() {
                runs[s] = nelder_mead(objective, starts[s], cfg.max_evals, cfg.tolerance);
            });
        }
        for (auto& w : workers) w.join();
    }

    std::size_t best = 0;
    long long total_evals = 0;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        total_evals += runs[s].n_evals;
        if (runs[s].f < runs[best].f) best = s;
    }
    if (!(runs[best].f < kFailedLoss)) {
        throw CalibrationFailure("calibrate: no start reached a finite loss");
    }

    CalibrationResult res;
    res.model = cfg.model;
    res.params = untransform(runs[best].x, cfg.model);
    res.loss = runs[best].f;
    res.n_evals = total_evals;
    res.start_index = static_cast<int>(best);
    res.converged = runs[best].converged;
    res.loss_kind = cfg.loss_kind;
    const auto t1 = std::chrono::steady_clock::now();
    res.elapsed_seconds =
        std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
    return res;
}

} // namespace volcal
