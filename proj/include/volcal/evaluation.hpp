#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "volcal/calibration.hpp"
#include "volcal/errors.hpp"
#include "volcal/market_data.hpp"
#include "volcal/model.hpp"

namespace volcal {

/// Mean relative absolute error (1/n) sum |model - market| / market.
inline double mrae(const std::vector<double>& model_prices,
                   const std::vector<double>& market_prices) {
    if (model_prices.size() != market_prices.size()) {
        throw InvalidInput("mrae: length mismatch");
    }
    if (model_prices.empty()) throw InvalidInput("mrae: empty inputs");
    double sum = 0.0;
    for (std::size_t i = 0; i < model_prices.size(); ++i) {
        if (!(market_prices[i] > 0.0)) {
            throw InvalidInput("mrae: market price must be > 0 at index " + std::to_string(i));
        }
        sum += std::fabs(model_prices[i] - market_prices[i]) / market_prices[i];
    }
    return sum / static_cast<double>(model_prices.size());
}

/// Root mean square error sqrt((1/n) sum (model - market)^2).
inline double rmse(const std::vector<double>& model_prices,
                   const std::vector<double>& market_prices) {
    if (model_prices.size() != market_prices.size()) {
        throw InvalidInput("rmse: length mismatch");
    }
    if (model_prices.empty()) throw InvalidInput("rmse: empty inputs");
    double sum = 0.0;
    for (std::size_t i = 0; i < model_prices.size(); ++i) {
        const double d = model_prices[i] - market_prices[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(model_prices.size()));
}

/// 0 when the stochastic model matches or beats Black-Scholes, 1 otherwise.
/// Ties go to the stochastic model.
inline int compare_dummy(double bs_err, double sv_err) {
    if (!(bs_err >= 0.0) || !(sv_err >= 0.0)) {
        throw InvalidInput("compare_dummy: errors must be >= 0");
    }
    return sv_err <= bs_err ? 0 : 1;
}

/// One quote's market price against Black-Scholes and one stochastic model.
struct ComparisonRow {
    std::string quote_id;
    double real_price = 0.0;
    double bs_price = 0.0;
    double sv_price = 0.0;
    double bs_err = 0.0; ///< |bs - real| / real
    double sv_err = 0.0;
    int dummy = 0;
};

inline ComparisonRow make_comparison_row(const Quote& q, double bs_price, double sv_price) {
    if (!(q.mid_price > 0.0)) {
        throw InvalidInput("make_comparison_row: real price must be > 0 for quote '" +
                           q.quote_id + "'");
    }
    ComparisonRow row;
    row.quote_id = q.quote_id;
    row.real_price = q.mid_price;
    row.bs_price = bs_price;
    row.sv_price = sv_price;
    row.bs_err = std::fabs(bs_price - q.mid_price) / q.mid_price;
    row.sv_err = std::fabs(sv_price - q.mid_price) / q.mid_price;
    row.dummy = compare_dummy(row.bs_err, row.sv_err);
    return row;
}

/// One row of a worst-value tally: the three models' errors on one
/// dataset/metric cell, tagged in- or out-of-sample.
struct WorstRow {
    double bs = 0.0;
    double heston = 0.0;
    double msv = 0.0;
    bool out_sample = false;
};

struct WorstCounts {
    long bs_in = 0;
    long heston_in = 0;
    long msv_in = 0;
    long bs_out = 0;
    long heston_out = 0;
    long msv_out = 0;

    long total() const { return bs_in + heston_in + msv_in + bs_out + heston_out + msv_out; }
};

/// Blames exactly one model per row for the largest error. Ties blame
/// Black-Scholes first, then Heston, then MSV.
inline WorstCounts worst_value_counts(const std::vector<WorstRow>& rows) {
    WorstCounts counts;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const WorstRow& row = rows[i];
        if (!std::isfinite(row.bs) || !std::isfinite(row.heston) || !std::isfinite(row.msv)) {
            throw InvalidInput("worst_value_counts: nonfinite entry in row " +
                               std::to_string(i));
        }
        int worst = 0;
        double worst_val = row.bs;
        if (row.heston > worst_val) {
            worst = 1;
            worst_val = row.heston;
        }
        if (row.msv > worst_val) worst = 2;
        if (row.out_sample) {
            (worst == 0 ? counts.bs_out : worst == 1 ? counts.heston_out : counts.msv_out)++;
        } else {
            (worst == 0 ? counts.bs_in : worst == 1 ? counts.heston_in : counts.msv_in)++;
        }
    }
    return counts;
}

/// Error metrics for one model on one dataset. calib_seconds stays empty for
/// Black-Scholes (the benchmark table prints Nil there).
struct ModelMetrics {
    double mrae_in = 0.0;
    double rmse_in = 0.0;
    double mrae_out = 0.0;
    double rmse_out = 0.0;
    std::optional<double> calib_seconds;
};

struct ErrorReport {
    std::string dataset_label;
    ModelMetrics bs;
    ModelMetrics heston;
    ModelMetrics msv;
};

namespace eval_detail {

inline void metric_pair(const ModelParams& params, const Dataset& ds, int msv_order,
                        double& mrae_out, double& rmse_out) {
    std::vector<double> model_prices, market_prices;
    model_prices.reserve(ds.quotes.size());
    market_prices.reserve(ds.quotes.size());
    for (const Quote& q : ds.quotes) {
        model_prices.push_back(model_price(params, q.spot, q.strike, q.rate, q.tau, msv_order));
        market_prices.push_back(q.mid_price);
    }
    mrae_out = mrae(model_prices, market_prices);
    rmse_out = rmse(model_prices, market_prices);
}

inline ModelMetrics model_metrics(const ModelParams& params, const Dataset& in,
                                  const Dataset& out, int msv_order) {
    ModelMetrics m;
    eval_detail::metric_pair(params, in, msv_order, m.mrae_in, m.rmse_in);
    eval_detail::metric_pair(params, out, msv_order, m.mrae_out, m.rmse_out);
    return m;
}

} // namespace eval_detail

/// Benchmark report over one dataset: in-sample metrics on the even half,
/// out-of-sample metrics by pricing the odd half with the same (in-sample
/// fitted) parameters. No refit happens here.
inline ErrorReport build_error_report(const Dataset& ds, const CalibrationResult& bs_fit,
                                      const CalibrationResult& heston_fit,
                                      const CalibrationResult& msv_fit, int msv_order = 4) {
    if (bs_fit.model != Model::bs || heston_fit.model != Model::heston ||
        msv_fit.model != Model::msv) {
        throw InvalidInput("build_error_report: calibration results out of order "
                           "(expected bs, heston, msv)");
    }
    const auto [in_half, out_half] = split_in_out(ds);
    if (in_half.quotes.empty() || out_half.quotes.empty()) {
        throw InvalidInput("build_error_report: dataset too small to split");
    }
    ErrorReport rep;
    rep.dataset_label = ds.label;
    rep.bs = eval_detail::model_metrics(bs_fit.params, in_half, out_half, msv_order);
    rep.heston = eval_detail::model_metrics(heston_fit.params, in_half, out_half, msv_order);
    rep.msv = eval_detail::model_metrics(msv_fit.params, in_half, out_half, msv_order);
    if (heston_fit.elapsed_seconds > 0.0) rep.heston.calib_seconds = heston_fit.elapsed_seconds;
    if (msv_fit.elapsed_seconds > 0.0) rep.msv.calib_seconds = msv_fit.elapsed_seconds;
    return rep;
}

namespace eval_detail {

inline std::string fixed(double v, int dp, int width) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%*.*f", width, dp, v);
    return buf;
}

inline std::string padded(const std::string& s, int width) {
    if (static_cast<int>(s.size()) >= width) return s;
    return std::string(static_cast<std::size_t>(width) - s.size(), ' ') + s;
}

} // namespace eval_detail

/// Plain-text benchmark table: one metric per row, one model per column,
/// relative errors shown both as fractions and percent.
inline std::string render_error_report_text(const ErrorReport& rep) {
    using eval_detail::fixed;
    using eval_detail::padded;
    const int w = 14;
    std::string out;
    out += "dataset: " + rep.dataset_label + "\n";
    out += padded("metric", 16) + padded("bs", w) + padded("heston", w) + padded("msv", w) + "\n";
    auto metric_row = [&](const char* name, double bs, double heston, double msv, int dp) {
        out += padded(name, 16) + fixed(bs, dp, w) + fixed(heston, dp, w) + fixed(msv, dp, w) +
               "\n";
    };
    metric_row("mrae_in", rep.bs.mrae_in, rep.heston.mrae_in, rep.msv.mrae_in, 6);
    metric_row("mrae_in_pct", 100.0 * rep.bs.mrae_in, 100.0 * rep.heston.mrae_in,
               100.0 * rep.msv.mrae_in, 4);
    metric_row("mrae_out", rep.bs.mrae_out, rep.heston.mrae_out, rep.msv.mrae_out, 6);
    metric_row("mrae_out_pct", 100.0 * rep.bs.mrae_out, 100.0 * rep.heston.mrae_out,
               100.0 * rep.msv.mrae_out, 4);
    metric_row("rmse_in", rep.bs.rmse_in, rep.heston.rmse_in, rep.msv.rmse_in, 6);
    metric_row("rmse_out", rep.bs.rmse_out, rep.heston.rmse_out, rep.msv.rmse_out, 6);
    auto seconds_cell = [&](const std::optional<double>& s) {
        return s ? fixed(*s, 3, w) : padded("Nil", w);
    };
    out += padded("calib_seconds", 16) + seconds_cell(rep.bs.calib_seconds) +
           seconds_cell(rep.heston.calib_seconds) + seconds_cell(rep.msv.calib_seconds) + "\n";
    return out;
}

/// Plain-text per-quote comparison table: real price, both model prices,
/// relative errors at four decimals, and the 0/1 dummy (0 means the
/// stochastic model matched or beat Black-Scholes).
inline std::string render_comparison_table_text(const std::vector<ComparisonRow>& rows) {
    using eval_detail::fixed;
    using eval_detail::padded;
    std::string out;
    out += padded("quote_id", 12) + padded("real", 12) + padded("bs", 12) + padded("sv", 12) +
           padded("bs_err", 10) + padded("sv_err", 10) + padded("compare", 9) + "\n";
    for (const ComparisonRow& r : rows) {
        out += padded(r.quote_id, 12) + fixed(r.real_price, 2, 12) + fixed(r.bs_price, 2, 12) +
               fixed(r.sv_price, 2, 12) + fixed(r.bs_err, 4, 10) + fixed(r.sv_err, 4, 10) +
               padded(std::to_string(r.dummy), 9) + "\n";
    }
    return out;
}

} // namespace volcal
