#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "volcal/calibration.hpp"
#include "volcal/errors.hpp"
#include "volcal/evaluation.hpp"
#include "volcal/model.hpp"

namespace volcal {

using nlohmann::json;

/// Canonical text form used for every structured file: sorted keys (the
/// library's default object ordering), two-space indent, trailing newline.
/// Identical values therefore serialize to identical bytes.
inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

inline json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(what + ": " + e.what());
    }
}

namespace json_detail {

inline double get_num(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ParseError(what + ": missing or non-numeric field '" + key + "'");
    }
    return j[key].get<double>();
}

inline std::string get_str(const json& j, const char* key, const std::string& what) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw ParseError(what + ": missing or non-string field '" + key + "'");
    }
    return j[key].get<std::string>();
}

} // namespace json_detail

inline json params_to_json(const ModelParams& p) {
    json j;
    j["model"] = model_name(model_of(p));
    if (const auto* bs = std::get_if<BsParams>(&p)) {
        j["sigma"] = bs->sigma;
    } else if (const auto* h = std::get_if<HestonParams>(&p)) {
        j["v0"] = h->v0;
        j["kappa"] = h->kappa;
        j["theta"] = h->theta;
        j["vol_of_vol"] = h->vol_of_vol;
        j["rho"] = h->rho;
    } else {
        const auto& m = std::get<MsvParams>(p);
        j["sigma0_hat"] = m.sigma0_hat;
        j["sigma1_hat"] = m.sigma1_hat;
        j["sigma2_hat"] = m.sigma2_hat;
        j["lambda"] = m.lambda;
        j["k"] = m.k;
    }
    return j;
}

inline ModelParams params_from_json(const json& j) {
    const std::string what = "params";
    const Model model = model_from_name(json_detail::get_str(j, "model", what));
    using json_detail::get_num;
    switch (model) {
        case Model::bs: {
            BsParams p{get_num(j, "sigma", what)};
            p.validate();
            return p;
        }
        case Model::heston: {
            HestonParams p;
            p.v0 = get_num(j, "v0", what);
            p.kappa = get_num(j, "kappa", what);
            p.theta = get_num(j, "theta", what);
            p.vol_of_vol = get_num(j, "vol_of_vol", what);
            p.rho = get_num(j, "rho", what);
            p.validate();
            return p;
        }
        case Model::msv: {
            MsvParams p;
            p.sigma0_hat = get_num(j, "sigma0_hat", what);
            p.sigma1_hat = get_num(j, "sigma1_hat", what);
            p.sigma2_hat = get_num(j, "sigma2_hat", what);
            p.lambda = get_num(j, "lambda", what);
            p.k = get_num(j, "k", what);
            p.validate();
            return p;
        }
    }
    throw ParseError("params: unknown model");
}

/// Deterministic half of a calibration result. Timing lives in a separate
/// sidecar document so reruns with one seed stay byte-identical here.
inline json calibration_core_json(const CalibrationResult& r) {
    json j;
    j["model"] = model_name(r.model);
    j["params"] = params_to_json(r.params);
    j["loss"] = r.loss;
    j["loss_kind"] = loss_kind_name(r.loss_kind);
    j["n_evals"] = r.n_evals;
    j["start_index"] = r.start_index;
    j["converged"] = r.converged;
    return j;
}

inline json calibration_timing_json(const CalibrationResult& r) {
    json j;
    j["elapsed_seconds"] = r.elapsed_seconds;
    return j;
}

/// Rebuilds a CalibrationResult from the core document plus, when present,
/// the timing sidecar (elapsed_seconds stays 0 without one).
inline CalibrationResult calibration_from_json(const json& core, const json* timing = nullptr) {
    const std::string what = "calibration";
    CalibrationResult r;
    r.model = model_from_name(json_detail::get_str(core, "model", what));
    if (!core.contains("params")) throw ParseError(what + ": missing field 'params'");
    r.params = params_from_json(core["params"]);
    if (model_of(r.params) != r.model) {
        throw ParseError(what + ": params block does not match the declared model");
    }
    r.loss = json_detail::get_num(core, "loss", what);
    const std::string kind = json_detail::get_str(core, "loss_kind", what);
    if (kind == "sse") {
        r.loss_kind = LossKind::sse;
    } else if (kind == "rmse") {
        r.loss_kind = LossKind::rmse;
    } else {
        throw ParseError(what + ": unknown loss_kind '" + kind + "'");
    }
    r.n_evals = static_cast<long long>(json_detail::get_num(core, "n_evals", what));
    r.start_index = static_cast<int>(json_detail::get_num(core, "start_index", what));
    if (!core.contains("converged") || !core["converged"].is_boolean()) {
        throw ParseError(what + ": missing or non-boolean field 'converged'");
    }
    r.converged = core["converged"].get<bool>();
    if (timing != nullptr) {
        r.elapsed_seconds = json_detail::get_num(*timing, "elapsed_seconds", "timing");
    }
    return r;
}

namespace json_detail {

inline json metrics_to_json(const ModelMetrics& m) {
    json j;
    j["mrae_in"] = m.mrae_in;
    j["rmse_in"] = m.rmse_in;
    j["mrae_out"] = m.mrae_out;
    j["rmse_out"] = m.rmse_out;
    if (m.calib_seconds) {
        j["calib_seconds"] = *m.calib_seconds;
    } else {
        j["calib_seconds"] = nullptr;
    }
    return j;
}

inline ModelMetrics metrics_from_json(const json& j, const std::string& what) {
    ModelMetrics m;
    m.mrae_in = get_num(j, "mrae_in", what);
    m.rmse_in = get_num(j, "rmse_in", what);
    m.mrae_out = get_num(j, "mrae_out", what);
    m.rmse_out = get_num(j, "rmse_out", what);
    if (!j.contains("calib_seconds")) {
        throw ParseError(what + ": missing field 'calib_seconds'");
    }
    if (!j["calib_seconds"].is_null()) {
        m.calib_seconds = j["calib_seconds"].get<double>();
    }
    return m;
}

} // namespace json_detail

inline json report_to_json(const ErrorReport& rep) {
    json j;
    j["dataset_label"] = rep.dataset_label;
    j["models"]["bs"] = json_detail::metrics_to_json(rep.bs);
    j["models"]["heston"] = json_detail::metrics_to_json(rep.heston);
    j["models"]["msv"] = json_detail::metrics_to_json(rep.msv);
    return j;
}

inline ErrorReport report_from_json(const json& j) {
    const std::string what = "report";
    if (!j.contains("dataset_label") || !j["dataset_label"].is_string() ||
        !j.contains("models")) {
        throw ParseError(what + ": missing dataset_label or models");
    }
    ErrorReport rep;
    rep.dataset_label = j["dataset_label"].get<std::string>();
    const json& models = j["models"];
    for (const char* name : {"bs", "heston", "msv"}) {
        if (!models.contains(name)) {
            throw ParseError(what + ": missing model block '" + std::string(name) + "'");
        }
    }
    rep.bs = json_detail::metrics_from_json(models["bs"], what + ".bs");
    rep.heston = json_detail::metrics_from_json(models["heston"], what + ".heston");
    rep.msv = json_detail::metrics_from_json(models["msv"], what + ".msv");
    return rep;
}

inline json comparison_rows_to_json(const std::vector<ComparisonRow>& rows) {
    json arr = json::array();
    for (const ComparisonRow& r : rows) {
        json j;
        j["quote_id"] = r.quote_id;
        j["real_price"] = r.real_price;
        j["bs_price"] = r.bs_price;
        j["sv_price"] = r.sv_price;
        j["bs_err"] = r.bs_err;
        j["sv_err"] = r.sv_err;
        j["dummy"] = r.dummy;
        arr.push_back(j);
    }
    return arr;
}

inline std::vector<ComparisonRow> comparison_rows_from_json(const json& arr) {
    const std::string what = "comparison_rows";
    if (!arr.is_array()) throw ParseError(what + ": expected an array");
    std::vector<ComparisonRow> rows;
    rows.reserve(arr.size());
    for (const json& j : arr) {
        ComparisonRow r;
        r.quote_id = json_detail::get_str(j, "quote_id", what);
        r.real_price = json_detail::get_num(j, "real_price", what);
        r.bs_price = json_detail::get_num(j, "bs_price", what);
        r.sv_price = json_detail::get_num(j, "sv_price", what);
        r.bs_err = json_detail::get_num(j, "bs_err", what);
        r.sv_err = json_detail::get_num(j, "sv_err", what);
        r.dummy = static_cast<int>(json_detail::get_num(j, "dummy", what));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline json worst_counts_to_json(const WorstCounts& c) {
    json j;
    j["bs_in"] = c.bs_in;
    j["heston_in"] = c.heston_in;
    j["msv_in"] = c.msv_in;
    j["bs_out"] = c.bs_out;
    j["heston_out"] = c.heston_out;
    j["msv_out"] = c.msv_out;
    return j;
}

} // namespace volcal
