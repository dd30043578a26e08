#pragma once

#include <string>
#include <variant>

#include "volcal/black_scholes.hpp"
#include "volcal/errors.hpp"
#include "volcal/heston.hpp"
#include "volcal/msv.hpp"

namespace volcal {

enum class Model { bs, heston, msv };

inline const char* model_name(Model m) {
    switch (m) {
        case Model::bs: return "bs";
        case Model::heston: return "heston";
        case Model::msv: return "msv";
    }
    throw InvalidInput("model_name: unknown model");
}

inline Model model_from_name(const std::string& name) {
    if (name == "bs") return Model::bs;
    if (name == "heston") return Model::heston;
    if (name == "msv") return Model::msv;
    throw InvalidInput("unknown model '" + name + "' (expected bs, heston, or msv)");
}

/// Parameter set for whichever model is active.
using ModelParams = std::variant<BsParams, HestonParams, MsvParams>;

inline Model model_of(const ModelParams& p) {
    if (std::holds_alternative<BsParams>(p)) return Model::bs;
    if (std::holds_alternative<HestonParams>(p)) return Model::heston;
    return Model::msv;
}

/// Call price under the active model. msv_order only affects MSV.
inline double model_price(const ModelParams& p, double S, double K, double r, double tau,
                          int msv_order = 4) {
    if (const auto* bs = std::get_if<BsParams>(&p)) {
        return bs_call(S, K, r, tau, bs->sigma);
    }
    if (const auto* h = std::get_if<HestonParams>(&p)) {
        return heston_call(*h, S, K, r, tau).price;
    }
    return msv_call(std::get<MsvParams>(p), S, K, r, tau, msv_order).price;
}

} // namespace volcal
